#include "scv/smt.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <deque>
#include <set>

namespace scv {

std::string smt_const(int64_t addr) { return "L" + std::to_string(addr); }

namespace {

std::optional<std::string> term(const Ex& e, std::vector<int64_t>& addrs) {
  if (e->k == K::Addr) {
    addrs.push_back(e->n);
    return smt_const(e->n);
  }
  if (is_int(e)) return e->n < 0 ? "(- " + std::to_string(-e->n) + ")" : std::to_string(e->n);
  return std::nullopt;
}

const char* smt_rel(Op o) {
  switch (o) {
    case Op::Eq: return "=";
    case Op::Gt: return ">";
    case Op::Lt: return "<";
    case Op::Ge: return ">=";
    case Op::Le: return "<=";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    default: return nullptr;
  }
}

}  // namespace

std::optional<Assertion> translate_refinement(const Ex& target, const Ex& c) {
  Assertion a;
  auto lhs = term(target, a.addrs);
  if (!lhs) return std::nullopt;
  if (auto s = cmp_of(c)) {
    auto rhs = term(s->rhs, a.addrs);
    if (!rhs) return std::nullopt;
    a.smt = std::string("(") + smt_rel(s->cmp) + " " + *lhs + " " + *rhs + ")";
    if (s->neq) a.smt = "(not " + a.smt + ")";
    return a;
  }
  if (auto s = arith_of(c)) {
    auto x = term(s->a, a.addrs);
    auto y = term(s->b, a.addrs);
    if (!x || !y) return std::nullopt;
    a.smt = "(= " + *lhs + " (" + smt_rel(s->arith) + " " + *x + " " + *y + "))";
    return a;
  }
  return std::nullopt;
}

SolverConfig SolverConfig::from_env() {
  SolverConfig c;
  if (const char* s = std::getenv("SCV_SOLVER")) c.command = s;
  return c;
}

SolverSession::SolverSession(SolverConfig cfg) : cfg_(std::move(cfg)) {}
SolverSession::~SolverSession() { stop(); }

bool SolverSession::start() {
  if (pid_ > 0) return true;
  if (failed_) return false;
  signal(SIGPIPE, SIG_IGN);
  int to_child[2], from_child[2];
  if (pipe(to_child) != 0) return false;
  if (pipe(from_child) != 0) {
    close(to_child[0]);
    close(to_child[1]);
    return false;
  }
  pid_t pid = fork();
  if (pid < 0) {
    failed_ = true;
    warning_ = "solver: fork failed";
    return false;
  }
  if (pid == 0) {
    dup2(to_child[0], 0);
    dup2(from_child[1], 1);
    int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) dup2(devnull, 2);
    close(to_child[1]);
    close(from_child[0]);
    execl("/bin/sh", "sh", "-c", cfg_.command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(to_child[0]);
  close(from_child[1]);
  pid_ = pid;
  in_fd_ = to_child[1];
  out_fd_ = from_child[0];
  buf_.clear();
  // A probe query tells us whether the command speaks SMT-LIB at all.
  if (!send("(set-option :print-success false)\n(set-option :timeout " + std::to_string(cfg_.timeout_ms) +
            ")\n(echo \"ready\")\n")) {
    stop();
    failed_ = true;
    warning_ = "solver: cannot write to '" + cfg_.command + "'";
    return false;
  }
  auto line = read_line(cfg_.timeout_ms + 3000);
  if (!line || line->find("ready") == std::string::npos) {
    stop();
    failed_ = true;
    warning_ = "solver: '" + cfg_.command + "' did not respond; continuing without it";
    return false;
  }
  return true;
}

void SolverSession::stop() {
  if (in_fd_ >= 0) close(in_fd_);
  if (out_fd_ >= 0) close(out_fd_);
  in_fd_ = out_fd_ = -1;
  if (pid_ > 0) {
    kill(pid_, SIGKILL);
    waitpid(pid_, nullptr, 0);
  }
  pid_ = -1;
}

bool SolverSession::send(const std::string& s) {
  size_t off = 0;
  while (off < s.size()) {
    ssize_t n = write(in_fd_, s.data() + off, s.size() - off);
    if (n <= 0) return false;
    off += static_cast<size_t>(n);
  }
  return true;
}

std::optional<std::string> SolverSession::read_line(int timeout_ms) {
  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  for (;;) {
    auto nl = buf_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buf_.substr(0, nl);
      buf_.erase(0, nl + 1);
      if (line.empty()) continue;
      return line;
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd p{out_fd_, POLLIN, 0};
    int r = poll(&p, 1, static_cast<int>(left.count()));
    if (r <= 0) return std::nullopt;
    char tmp[4096];
    ssize_t n = read(out_fd_, tmp, sizeof tmp);
    if (n <= 0) return std::nullopt;
    buf_.append(tmp, static_cast<size_t>(n));
  }
}

SolverVerdict SolverSession::query(const std::vector<int64_t>& consts, const std::vector<std::string>& asserts) {
  if (!start()) return SolverVerdict::Unknown;
  std::string q = "(push 1)\n";
  for (auto c : consts) q += "(declare-const " + smt_const(c) + " Int)\n";
  for (auto& a : asserts) q += "(assert " + a + ")\n";
  q += "(check-sat)\n(pop 1)\n";
  if (!send(q)) {
    stop();
    failed_ = true;
    warning_ = "solver: connection lost; continuing without it";
    return SolverVerdict::Unknown;
  }
  auto line = read_line(cfg_.timeout_ms + 2000);
  if (!line) {
    // Timed out beyond the solver's own limit: restart on the next query.
    stop();
    return SolverVerdict::Unknown;
  }
  if (*line == "unsat") return SolverVerdict::Unsat;
  if (*line == "sat") return SolverVerdict::Sat;
  return SolverVerdict::Unknown;
}

Prover::Prover(SolverConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.enabled()) session_ = std::make_unique<SolverSession>(cfg_);
}

const std::string& Prover::warning() const {
  static const std::string none;
  return session_ ? session_->warning() : none;
}

std::vector<Assertion> Prover::premises(const Heap& h, const std::vector<int64_t>& seed) const {
  std::vector<Assertion> out;
  std::set<int64_t> seen;
  std::deque<int64_t> work;
  for (auto a : seed)
    if (seen.insert(a).second) work.push_back(a);
  static const Ex int_p = mk_pred(Op::IntP);
  while (!work.empty()) {
    int64_t a = work.front();
    work.pop_front();
    if (!h.has(a)) continue;
    const Ex& u = h.at(a);
    std::vector<Assertion> here;
    if (is_int(u)) {
      here.push_back({"(= " + smt_const(a) + " " + (u->n < 0 ? "(- " + std::to_string(-u->n) + ")" : std::to_string(u->n)) + ")", {a}});
    } else if (check(h, mk_addr(a), int_p) == Res::Proved) {
      for (auto& r : u->refs)
        if (auto t = translate_refinement(mk_addr(a), r)) here.push_back(std::move(*t));
    }
    for (auto& t : here) {
      for (auto b : t.addrs)
        if (seen.insert(b).second) work.push_back(b);
      out.push_back(std::move(t));
    }
  }
  return out;
}

SolverVerdict Prover::ask(const std::vector<Assertion>& phi, const std::string& goal,
                          const std::vector<int64_t>& goal_addrs) {
  std::set<int64_t> consts(goal_addrs.begin(), goal_addrs.end());
  std::vector<std::string> asserts;
  for (auto& a : phi) {
    consts.insert(a.addrs.begin(), a.addrs.end());
    asserts.push_back(a.smt);
  }
  asserts.push_back(goal);
  std::string key;
  for (auto c : consts) key += smt_const(c) + ",";
  for (auto& a : asserts) key += a + ";";
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  ++queries_;
  auto v = session_->query(std::vector<int64_t>(consts.begin(), consts.end()), asserts);
  cache_.emplace(std::move(key), v);
  return v;
}

Res Prover::prove(const Heap& h, const Ex& v, const Ex& c) {
  Res r = check(h, v, c);
  if (r != Res::Ambig || !session_ || session_->failed()) return r;
  if (auto j = junction_of(c)) return combine(*j, [&](const Ex& part) { return prove(h, v, part); });
  static const Ex int_p = mk_pred(Op::IntP);
  Ex target = v;
  if (v->k == K::Addr && h.has(v->n) && is_int(h.at(v->n))) target = h.at(v->n);
  if (target->k == K::Addr && check(h, target, int_p) != Res::Proved) return Res::Ambig;
  auto goal = translate_refinement(target, c);
  if (!goal) return Res::Ambig;
  auto phi = premises(h, goal->addrs);
  if (ask(phi, "(not " + goal->smt + ")", goal->addrs) == SolverVerdict::Unsat) return Res::Proved;
  if (ask(phi, goal->smt, goal->addrs) == SolverVerdict::Unsat) return Res::Refuted;
  return Res::Ambig;
}

}  // namespace scv
