#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "scv/proof.hpp"

namespace scv {

enum class SolverVerdict : uint8_t { Unsat, Sat, Unknown };

// One integer constraint in SMT-LIB syntax over constants named after addresses.
struct Assertion {
  std::string smt;
  std::vector<int64_t> addrs;
};

// Translate "target satisfies c" where target is an address or an integer.
std::optional<Assertion> translate_refinement(const Ex& target, const Ex& c);

std::string smt_const(int64_t addr);

struct SolverConfig {
  std::string command = "z3 -in";  // empty or "none" disables solving
  int timeout_ms = 2000;

  bool enabled() const { return !command.empty() && command != "none"; }
  // Default command overridden by SCV_SOLVER when set.
  static SolverConfig from_env();
};

// A solver process spoken to over stdin/stdout, one push/pop scope per query.
class SolverSession {
 public:
  explicit SolverSession(SolverConfig cfg);
  ~SolverSession();
  SolverSession(const SolverSession&) = delete;
  SolverSession& operator=(const SolverSession&) = delete;

  SolverVerdict query(const std::vector<int64_t>& consts, const std::vector<std::string>& asserts);
  bool failed() const { return failed_; }
  const std::string& warning() const { return warning_; }

 private:
  bool start();
  void stop();
  bool send(const std::string& s);
  std::optional<std::string> read_line(int timeout_ms);

  SolverConfig cfg_;
  int pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  bool failed_ = false;
  std::string warning_;
  std::string buf_;
};

// check_with_solver: the basic relation refined by an optional solver session.
class Prover {
 public:
  explicit Prover(SolverConfig cfg = SolverConfig{"none"});
  Res prove(const Heap& h, const Ex& v, const Ex& c);
  bool solver_enabled() const { return cfg_.enabled(); }
  const std::string& warning() const;
  size_t queries() const { return queries_; }

  // Exposed for tests: the premises gathered for a goal.
  std::vector<Assertion> premises(const Heap& h, const std::vector<int64_t>& seed) const;

 private:
  SolverVerdict ask(const std::vector<Assertion>& phi, const std::string& goal, const std::vector<int64_t>& goal_addrs);

  SolverConfig cfg_;
  std::unique_ptr<SolverSession> session_;
  std::unordered_map<std::string, SolverVerdict> cache_;
  size_t queries_ = 0;
};

}  // namespace scv
