#include "scv/approx.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "scv/proof.hpp"
#include "scv/parser.hpp"
#include "scv/smt.hpp"

namespace scv {

// ---------------------------------------------------------------------------
// Concrete reference interpreter

namespace {

bool cvalue(const Ex& e) {
  if (e->k != K::Val) return false;
  if (e->p == P::Opaque || e->p == P::Rec || e->p == P::RecRef)
    throw std::invalid_argument("concrete interpreter: program contains an unknown value");
  return true;
}

int64_t wrap(uint64_t x) { return static_cast<int64_t>(x); }

struct Concrete {
  const Program& p;

  Ex blame(Sym pos, Sym src) { return mk_blame(pos, src); }

  Ex prim(const Ex& e) {
    const auto& a = e->kids;
    Sym l = e->l1;
    auto num = [&](size_t i) -> const int64_t* { return a[i]->p == P::Int ? &a[i]->n : nullptr; };
    switch (e->op) {
      case Op::Add1:
        if (!num(0)) return blame(l, lang_label());
        return mk_int(wrap(static_cast<uint64_t>(*num(0)) + 1));
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Eq:
      case Op::Gt:
      case Op::Lt:
      case Op::Ge:
      case Op::Le: {
        if (!num(0) || !num(1)) return blame(l, lang_label());
        uint64_t x = static_cast<uint64_t>(*num(0)), y = static_cast<uint64_t>(*num(1));
        int64_t i = *num(0), j = *num(1);
        switch (e->op) {
          case Op::Add: return mk_int(wrap(x + y));
          case Op::Sub: return mk_int(wrap(x - y));
          case Op::Mul: return mk_int(wrap(x * y));
          case Op::Eq: return mk_bool(i == j);
          case Op::Gt: return mk_bool(i > j);
          case Op::Lt: return mk_bool(i < j);
          case Op::Ge: return mk_bool(i >= j);
          default: return mk_bool(i <= j);
        }
      }
      case Op::Cons: return mk_cons(a[0], a[1]);
      case Op::Car:
      case Op::Cdr:
        if (a[0]->p != P::Cons) return blame(l, lang_label());
        return a[0]->kids[e->op == Op::Car ? 0 : 1];
      case Op::IntP: return mk_bool(a[0]->p == P::Int);
      case Op::FalseP: return mk_bool(a[0]->p == P::False);
      case Op::ConsP: return mk_bool(a[0]->p == P::Cons);
      case Op::EmptyP: return mk_bool(a[0]->p == P::Empty);
      case Op::ProcP: return mk_bool(a[0]->p == P::Lam);
      case Op::DepP: return mk_bool(a[0]->p == P::Dep);
      case Op::EvenP: return mk_bool(a[0]->p == P::Int && a[0]->n % 2 == 0);
      case Op::OddP: return mk_bool(a[0]->p == P::Int && a[0]->n % 2 != 0);
    }
    throw std::logic_error("unknown primitive");
  }

  Ex module_ref(const Ex& v) {
    const Module* m = p.find(v->x);
    if (!m) throw std::logic_error("unbound variable " + name(v->x));
    if (m->opaque()) throw std::invalid_argument("concrete interpreter: opaque module " + name(m->name));
    if (v->l1 == m->name) return m->body;
    return mk_mon(m->contract, m->name, v->l1, m->name, m->body);
  }

  Ex monitor(const Ex& e) {
    const Ex& c = e->kids[0];
    const Ex& v = e->kids[1];
    Sym pos = e->l1, neg = e->l2, src = e->l3;
    if (c->p == P::Dep) {
      if (v->p != P::Lam) return blame(pos, src);
      Sym x = c->x;
      Ex inner = mk_app(v, mk_mon(c->kids[0], neg, pos, src, mk_var(x, pos)), pos);
      return mk_lam(x, mk_mon(c->kids[1], pos, neg, src, inner));
    }
    return mk_if(mk_app(c, v, src), v, blame(pos, src));
  }

  // One step of e. Blame anywhere aborts the whole program.
  Ex step(const Ex& e) {
    auto sub = [&](size_t i) -> Ex {
      Ex k = step(e->kids[i]);
      if (k->k == K::Blame) return k;
      auto kids = e->kids;
      kids[i] = std::move(k);
      return with_kids(e, std::move(kids));
    };
    switch (e->k) {
      case K::Var: return module_ref(e);
      case K::App:
        if (!cvalue(e->kids[0])) return sub(0);
        if (!cvalue(e->kids[1])) return sub(1);
        if (e->kids[0]->p != P::Lam) return blame(e->l1, lang_label());
        return subst(e->kids[1], e->kids[0]->x, e->kids[0]->kids[0]);
      case K::Prim:
        for (size_t i = 0; i < e->kids.size(); ++i)
          if (!cvalue(e->kids[i])) return sub(i);
        return prim(e);
      case K::If:
        if (!cvalue(e->kids[0])) return sub(0);
        return e->kids[0]->p == P::False ? e->kids[2] : e->kids[1];
      case K::DepCon:
        if (!cvalue(e->kids[0])) return sub(0);
        return mk_depval(e->kids[0], e->x, e->kids[1]);
      case K::Mon:
        if (!cvalue(e->kids[0])) return sub(0);
        if (!cvalue(e->kids[1])) return sub(1);
        return monitor(e);
      case K::Assume:
        if (!cvalue(e->kids[0])) return sub(0);
        return e->kids[0];
      case K::Blame: return e;
      default: throw std::invalid_argument("concrete interpreter: unsupported form " + show(e));
    }
  }
};

}  // namespace

ReachResult concrete_interpret(const Program& p, int64_t fuel) {
  Concrete c{p};
  ReachResult rr;
  Ex e = p.top;
  while (e->k != K::Blame && !cvalue(e)) {
    if (rr.expanded >= fuel) {
      rr.exhausted = true;
      return rr;
    }
    e = c.step(e);
    ++rr.expanded;
  }
  rr.finals.push_back({e, empty_heap()});
  if (e->k == K::Blame) rr.blames.insert({e->l1, e->l2});
  return rr;
}

// ---------------------------------------------------------------------------
// Approximation relation

namespace {

Ex strip(const Heap& h, const Ex& v) {
  const Ex& u = deref(h, v);
  if (u->k != K::Val) return u;
  std::vector<Ex> kids;
  for (auto& k : u->kids) kids.push_back(k->k == K::Addr || k->k == K::Val ? strip(h, k) : k);
  return rebuild(u, std::move(kids), {});
}

bool truthy_run(const Program& p, const Ex& c, const Ex& v, bool& unknown) {
  if (c->k == K::Val && c->p == P::Neg) {
    bool u = false;
    bool r = truthy_run(p, mk_pred(c->op), v, u);
    unknown |= u;
    return !u && !r;
  }
  Program q;
  q.modules = p.modules;
  q.top = mk_app(c, v, top_label());
  try {
    ReachResult rr = concrete_interpret(q, 5000);
    if (rr.exhausted) {
      unknown = true;
      return false;
    }
    const Ex& r = rr.finals[0].e;
    return r->k != K::Blame && !is_false(r);
  } catch (const std::exception&) {
    unknown = true;
    return false;
  }
}

Ex compute(Op o, const Ex& a, const Ex& b) {
  Program q;
  q.top = mk_prim(o, {a, b}, top_label());
  ReachResult rr = concrete_interpret(q, 10);
  return rr.finals.empty() ? mk_false() : rr.finals[0].e;
}

struct Approximator {
  const Heap& h1;
  const Heap& h2;
  const Program& p;
  int cap;
  WitnessMap f;
  std::vector<std::pair<Ex, Ex>> obligations;  // (concrete value, abstract contract)
  bool cap_hit = false;

  bool too_deep(int d) {
    if (d <= cap) return false;
    cap_hit = true;
    return true;
  }

  bool ignorable_blame(const Ex& e) const {
    if (e->k != K::Blame) return false;
    Sym pos = e->l1;
    if (pos == top_label() || pos == havoc_label()) return true;
    const Module* m = p.find(pos);
    return m && m->opaque();
  }

  bool expr(const Ex& e1, const Ex& e2, int d) {
    if (too_deep(d)) return false;
    if (ignorable_blame(e1) || ignorable_blame(e2)) return true;
    if (e2->k == K::Rt) return expr(e1, e2->kids[2], d + 1);
    if (e2->k == K::Blur) return expr(e1, e2->kids[1], d + 1);
    bool v1 = e1->k == K::Addr || e1->k == K::Val, v2 = e2->k == K::Addr || e2->k == K::Val;
    if (v1 && v2) return value(e1, e2, d + 1);
    if (v1 || v2) return false;
    if (e1->k == K::Blame && e2->k == K::Blame) return e1->l1 == e2->l1;
    if (e1->k != e2->k || e1->op != e2->op || e1->x != e2->x || e1->l1 != e2->l1 || e1->l2 != e2->l2 ||
        e1->l3 != e2->l3 || e1->kids.size() != e2->kids.size())
      return false;
    for (size_t i = 0; i < e1->kids.size(); ++i)
      if (!expr(e1->kids[i], e2->kids[i], d + 1)) return false;
    return true;
  }

  bool value(const Ex& v1, const Ex& v2, int d) {
    if (too_deep(d)) return false;
    if (v2->k == K::Addr) {
      auto it = f.find(v2->n);
      if (v1->k == K::Addr) {
        if (it != f.end()) return it->second->k == K::Addr && it->second->n == v1->n;
        f[v2->n] = v1;
      } else {
        Ex sv = strip(h1, v1);
        if (it != f.end()) return it->second->k != K::Addr && equal(it->second, sv);
        f[v2->n] = sv;
      }
      if (!h2.has(v2->n)) return true;
      return pre(deref(h1, v1), h2.at(v2->n), v2, d + 1);
    }
    return pre(deref(h1, v1), v2, v2, d + 1);
  }

  bool pre(const Ex& u1, const Ex& u2, const Ex& self2, int d) {
    if (too_deep(d)) return false;
    if (u1->k != K::Val) return false;
    if (u2->p == P::Rec) {
      for (auto& m : u2->kids) {
        WitnessMap saved_f = f;
        size_t saved_ob = obligations.size();
        if (value(u1, subst_recref(self2, u2->x, m), d + 1)) return refs(u1, u2);
        f = std::move(saved_f);
        obligations.resize(saved_ob);
      }
      return false;
    }
    bool ok = true;
    switch (u2->p) {
      case P::Opaque: break;
      case P::Int:
      case P::True:
      case P::False:
      case P::Empty: ok = u1->p == u2->p && u1->n == u2->n; break;
      case P::Cons:
        ok = u1->p == P::Cons && value(u1->kids[0], u2->kids[0], d + 1) && value(u1->kids[1], u2->kids[1], d + 1);
        break;
      case P::Lam: ok = u1->p == P::Lam && u1->x == u2->x && expr(u1->kids[0], u2->kids[0], d + 1); break;
      case P::Dep:
        ok = u1->p == P::Dep && u1->x == u2->x && value(u1->kids[0], u2->kids[0], d + 1) &&
             expr(u1->kids[1], u2->kids[1], d + 1);
        break;
      case P::Neg: ok = u1->p == P::Neg && u1->op == u2->op; break;
      default: ok = false;
    }
    return ok && refs(u1, u2);
  }

  bool refs(const Ex& u1, const Ex& u2) {
    for (auto& c : u2->refs) {
      bool held = false;
      for (auto& r : u1->refs) held |= equal(r, c);
      if (!held) obligations.emplace_back(strip(h1, u1), c);
    }
    return true;
  }

  // Free addresses of an abstract contract that F does not bind.
  void unbound(const Ex& e, std::vector<int64_t>& out) const {
    map_addrs(e, [&](int64_t l) -> Ex {
      if (!f.count(l) && std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
      return mk_addr(l);
    });
  }

  // c with every address replaced through g, or null if some address is unbound.
  Ex instantiate(const Ex& c, const WitnessMap& g) const {
    bool missing = false;
    Ex r = map_addrs(c, [&](int64_t l) -> Ex {
      auto it = g.find(l);
      if (it == g.end()) missing = true;
      return it == g.end() ? nullptr : it->second;
    });
    return missing ? nullptr : r;
  }

  // Check every deferred obligation, choosing values for unbound addresses.
  Approx discharge() {
    std::vector<int64_t> free;
    for (auto& [v, c] : obligations) unbound(c, free);
    std::vector<std::pair<Ex, Ex>> goals = obligations;
    // Unbound addresses bring their own refinements as goals.
    for (size_t i = 0; i < free.size(); ++i) {
      if (!h2.has(free[i])) continue;
      const Ex& u = h2.at(free[i]);
      if (u->p == P::Int) {
        f[free[i]] = strip(h2, u);
        continue;
      }
      if (u->p != P::Opaque) return Approx::Unknown;
      for (auto& c : u->refs) {
        goals.emplace_back(mk_addr(free[i]), c);
        unbound(c, free);
      }
    }
    free.erase(std::remove_if(free.begin(), free.end(), [&](int64_t l) { return f.count(l) > 0; }), free.end());
    // An arithmetic refinement fixes its address once the operands are known.
    std::vector<std::pair<int64_t, ArithShape>> defined;
    for (int64_t l : free)
      for (auto& c : h2.at(l)->refs)
        if (auto a = arith_of(c)) {
          defined.emplace_back(l, *a);
          break;
        }
    free.erase(std::remove_if(free.begin(), free.end(),
                              [&](int64_t l) {
                                return std::any_of(defined.begin(), defined.end(),
                                                   [&](auto& d) { return d.first == l; });
                              }),
               free.end());
    if (free.size() > 6) return Approx::Unknown;

    // Smaller pools for more unknowns keep the search near 20k leaves.
    static const int64_t radius[] = {12, 12, 12, 12, 5, 3, 2};
    std::vector<Ex> pool;
    for (int64_t k = 0; k <= radius[free.size()]; ++k) {
      pool.push_back(mk_int(k));
      if (k) pool.push_back(mk_int(-k));
    }
    pool.push_back(mk_false());
    pool.push_back(mk_true());
    pool.push_back(mk_empty());

    WitnessMap g = f;
    bool unknown = false;
    std::vector<char> checked(goals.size(), 0);
    // Fill in defined addresses and check the goals that became ground; undo on failure.
    auto settle = [&](std::vector<int64_t>& set_here, std::vector<size_t>& done) {
      bool progress = true;
      while (progress) {
        progress = false;
        // v = a op b with one operand unknown: solve for it.
        for (size_t j = 0; j < goals.size(); ++j) {
          auto sh = arith_of(goals[j].second);
          if (checked[j] || !sh) continue;
          const Ex& v = goals[j].first;
          Ex vv = v->k == K::Addr ? (g.count(v->n) ? g.at(v->n) : nullptr) : v;
          if (!vv || !is_int(vv)) continue;
          for (int side = 0; side < 2; ++side) {
            const Ex& x = side ? sh->b : sh->a;
            Ex y = instantiate(side ? sh->a : sh->b, g);
            if (x->k != K::Addr || g.count(x->n) || !y || !is_int(y)) continue;
            uint64_t n = static_cast<uint64_t>(vv->n), m = static_cast<uint64_t>(y->n);
            std::optional<int64_t> sol;
            if (sh->arith == Op::Add) sol = static_cast<int64_t>(n - m);
            if (sh->arith == Op::Sub) sol = static_cast<int64_t>(side ? m - n : n + m);
            if (sh->arith == Op::Mul && y->n != 0 && vv->n % y->n == 0) sol = vv->n / y->n;
            if (!sol) continue;
            g[x->n] = mk_int(*sol);
            set_here.push_back(x->n);
            progress = true;
            break;
          }
        }
        for (auto& [l, a] : defined) {
          if (g.count(l)) continue;
          Ex x = instantiate(a.a, g), y = instantiate(a.b, g);
          if (!x || !y) continue;
          g[l] = compute(a.arith, x, y);
          set_here.push_back(l);
          progress = true;
        }
      }
      for (size_t j = 0; j < goals.size(); ++j) {
        if (checked[j]) continue;
        auto& [v, c] = goals[j];
        Ex cv = instantiate(c, g);
        if (!cv || (v->k == K::Addr && !g.count(v->n))) continue;
        checked[j] = 1;
        done.push_back(j);
        if (!truthy_run(p, cv, v->k == K::Addr ? g.at(v->n) : v, unknown)) return false;
      }
      return true;
    };
    auto undo = [&](const std::vector<int64_t>& set_here, const std::vector<size_t>& done) {
      for (int64_t l : set_here) g.erase(l);
      for (size_t j : done) checked[j] = 0;
    };
    std::function<bool(size_t)> search = [&](size_t i) -> bool {
      std::vector<int64_t> set_here;
      std::vector<size_t> done;
      if (!settle(set_here, done)) {
        undo(set_here, done);
        return false;
      }
      if (i == free.size()) {
        bool ok = std::all_of(checked.begin(), checked.end(), [](char c) { return c != 0; });
        if (!ok) undo(set_here, done);
        return ok;
      }
      if (g.count(free[i])) {
        if (search(i + 1)) return true;
        undo(set_here, done);
        return false;
      }
      for (auto& cand : pool) {
        g[free[i]] = cand;
        if (search(i + 1)) return true;
      }
      g.erase(free[i]);
      undo(set_here, done);
      return false;
    };
    if (search(0)) {
      f = g;
      return Approx::Yes;
    }
    // The pool is finite, so a failed search over unknowns proves nothing.
    return unknown || !free.empty() ? Approx::Unknown : Approx::No;
  }
};

}  // namespace

ApproxResult approx_search(const State& s1, const State& s2, const Program& p, int depth_cap) {
  Approximator a{*s1.h, *s2.h, p, depth_cap, {}, {}};
  ApproxResult r;
  if (!a.expr(s1.e, s2.e, 0)) {
    r.kind = a.cap_hit ? Approx::Unknown : Approx::No;
    return r;
  }
  r.kind = a.discharge();
  if (r.kind == Approx::Yes) r.f = std::move(a.f);
  return r;
}

std::optional<WitnessMap> approximates(const State& s1, const State& s2, const Program& p) {
  ApproxResult r = approx_search(s1, s2, p);
  if (r.kind != Approx::Yes) return std::nullopt;
  return std::move(r.f);
}

// ---------------------------------------------------------------------------
// Program generation

namespace {

struct Gen {
  std::mt19937_64& rng;
  const GenOptions& o;
  std::vector<std::string> fns;  // earlier modules holding int -> int functions
  std::vector<std::string> vals;  // earlier modules holding first-order values
  int fresh = 0;

  int pick(int n) { return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng)); }
  bool chance(int pct) { return pick(100) < pct; }
  std::string lit() { return std::to_string(std::uniform_int_distribution<int>(o.lo, o.hi)(rng)); }

  enum Ty { Int, Bool, Any };

  std::string from(const std::vector<std::string>& xs) { return xs[static_cast<size_t>(pick(static_cast<int>(xs.size())))]; }

  std::string leaf(Ty t, const std::vector<std::string>& env) {
    int r = pick(10);
    if (t == Int || t == Any) {
      if (r < 5 && !env.empty()) return from(env);
      if (r < 6 && !vals.empty()) return from(vals);
    }
    if (t == Bool || (t == Any && r == 6)) return chance(50) ? "true" : "false";
    if (t == Any && r == 7) return "empty";
    return lit();
  }

  // Mostly well-typed expressions; roughly one node in eight ignores its expected type.
  std::string expr(int depth, std::vector<std::string> env, Ty t = Int) {
    if (chance(12)) t = Any;
    if (depth <= 1 || chance(15)) return leaf(t, env);
    auto sub = [&](Ty u) { return expr(depth - 1, env, u); };
    if (t == Any) t = static_cast<Ty>(pick(3));
    if (t == Any) {
      switch (pick(3)) {
        case 0: return "(cons " + sub(Int) + " " + sub(Any) + ")";
        case 1: return std::string(chance(50) ? "(car " : "(cdr ") + sub(Any) + ")";
        default: return "(lambda (y) " + sub(Int) + ")";
      }
    }
    switch (pick(10)) {
      case 0:
      case 1:
        return "(if " + sub(Bool) + " " + sub(t) + " " + sub(t) + ")";
      case 2: {
        std::string x = "v" + std::to_string(fresh++);
        std::string bound = sub(Int);
        env.push_back(x);
        return "(let ([" + x + " " + bound + "]) " + expr(depth - 1, env, t) + ")";
      }
      case 3: {
        std::string x = "v" + std::to_string(fresh++);
        std::string arg = sub(Int);
        env.push_back(x);
        return "((lambda (" + x + ") " + expr(depth - 1, env, t) + ") " + arg + ")";
      }
      default: break;
    }
    if (t == Bool) {
      switch (pick(5)) {
        case 0: {
          static const char* ops[] = {"int?", "cons?", "empty?", "false?", "proc?", "even?", "odd?"};
          return std::string("(") + ops[pick(7)] + " " + sub(Any) + ")";
        }
        case 1: return std::string(chance(50) ? "(and " : "(or ") + sub(Bool) + " " + sub(Bool) + ")";
        case 2: return "(not " + sub(Bool) + ")";
        default: {
          static const char* ops[] = {"=", "<", ">", "<=", ">="};
          return std::string("(") + ops[pick(5)] + " " + sub(Int) + " " + sub(Int) + ")";
        }
      }
    }
    switch (pick(5)) {
      case 0: return "(add1 " + sub(Int) + ")";
      case 1:
      case 2: {
        static const char* ops[] = {"+", "-", "*"};
        return std::string("(") + ops[pick(3)] + " " + sub(Int) + " " + sub(Int) + ")";
      }
      case 3: return "(car (cons " + sub(Int) + " " + sub(Any) + "))";
      default:
        if (!fns.empty()) return "(" + from(fns) + " " + sub(Int) + ")";
        return "(add1 " + sub(Int) + ")";
    }
  }

  std::string flat() {
    switch (pick(7)) {
      case 0: return "any";
      case 1: return "int?";
      case 2: return "(lambda (x) (>= x " + lit() + "))";
      case 3: return "(and/c int? (lambda (x) (> x " + lit() + ")))";
      case 4: return "(or/c int? false?)";
      case 5: return chance(50) ? "even?" : "cons?";
      default: return "(lambda (x) (< x " + lit() + "))";
    }
  }

  std::string program() {
    int n = pick(o.max_modules + 1);
    std::ostringstream os;
    for (int i = 0; i < n; ++i) {
      std::string m = "m" + std::to_string(i);
      if (chance(65)) {
        std::string x = "x" + std::to_string(i);
        std::string body;
        if (chance(20)) {
          // A recursive countdown, to exercise summarization.
          body = "(lambda (" + x + ") (if (<= " + x + " 0) " + expr(o.depth - 2, {x}, Int) + " (" +
                 (chance(50) ? "+" : "*") + " " + x + " (" + m + " (- " + x + " 1)))))";
        } else {
          body = "(lambda (" + x + ") " + expr(o.depth - 1, {x}, Int) + ")";
        }
        std::string dom = chance(50) ? "int?" : flat();
        os << "(module " << m << " (-> " << dom << " " << flat() << ")\n  " << body << ")\n";
        fns.push_back(m);
      } else {
        os << "(module " << m << " " << flat() << "\n  " << expr(o.depth, {}, Int) << ")\n";
        vals.push_back(m);
      }
    }
    os << "(top " << expr(o.depth, {}, Int) << ")\n";
    return os.str();
  }
};

void collect_ints(const Ex& e, std::vector<const Node*>& out) {
  if (is_int(e)) out.push_back(e.get());
  for (auto& k : e->kids) collect_ints(k, out);
}

Ex replace_ints(const Ex& e, const std::set<const Node*>& hit) {
  if (is_int(e)) return hit.count(e.get()) ? mk_opaque() : e;
  if (e->kids.empty()) return e;
  std::vector<Ex> kids;
  bool changed = false;
  for (auto& k : e->kids) {
    kids.push_back(replace_ints(k, hit));
    changed |= kids.back() != k;
  }
  return changed ? with_kids(e, std::move(kids)) : e;
}

bool well_formed(const Program& p) {
  auto closed = [&](const Ex& e) {
    for (Sym s : e->fv)
      if (!p.find(s)) return false;
    return true;
  };
  if (!closed(p.top)) return false;
  for (auto& m : p.modules)
    if (!closed(m.contract) || (m.body && !closed(m.body))) return false;
  return true;
}

}  // namespace

Program generate_program(std::mt19937_64& rng, const GenOptions& o) {
  Gen g{rng, o, {}, {}, 0};
  return parse_program(g.program());
}

Program abstract_program(const Program& p, std::mt19937_64& rng) {
  Program q = p;
  auto coin = [&](int pct) { return std::uniform_int_distribution<int>(0, 99)(rng) < pct; };
  bool any = false;
  for (auto& m : q.modules)
    if (m.body && coin(30)) {
      m.body = nullptr;
      any = true;
    }
  std::vector<const Node*> ints;
  collect_ints(q.top, ints);
  for (auto& m : q.modules)
    if (m.body) collect_ints(m.body, ints);
  std::set<const Node*> hit;
  for (auto* n : ints)
    if (coin(30)) hit.insert(n);
  if (!any && hit.empty() && !ints.empty()) hit.insert(ints[std::uniform_int_distribution<size_t>(0, ints.size() - 1)(rng)]);
  q.top = replace_ints(q.top, hit);
  for (auto& m : q.modules)
    if (m.body) m.body = replace_ints(m.body, hit);
  return q;
}

namespace {

// Every expression obtained by replacing one node of e with one of its children or 0.
void variants(const Ex& e, std::vector<Ex>& out) {
  if (e->k == K::Val && e->p != P::Lam) return;
  for (auto& k : e->kids)
    if (k->k != K::Val || k->p != P::Lam || e->k != K::Val) out.push_back(k);
  if (!is_int(e)) out.push_back(mk_int(0));
  for (size_t i = 0; i < e->kids.size(); ++i) {
    std::vector<Ex> sub;
    variants(e->kids[i], sub);
    for (auto& s : sub) {
      auto kids = e->kids;
      kids[i] = s;
      out.push_back(with_kids(e, std::move(kids)));
    }
  }
}

size_t program_size(const Program& p) { return show(p).size(); }

}  // namespace

Program shrink(const Program& p0, const std::function<bool(const Program&)>& still_fails) {
  Program p = p0;
  bool progress = true;
  int rounds = 0;
  while (progress && rounds++ < 200) {
    progress = false;
    for (size_t i = 0; i < p.modules.size() && !progress; ++i) {
      Program q = p;
      q.modules.erase(q.modules.begin() + static_cast<std::ptrdiff_t>(i));
      if (well_formed(q) && still_fails(q)) {
        p = std::move(q);
        progress = true;
      }
    }
    if (progress) continue;
    auto try_expr = [&](Ex& slot) {
      std::vector<Ex> vs;
      variants(slot, vs);
      std::sort(vs.begin(), vs.end(), [](const Ex& a, const Ex& b) { return show(a).size() < show(b).size(); });
      for (auto& v : vs) {
        Ex saved = slot;
        slot = v;
        if (well_formed(p) && program_size(p) < program_size(p0) + 1 && still_fails(p)) return true;
        slot = saved;
      }
      return false;
    };
    if (try_expr(p.top)) {
      progress = true;
      continue;
    }
    for (auto& m : p.modules)
      if (m.body && try_expr(m.body)) {
        progress = true;
        break;
      }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Differential soundness

namespace {

EvalOptions abstract_options() {
  EvalOptions eo;
  eo.budget = 20000;
  eo.solver = SolverConfig{"none"};
  return eo;
}

}  // namespace

PairCheck check_pair(const Program& q, const Program& p) {
  PairCheck c;
  ReachResult cr;
  try {
    cr = concrete_interpret(q, 20000);
  } catch (const std::exception& e) {
    c.kind = "error";
    c.detail = e.what();
    return c;
  }
  if (cr.exhausted) {
    c.skipped = true;
    return c;
  }
  Verification v = verify(p, abstract_options());
  if (v.rr.exhausted) {
    c.skipped = true;
    return c;
  }
  const State& s1 = cr.finals[0];
  bool unknown = false, found = false;
  for (auto& s2 : v.rr.finals) {
    ApproxResult r = approx_search(s1, s2, p);
    if (r.kind == Approx::Yes) {
      found = true;
      break;
    }
    unknown |= r.kind == Approx::Unknown;
  }
  if (!found) {
    c.kind = unknown ? "approx-unknown" : "terminal";
    c.detail = "concrete terminal " + show(s1.e) + " not approximated by any of " +
               std::to_string(v.rr.finals.size()) + " abstract terminals";
    return c;
  }
  c.concrete_blame = s1.blamed();
  for (auto& d : v.verdicts) {
    if (d.kind != Verdict::Verified) continue;
    ++c.verified;
    for (auto& b : cr.blames)
      if (b.first == d.module) {
        c.kind = "verified-blamed";
        c.detail = name(d.module) + " verified but concretely blamed via " + name(b.second);
        return c;
      }
  }
  return c;
}

SoundnessReport differential_soundness(uint64_t seed, size_t count, int jobs) {
  SoundnessReport rep;
  std::mutex mu;
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      size_t i = next++;
      if (i >= count) return;
      uint64_t ps = seed * 1000003u + i;
      std::mt19937_64 rng(ps);
      Program q;
      try {
        q = generate_program(rng);
      } catch (const std::exception&) {
        continue;
      }
      size_t abstractions = 0, skipped = 0, terminals = 0, blames = 0, verified = 0;
      std::vector<Violation> found;
      for (int k = 0; k < 2; ++k) {
        uint64_t as = ps * 31 + static_cast<uint64_t>(k);
        std::mt19937_64 arng(as);
        Program p = abstract_program(q, arng);
        ++abstractions;
        PairCheck c = check_pair(q, p);
        if (c.skipped) {
          ++skipped;
          continue;
        }
        ++terminals;
        blames += c.concrete_blame;
        verified += c.verified;
        if (c.kind.empty()) continue;
        std::string kind = c.kind;
        auto still = [&](const Program& cand) {
          std::mt19937_64 r2(as);
          Program a = abstract_program(cand, r2);
          PairCheck c2 = check_pair(cand, a);
          return !c2.skipped && c2.kind == kind;
        };
        Program small = shrink(q, still);
        std::mt19937_64 r3(as);
        Program small_abs = abstract_program(small, r3);
        PairCheck fin = check_pair(small, small_abs);
        found.push_back({ps, kind, show(small), show(small_abs), fin.detail.empty() ? c.detail : fin.detail});
      }
      std::lock_guard<std::mutex> lk(mu);
      ++rep.programs;
      rep.abstractions += abstractions;
      rep.skipped += skipped;
      rep.concrete_terminals += terminals;
      rep.concrete_blames += blames;
      rep.verified_modules += verified;
      for (auto& v : found) rep.violations.push_back(std::move(v));
    }
  };
  int n = std::max(1, jobs);
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> ts;
    for (int t = 0; t < n; ++t) ts.emplace_back(worker);
    for (auto& t : ts) t.join();
  }
  std::sort(rep.violations.begin(), rep.violations.end(),
            [](const Violation& a, const Violation& b) { return a.program_seed < b.program_seed; });
  return rep;
}

}  // namespace scv
