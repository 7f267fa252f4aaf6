#include <chrono>
#include <iostream>
#include <sstream>

#include "oracles.hpp"
#include "scv/summarizer.hpp"

using namespace scv;
using namespace scv::test;

namespace {

using Clock = std::chrono::steady_clock;

struct Result {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, double limit_s, const std::function<Result()>& body) {
  auto t0 = Clock::now();
  Result o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double s = std::chrono::duration<double>(Clock::now() - t0).count();
  if (limit_s > 0 && s >= limit_s) {
    o.pass = false;
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("over the time limit");
  }
  failures += !o.pass;
  std::ostringstream line;
  line.setf(std::ios::fixed);
  line.precision(2);
  line << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << title << " (" << s << " s)";
  if (!o.detail.empty()) line << ": " << o.detail;
  std::cout << line.str() << std::endl;
}

std::string kind(const Verification& v, const std::string& module) {
  auto* d = verdict_for(v, module);
  return d ? verdict_name(d->kind) : "missing";
}

EvalOptions with_solver(int64_t budget) {
  EvalOptions eo;
  eo.budget = budget;
  eo.solver = SolverConfig::from_env();
  return eo;
}

std::string suite_detail(const SuiteResult& r) {
  std::string s = std::to_string(r.cases) + " cases";
  if (r.decided) s += ", " + std::to_string(r.decided) + " decided";
  if (!r.ok()) s += ", first failure: " + r.failures.front();
  return s;
}

}  // namespace

int main() {
  report(1, "even-to-odd wrapper verifies without a solver", 5, [] {
    Verification v = verify(load("e2o.scv"), no_solver(20000));
    bool ok = kind(v, "e2o") == std::string("VERIFIED") && !has_blame_pos(v.rr, "e2o") && !v.rr.exhausted;
    return Result{ok, "e2o " + kind(v, "e2o")};
  });

  report(2, "occurrence typing verifies without a solver", 10, [] {
    Verification v = verify(load("occurrence.scv"), no_solver(20000));
    bool lang_blame = v.rr.blames.count({intern("f"), lang_label()}) > 0;
    bool ok = kind(v, "f") == std::string("VERIFIED") && !lang_blame;
    return Result{ok, "f " + kind(v, "f") + (lang_blame ? ", primitive blame of f" : "")};
  });

  report(3, "comparison combinator needs the solver", 15, [] {
    if (!solver_available(SolverConfig::from_env())) return Result{false, "solver unavailable"};
    Verification on = verify(load("gt.scv"), with_solver(20000));
    Verification off = verify(load("gt.scv"), no_solver(20000));
    std::string a = kind(on, "main"), b = kind(off, "main");
    bool ok = a == "VERIFIED" && b != "VERIFIED";
    return Result{ok, "main " + a + " with solver, " + b + " without"};
  });

  report(4, "list reversal verifies only with summarization", 30, [] {
    Verification on = verify(load("reverse.scv"), with_solver(50000));
    EvalOptions eo = with_solver(50000);
    eo.summarize = false;
    Verification off = verify(load("reverse.scv"), eo);
    std::string a = kind(on, "main"), b = kind(off, "main");
    bool ok = !on.rr.exhausted && a == "VERIFIED" && off.rr.exhausted && b == "UNKNOWN";
    return Result{ok, "main " + a + " summarized, " + b + (off.rr.exhausted ? " (exhausted)" : "") + " unsummarized"};
  });

  report(5, "factorial of an unknown is summarized", 0, [] {
    ReachResult r = eval(load("fact.scv"), with_solver(50000));
    if (r.exhausted) return Result{false, "budget exhausted"};
    if (!r.memo) return Result{false, "no summary table"};
    for (auto& [key, results] : r.memo->results) {
      bool one = false, abstract = false;
      for (auto& m : results) {
        const Ex& u = deref(*m.h, m.v);
        one |= u->p == P::Int && u->n == 1;
        abstract |= u->p == P::Opaque && refs_contain(u->refs, mk_pred(Op::IntP));
      }
      if (one && abstract)
        return Result{true, std::to_string(results.size()) + " results, " + std::to_string(r.expanded) + " states"};
    }
    return Result{false, "no application with both 1 and an unknown integer as results"};
  });

  report(6, "broken positivity promise is blamed with a short trace", 0, [] {
    Verification v = verify(load("bad-pos.scv"), with_solver(20000));
    auto* d = verdict_for(v, "f");
    if (!d || d->kind != Verdict::Blamed) return Result{false, "f " + kind(v, "f")};
    return Result{d->trace.size() <= 50, "trace of " + std::to_string(d->trace.size()) + " steps"};
  });

  report(7, "differential soundness on 1000 generated programs", 600, [] {
    SoundnessReport r = differential_soundness(1, 1000);
    std::string d = std::to_string(r.programs) + " programs, " + std::to_string(r.concrete_terminals) +
                    " compared runs, " + std::to_string(r.concrete_blames) + " concrete blames, " +
                    std::to_string(r.verified_modules) + " verified modules checked, " + std::to_string(r.skipped) +
                    " skipped, " +
                    std::to_string(r.violations.size()) + " violations";
    if (!r.violations.empty()) d += "; first: " + r.violations[0].kind + " " + r.violations[0].detail;
    return Result{r.programs >= 1000 && r.violations.empty(), d};
  });

  report(8, "primitive operations agree with the reference interpreter", 60, [] {
    SuiteResult r = delta_agreement();
    return Result{r.ok() && r.cases > 10000, suite_detail(r)};
  });

  report(9, "solver answers agree with brute-force enumeration", 120, [] {
    SolverConfig cfg = SolverConfig::from_env();
    if (!solver_available(cfg)) return Result{false, "solver unavailable"};
    SuiteResult r = solver_bruteforce(500, 5, cfg);
    return Result{r.ok() && r.cases == 500, suite_detail(r)};
  });

  report(10, "proof relation trichotomy and monotonicity", 0, [] {
    SuiteResult a = proof_trichotomy(10000, 2024);
    SuiteResult b = proof_monotonicity(10000, 99);
    return Result{a.ok() && b.ok(), "trichotomy " + suite_detail(a) + "; monotonicity " + suite_detail(b)};
  });

  report(11, "summarization is conservative on straight-line programs", 0, [] {
    SuiteResult r = conservativity(50, 8);
    return Result{r.ok() && r.cases == 50, suite_detail(r)};
  });

  return failures == 0 ? 0 : 1;
}
