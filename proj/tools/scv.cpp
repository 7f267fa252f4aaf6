#include <CLI11.hpp>
#include <iostream>

#include "scv/approx.hpp"
#include "scv/parser.hpp"
#include "scv/report.hpp"

using namespace scv;

namespace {

struct Flags {
  std::string file;
  std::string solver;
  int64_t budget = 100000;
  bool no_summarize = false;
  bool trace = false;
  bool json = false;
  int jobs = 1;
  int64_t fuel = 100000;
  std::string abstract_file;
  uint64_t seed = 1;
  size_t count = 1000;
};

int do_verify(const Flags& f) {
  Program p = parse_file(f.file);
  EvalOptions eo;
  eo.budget = f.budget;
  eo.summarize = !f.no_summarize;
  eo.jobs = f.jobs;
  eo.solver = SolverConfig::from_env();
  if (!f.solver.empty()) eo.solver.command = f.solver;
  Verification v = verify(p, eo);
  ReportOptions ro;
  ro.trace_states = f.trace;
  std::cout << (f.json ? report_json(p, v, eo, ro) : report_text(p, v, ro));
  return exit_code(v);
}

int do_run(const Flags& f) {
  Program p = parse_file(f.file);
  ReachResult rr = concrete_interpret(p, f.fuel);
  if (rr.exhausted) {
    std::cout << "fuel exhausted after " << rr.expanded << " steps\n";
    return 2;
  }
  const State& s = rr.finals.at(0);
  if (s.blamed()) {
    std::cout << "blame " << name(s.e->l1) << " via " << name(s.e->l2) << '\n';
    return 1;
  }
  std::cout << show(s.e) << '\n';
  return 0;
}

int do_soundness(const Flags& f) {
  SoundnessReport r = differential_soundness(f.seed, f.count, f.jobs);
  std::cout << "programs: " << r.programs << "\nabstractions: " << r.abstractions
            << "\nconcrete terminals: " << r.concrete_terminals << "\nconcrete blames: " << r.concrete_blames
            << "\nverified modules checked: " << r.verified_modules << "\nskipped: " << r.skipped
            << "\nviolations: " << r.violations.size() << '\n';
  for (auto& v : r.violations) {
    std::cout << "\n[" << v.kind << "] program seed " << v.program_seed << "\nconcrete:\n"
              << v.concrete << "abstract:\n" << v.abstract;
    if (!v.detail.empty()) std::cout << "detail: " << v.detail << '\n';
  }
  return r.violations.empty() ? 0 : 1;
}

int do_generate(const Flags& f) {
  std::mt19937_64 rng(f.seed);
  Program p = generate_program(rng);
  std::cout << show(p);
  std::mt19937_64 arng(f.seed * 31);
  std::cout << ";; abstracted\n" << show(abstract_program(p, arng));
  return 0;
}

int do_compare(const Flags& f) {
  PairCheck c = check_pair(parse_file(f.file), parse_file(f.abstract_file));
  if (c.skipped) {
    std::cout << "skipped: fuel or budget exhausted\n";
    return 2;
  }
  if (c.kind.empty()) {
    std::cout << "consistent\n";
    return 0;
  }
  std::cout << c.kind << ": " << c.detail << '\n';
  return 1;
}

void eval_flags(CLI::App* a, Flags& f) {
  a->add_option("--solver", f.solver, "Solver command, or 'none'");
  a->add_option("--budget", f.budget, "Maximum number of state expansions")->check(CLI::PositiveNumber);
  a->add_flag("--no-summarize", f.no_summarize, "Disable summarization");
  a->add_flag("--trace", f.trace, "Include full states in witness traces");
  a->add_flag("--json", f.json, "Print a JSON report");
  a->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soft contract verifier"};
  Flags f;
  eval_flags(&app, f);
  app.add_option("file", f.file, "Program to verify");

  auto* verify_cmd = app.add_subcommand("verify", "Verify every module of a program (default)");
  eval_flags(verify_cmd, f);
  verify_cmd->add_option("file", f.file, "Program to verify")->required();

  auto* run_cmd = app.add_subcommand("run", "Run a program with the concrete interpreter");
  run_cmd->add_option("file", f.file, "Program to run")->required();
  run_cmd->add_option("--fuel", f.fuel, "Maximum number of steps")->check(CLI::PositiveNumber);

  auto* sound_cmd = app.add_subcommand("soundness", "Differential soundness testing on generated programs");
  sound_cmd->add_option("--seed", f.seed, "Generator seed");
  sound_cmd->add_option("--count", f.count, "Number of programs");
  sound_cmd->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* gen_cmd = app.add_subcommand("generate", "Print a generated program and one abstraction of it");
  gen_cmd->add_option("--seed", f.seed, "Generator seed");

  auto* cmp_cmd = app.add_subcommand("compare", "Check an abstraction of a program against its concrete run");
  cmp_cmd->add_option("concrete", f.file, "Concrete program")->required();
  cmp_cmd->add_option("abstract", f.abstract_file, "Abstracted program")->required();

  app.require_subcommand(0, 1);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  try {
    if (*run_cmd) return do_run(f);
    if (*sound_cmd) return do_soundness(f);
    if (*gen_cmd) return do_generate(f);
    if (*cmp_cmd) return do_compare(f);
    if (f.file.empty()) {
      std::cerr << "error: no input file\n" << app.help();
      return 3;
    }
    return do_verify(f);
  } catch (const ParseError& e) {
    std::cerr << f.file << ":" << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
