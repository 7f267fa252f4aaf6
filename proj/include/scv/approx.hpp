#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>

#include "scv/eval.hpp"

namespace scv {

// F: abstract address -> concrete value (an address or a closed pre-value).
using WitnessMap = std::map<int64_t, Ex>;

enum class Approx : uint8_t { Yes, No, Unknown };  // Unknown: derivation depth cap hit

struct ApproxResult {
  Approx kind = Approx::No;
  WitnessMap f;
};

// Is the concrete state s1 approximated by the abstract state s2?
ApproxResult approx_search(const State& s1, const State& s2, const Program& p, int depth_cap = 64);
std::optional<WitnessMap> approximates(const State& s1, const State& s2, const Program& p);

// Deterministic reference interpreter for •-free programs, independent of the evaluator.
// Exhaustion of fuel sets `exhausted`.
ReachResult concrete_interpret(const Program& p, int64_t fuel);

// Random well-formed concrete programs and their abstractions.
struct GenOptions {
  int depth = 5;
  int max_modules = 3;
  int lo = -3, hi = 3;
};
Program generate_program(std::mt19937_64& rng, const GenOptions& o = {});
// Replace module bodies and/or integer literals with • (opaque modules).
Program abstract_program(const Program& p, std::mt19937_64& rng);

struct Violation {
  uint64_t program_seed;
  std::string kind;  // "terminal", "verified-blamed" or "approx-unknown"
  std::string concrete, abstract, detail;
};

struct SoundnessReport {
  size_t programs = 0;
  size_t abstractions = 0;
  size_t concrete_terminals = 0;
  size_t skipped = 0;  // runs that hit the fuel or budget limit
  size_t concrete_blames = 0;    // compared runs whose concrete terminal is a blame
  size_t verified_modules = 0;   // Verified verdicts checked against concrete blames
  std::vector<Violation> violations;
};

// Shrink a concrete program while `still_fails` holds: drop modules, then subexpressions.
struct PairCheck {
  bool skipped = false;  // one side ran out of fuel or budget
  std::string kind;      // empty when the pair is consistent
  std::string detail;
  bool concrete_blame = false;
  size_t verified = 0;
};

// Checks one concrete program against an abstraction of it.
PairCheck check_pair(const Program& concrete, const Program& abstract);

Program shrink(const Program& p, const std::function<bool(const Program&)>& still_fails);

SoundnessReport differential_soundness(uint64_t seed, size_t count, int jobs = 1);

}  // namespace scv
