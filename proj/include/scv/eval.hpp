#pragma once

#include <functional>
#include <set>

#include "scv/delta.hpp"
#include "scv/heap.hpp"

namespace scv {

enum class Rule : uint8_t {
  Seed,
  SelfRef,
  ExtRef,
  ApplyFn,
  ApplyNonFn,
  ApplyUnknown,
  Havoc,
  ApplyPrim,
  IfTrue,
  IfFalse,
  RefineUnknown,
  Assume,
  MonProved,
  MonRefuted,
  MonFlat,
  MonFn,
  MonNonFn,
  DepCon,
  HaltBlame,
  RtEnter,
  RtWiden,
  RtMemo,
  RtReturn,
  RtResume,
  Blur,
};
const char* rule_name(Rule r);

// One evaluation-context frame: the hole is node->kids[idx].
struct Frame {
  Ex node;
  size_t idx;
};

struct Focus {
  std::vector<Frame> ctx;  // outermost first
  Ex redex;
};

// Split a non-value expression into E[redex]. For values, ctx is empty.
Focus decompose(const Ex& e);
// Plug e into frames [from, to) of ctx.
Ex plug(const std::vector<Frame>& ctx, size_t from, size_t to, Ex e);
inline Ex plug(const std::vector<Frame>& ctx, Ex e) { return plug(ctx, 0, ctx.size(), std::move(e)); }

bool is_terminal(const State& s);

struct Succ {
  State s;
  Rule rule;
};

// The demonic context λx. amb{(havoc (x •)), (havoc (car x)), (havoc (cdr x))}.
Module havoc_module();
// amb over a non-empty list of expressions, as nested ifs on •.
Ex amb(const std::vector<Ex>& es);
// ((λ_.top) amb{true, (havoc f) ...}) over all concrete modules.
Ex seed_expr(const Program& p);

class Stepper {
 public:
  // The program must already contain the havoc module if the seed uses it.
  Stepper(const Program& p, Prover& pv) : p_(p), pv_(pv) {}

  std::vector<Succ> step(const State& s);
  // Apply every rule for the redex at `f` under heap h.
  void step_focus(const Focus& f, const HeapP& h, std::vector<Succ>& out);

  Prover& prover() { return pv_; }
  const Program& program() const { return p_; }

 private:
  void apply(const std::vector<Frame>& ctx, const Ex& redex, const HeapP& h, std::vector<Succ>& out);
  void monitor(const std::vector<Frame>& ctx, const Ex& redex, const HeapP& h, std::vector<Succ>& out);
  void fn_contract(const std::vector<Frame>& ctx, const Ex& redex, const Ex& dep, const HeapP& h,
                   std::vector<Succ>& out);

  const Program& p_;
  Prover& pv_;
};

struct EvalOptions {
  int64_t budget = 100000;
  bool summarize = true;
  bool havoc = true;  // seed with the demonic context
  int jobs = 1;
  SolverConfig solver;
};

struct TraceStep {
  Rule rule;
  std::string redex;  // the redex of the state the rule was applied to
  std::string state;  // the resulting state
};

struct Memo;

struct ReachResult {
  std::vector<State> finals;  // canonical terminal states, in discovery order
  std::set<std::pair<Sym, Sym>> blames;
  bool exhausted = false;
  int64_t expanded = 0;
  size_t solver_queries = 0;
  std::string warning;

  // Exploration graph, for witness traces.
  struct GNode {
    State s;
    int64_t parent;
    Rule rule;
  };
  std::shared_ptr<std::vector<GNode>> graph;
  std::vector<int64_t> final_nodes;  // parallel to finals
  std::shared_ptr<const Memo> memo;  // summarization tables (summarizing runs only)

  std::vector<TraceStep> trace_to(int64_t node, size_t limit = 200) const;
};

ReachResult eval(const Program& p, const EvalOptions& opt);

struct Verdict {
  enum Kind { Verified, Blamed, Unknown };
  Sym module;
  Kind kind;
  std::pair<Sym, Sym> blame{-1, -1};
  std::vector<TraceStep> trace;
  std::string reason;
};
const char* verdict_name(Verdict::Kind k);

struct Verification {
  std::vector<Verdict> verdicts;
  std::vector<std::pair<Sym, Sym>> discarded;  // blames that never affect a module verdict
  ReachResult rr;
};

// Is this blame one that only an omitted or synthetic component can cause?
bool discarded_blame(const Program& p, std::pair<Sym, Sym> b);

Verification verify(const Program& p, const EvalOptions& opt);

}  // namespace scv
