#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>

#include "scv/eval.hpp"

namespace scv {

// F: key-space address -> value in the current heap.
using Renaming = std::map<int64_t, Ex>;

// Does (h0, v0) approximate (h, v)? Returns the witness on success. Works on
// arbitrary expressions; addresses of v0 resolve in h0, those of v in h.
std::optional<Renaming> subsumes(const Heap& h, const Ex& v, const Heap& h0, const Ex& v0, Prover* pv = nullptr);

// v0 ⊕ v1: an approximation of v1 guided by the prior value v0. Both live in h.
// The result may contain unallocated • and μ-values; settle it before use.
Ex widen(const Ex& v0, const Ex& v1, const Heap& h);

// Same lambda code, with embedded non-lambda values treated as wildcards.
bool same_code(const Ex& a, const Ex& b);

struct MemoResult {
  HeapP h;  // key address i is the argument's key address i
  Ex v;
};

struct MemoKey {
  HeapP h;
  Ex fn, arg;
};

struct Waiting {
  std::vector<Frame> ctx;  // full context of the paused application
  size_t rt;               // index of the enclosing Rt frame in ctx
  HeapP h;
  Renaming f;
};

struct Memo {
  std::map<std::string, MemoKey> keys;
  std::map<std::string, std::vector<MemoResult>> results;  // M
  std::map<std::string, std::set<std::string>> seen;       // encodings in M
  std::map<std::string, std::vector<Waiting>> waiting;     // Ξ
};

class Summarizer {
 public:
  explicit Summarizer(Stepper& st) : st_(st), memo_(std::make_shared<Memo>()) {}

  std::vector<Succ> step(const State& s);
  std::shared_ptr<const Memo> memo() const { return memo_; }

 private:
  bool application(const Focus& f, const HeapP& h, std::vector<Succ>& out);
  void enter(const Focus& f, const HeapP& h, const Ex& fn, const Ex& arg, Rule rule, std::vector<Succ>& out);
  void ret(const Focus& f, const HeapP& h, std::vector<Succ>& out);
  void blur(const Focus& f, const HeapP& h, std::vector<Succ>& out);
  std::optional<State> resume(const Waiting& w, const MemoResult& r);

  Stepper& st_;
  std::shared_ptr<Memo> memo_;
};

}  // namespace scv
