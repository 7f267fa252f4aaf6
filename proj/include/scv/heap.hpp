#pragma once

#include <map>
#include <string>
#include <unordered_map>

#include "scv/syntax.hpp"

namespace scv {

struct Heap {
  std::map<int64_t, Ex> m;

  const Ex& at(int64_t l) const { return m.at(l); }
  bool has(int64_t l) const { return m.count(l) != 0; }
  int64_t fresh() const { return m.empty() ? 0 : m.rbegin()->first + 1; }
};

HeapP empty_heap();
HeapP heap_set(const HeapP& h, int64_t l, Ex u);
std::pair<HeapP, int64_t> alloc(const HeapP& h, Ex u);

// Follow an address to its refined pre-value; non-addresses are returned as is.
const Ex& deref(const Heap& h, const Ex& v);

// Refinement with a flat contract. μ-valued targets are narrowed to the members
// the contract does not refute.
std::pair<HeapP, Ex> refine(const HeapP& h, const Ex& v, const Ex& c);

// Give μ-values (top level and inside pairs) their own addresses so later
// refinements are shared by every occurrence.
std::pair<HeapP, Ex> settle(const HeapP& h, const Ex& v);

// Unroll one member of a μ-value: !x is replaced by an address holding the μ-value.
std::pair<HeapP, Ex> unroll(const HeapP& h, const Ex& rec, const Ex& member);

struct State {
  Ex e;         // a Blame node for terminal blame states
  HeapP h;
  bool blamed() const { return e->k == K::Blame; }
};

// Addresses reachable from roots, in first-reachability order.
std::vector<int64_t> reachable(const Heap& h, const std::vector<Ex>& roots);

// GC + deterministic renaming. Returns the renaming old->new as well.
State canonicalize(const State& s, std::map<int64_t, int64_t>* renaming = nullptr);

// Restrict a heap to what is reachable from roots and renumber from 0 in order.
// The renamed roots are returned in the same order.
std::pair<HeapP, std::vector<Ex>> restrict_canonical(const Heap& h, const std::vector<Ex>& roots,
                                                     std::map<int64_t, int64_t>* renaming = nullptr);

// Rename addresses through a total map.
Ex rename(const Ex& e, const std::map<int64_t, int64_t>& r);

// Exact serialisation used for visited sets and table keys.
void encode(std::string& out, const Ex& e);
void encode(std::string& out, const Heap& h);
std::string encode_state(const State& s);

std::string show(const Heap& h);
std::string show(const State& s);

// Copy v, living in heap `from`, into heap `into`. Addresses listed in `fixed`
// are replaced by the given values; the rest get fresh addresses.
std::pair<HeapP, Ex> import_value(const HeapP& into, const Heap& from, const Ex& v,
                                  std::map<int64_t, Ex>& fixed);

}  // namespace scv
