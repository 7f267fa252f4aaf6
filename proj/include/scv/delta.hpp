#pragma once

#include "scv/smt.hpp"

namespace scv {

// One possible answer of a primitive: a value or a Blame node, with its heap.
struct Outcome {
  Ex ans;
  HeapP h;
};

std::vector<Outcome> delta(Prover& pv, const HeapP& h, Op o, const std::vector<Ex>& args, Sym label);

// Split on a flat predicate-like contract: true branch refined by c, false by neg.
std::vector<Outcome> split(Prover& pv, const HeapP& h, const Ex& v, const Ex& c, const Ex& neg);

// Concrete integer behind a value, looking through the heap.
std::optional<int64_t> as_int(const Heap& h, const Ex& v);

Op flip_cmp(Op o);

}  // namespace scv
