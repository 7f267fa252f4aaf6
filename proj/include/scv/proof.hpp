#pragma once

#include "scv/heap.hpp"

namespace scv {

enum class Res : uint8_t { Proved, Refuted, Ambig };

const char* res_name(Res r);

inline Res flip(Res r) {
  return r == Res::Proved ? Res::Refuted : r == Res::Refuted ? Res::Proved : Res::Ambig;
}

// Combine per-conjunct or per-disjunct results of a junction contract.
template <class F>
Res combine(const JunctionShape& j, F&& part) {
  bool all_proved = true, all_refuted = true;
  for (auto& c : j.parts) {
    Res r = part(c);
    if (j.conj && r == Res::Refuted) return Res::Refuted;
    if (!j.conj && r == Res::Proved) return Res::Proved;
    all_proved &= r == Res::Proved;
    all_refuted &= r == Res::Refuted;
  }
  return all_proved ? Res::Proved : all_refuted ? Res::Refuted : Res::Ambig;
}

// The basic provability relation, no solver involved.
Res check(const Heap& h, const Ex& v, const Ex& c);

// The type predicate a concrete pre-value satisfies, if any (true satisfies none).
std::optional<Op> type_of(const Ex& u);

}  // namespace scv
