#include "scv/proof.hpp"

namespace scv {

const char* res_name(Res r) {
  switch (r) {
    case Res::Proved: return "proved";
    case Res::Refuted: return "refuted";
    default: return "ambiguous";
  }
}

std::optional<Op> type_of(const Ex& u) {
  switch (u->p) {
    case P::Int: return Op::IntP;
    case P::False: return Op::FalseP;
    case P::Empty: return Op::EmptyP;
    case P::Cons: return Op::ConsP;
    case P::Lam:
    case P::Neg: return Op::ProcP;
    case P::Dep: return Op::DepP;
    default: return std::nullopt;
  }
}

namespace {

std::optional<bool> parity_of(const Heap& h, const Ex& v, int depth);

// Parity implied by an arithmetic refinement: true for even.
std::optional<bool> arith_parity(const Heap& h, const ArithShape& a, int depth) {
  auto pa = parity_of(h, a.a, depth + 1), pb = parity_of(h, a.b, depth + 1);
  if (a.arith == Op::Mul) {
    if ((pa && *pa) || (pb && *pb)) return true;
    if (pa && pb) return false;
    return std::nullopt;
  }
  if (!pa || !pb) return std::nullopt;
  return *pa == *pb;
}

std::optional<bool> parity_of(const Heap& h, const Ex& v, int depth) {
  if (depth > 16) return std::nullopt;
  const Ex* u = &v;
  if (v->k == K::Addr) {
    if (!h.has(v->n)) return std::nullopt;
    u = &h.at(v->n);
  }
  if ((*u)->k != K::Val) return std::nullopt;
  if ((*u)->p == P::Int) return (*u)->n % 2 == 0;
  bool is_int = false;
  std::optional<bool> neg;
  for (auto& r : (*u)->refs) {
    if (auto q = pred_of(r)) {
      if (*q == Op::EvenP) return true;
      if (*q == Op::OddP) return false;
      is_int |= *q == Op::IntP;
    } else if (r->k == K::Val && r->p == P::Neg && is_parity(r->op)) {
      neg = r->op == Op::OddP;
    } else if (auto a = arith_of(r)) {
      is_int = true;
      if (auto p = arith_parity(h, *a, depth)) return p;
    } else if (cmp_of(r)) {
      is_int = true;
    }
  }
  return is_int ? neg : std::nullopt;
}

// What the refinement set alone says about predicate o.
Res from_refs(const Heap& h, const Ex& u, Op o) {
  bool is_int = false;
  for (auto& r : u->refs) {
    if (auto q = pred_of(r)) {
      if (*q == o) return Res::Proved;
      if (is_parity(*q)) {
        if (o == Op::IntP) return Res::Proved;
        return Res::Refuted;
      }
      if (*q == Op::IntP && is_parity(o)) {
        is_int = true;
        continue;
      }
      return Res::Refuted;
    }
    if (r->k == K::Val && r->p == P::Neg && (r->op == o || (r->op == Op::IntP && is_parity(o)))) return Res::Refuted;
    // A successful comparison or arithmetic refinement implies an integer.
    if (cmp_of(r) || arith_of(r)) {
      if (o == Op::IntP) return Res::Proved;
      if (!is_parity(o)) return Res::Refuted;
      is_int = true;
    }
  }
  if (is_int && is_parity(o)) {
    if (auto p = parity_of(h, u, 0)) return *p == (o == Op::EvenP) ? Res::Proved : Res::Refuted;
  }
  return Res::Ambig;
}

Res check_pred(const Heap& h, const Ex& u, Op o, int depth) {
  if (Res r = from_refs(h, u, o); r != Res::Ambig) return r;
  switch (u->p) {
    case P::Opaque:
    case P::RecRef: return Res::Ambig;
    case P::True: return Res::Refuted;
    case P::Int:
      if (is_parity(o)) return (u->n % 2 == 0) == (o == Op::EvenP) ? Res::Proved : Res::Refuted;
      return o == Op::IntP ? Res::Proved : Res::Refuted;
    case P::Rec: {
      if (depth > 8) return Res::Ambig;
      bool all_p = true, all_r = true;
      for (auto& m : u->kids) {
        Ex um = subst_recref(mk_opaque(), u->x, m);
        Res r = um->k == K::Addr ? check_pred(h, h.at(um->n), o, depth + 1) : check_pred(h, um, o, depth + 1);
        all_p &= r == Res::Proved;
        all_r &= r == Res::Refuted;
      }
      if (u->kids.empty()) return Res::Ambig;
      return all_p ? Res::Proved : all_r ? Res::Refuted : Res::Ambig;
    }
    default: {
      auto t = type_of(u);
      return t && *t == o ? Res::Proved : Res::Refuted;
    }
  }
}

}  // namespace

Res check(const Heap& h, const Ex& v, const Ex& c) {
  if (v->k == K::Addr) {
    if (!h.has(v->n)) return Res::Ambig;
    return check(h, h.at(v->n), c);
  }
  if (v->k != K::Val) return Res::Ambig;
  if (refs_contain(v->refs, c)) return Res::Proved;
  if (auto j = junction_of(c)) return combine(*j, [&](const Ex& part) { return check(h, v, part); });
  if (c->k == K::Val && c->p == P::Neg) return flip(check_pred(h, v, c->op, 0));
  if (auto b = const_of(c)) return *b ? Res::Proved : Res::Refuted;
  if (auto o = pred_of(c)) return check_pred(h, v, *o, 0);
  if (v->p == P::Rec) {
    bool all = !v->kids.empty();
    for (auto& m : v->kids) all &= m->k == K::Val && refs_contain(m->refs, c);
    if (all) return Res::Proved;
  }
  return Res::Ambig;
}

}  // namespace scv
