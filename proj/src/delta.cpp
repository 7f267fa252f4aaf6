#include "scv/delta.hpp"

namespace scv {

std::optional<int64_t> as_int(const Heap& h, const Ex& v) {
  const Ex& u = deref(h, v);
  if (is_int(u)) return u->n;
  return std::nullopt;
}

Op flip_cmp(Op o) {
  switch (o) {
    case Op::Gt: return Op::Lt;
    case Op::Lt: return Op::Gt;
    case Op::Ge: return Op::Le;
    case Op::Le: return Op::Ge;
    default: return o;
  }
}

std::vector<Outcome> split(Prover& pv, const HeapP& h, const Ex& v, const Ex& c, const Ex& neg) {
  switch (pv.prove(*h, v, c)) {
    case Res::Proved: return {{mk_true(), h}};
    case Res::Refuted: return {{mk_false(), h}};
    default: break;
  }
  return {{mk_true(), refine(h, v, c).first}, {mk_false(), refine(h, v, neg).first}};
}

namespace {

Ex complement(Op cmp, const Ex& rhs) {
  switch (cmp) {
    case Op::Gt: return mk_cmp_contract(Op::Le, rhs);
    case Op::Lt: return mk_cmp_contract(Op::Ge, rhs);
    case Op::Ge: return mk_cmp_contract(Op::Lt, rhs);
    case Op::Le: return mk_cmp_contract(Op::Gt, rhs);
    default: return mk_neq_contract(rhs);
  }
}

// Operand as it appears inside an arithmetic refinement.
Ex operand(const Heap& h, const Ex& v) {
  if (auto n = as_int(h, v)) return mk_int(*n);
  return v;
}

int64_t arith(Op o, int64_t a, int64_t b) {
  switch (o) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    default: return a * b;
  }
}

bool compare_ints(Op o, int64_t a, int64_t b) {
  switch (o) {
    case Op::Eq: return a == b;
    case Op::Gt: return a > b;
    case Op::Lt: return a < b;
    case Op::Ge: return a >= b;
    default: return a <= b;
  }
}

// Split on int? for each argument in turn; blame on the first non-integer.
// `k` is called with the heap in which every argument is an integer.
template <class K>
void with_ints(Prover& pv, const HeapP& h, const std::vector<Ex>& args, size_t i, Sym label,
               std::vector<Outcome>& out, K&& k) {
  if (i == args.size()) {
    k(h);
    return;
  }
  static const Ex int_p = mk_pred(Op::IntP);
  static const Ex not_int = mk_neg(Op::IntP);
  for (auto& o : split(pv, h, args[i], int_p, not_int)) {
    if (is_false(o.ans))
      out.push_back({mk_blame(label, lang_label()), o.h});
    else
      with_ints(pv, o.h, args, i + 1, label, out, k);
  }
}

void project(Prover& pv, const HeapP& h, const Ex& v, size_t idx, Sym label, std::vector<Outcome>& out) {
  static const Ex cons_p = mk_pred(Op::ConsP);
  static const Ex not_cons = mk_neg(Op::ConsP);
  if (v->k == K::Val && v->p == P::Cons) {
    out.push_back({v->kids[idx], h});
    return;
  }
  if (v->k != K::Addr) {
    Res r = check(*h, v, cons_p);
    if (r == Res::Refuted) {
      out.push_back({mk_blame(label, lang_label()), h});
      return;
    }
    auto [h1, a] = settle(h, v);
    if (a->k != K::Addr) {
      out.push_back({mk_blame(label, lang_label()), h});
      return;
    }
    project(pv, h1, a, idx, label, out);
    return;
  }
  Res r = pv.prove(*h, v, cons_p);
  if (r != Res::Refuted) {
    HeapP h1 = h;
    if (h->at(v->n)->p != P::Cons) h1 = refine(h, v, cons_p).first;
    const Ex& t = h1->at(v->n);
    if (t->p == P::Cons) out.push_back({t->kids[idx], h1});
  }
  if (r != Res::Proved) {
    HeapP h2 = r == Res::Refuted ? h : refine(h, v, not_cons).first;
    out.push_back({mk_blame(label, lang_label()), h2});
  }
}

}  // namespace

std::vector<Outcome> delta(Prover& pv, const HeapP& h, Op o, const std::vector<Ex>& args, Sym label) {
  std::vector<Outcome> out;
  if (is_pred(o)) return split(pv, h, args[0], mk_pred(o), mk_neg(o));
  switch (o) {
    case Op::Cons: out.push_back({mk_cons(args[0], args[1]), h}); return out;
    case Op::Car: project(pv, h, args[0], 0, label, out); return out;
    case Op::Cdr: project(pv, h, args[0], 1, label, out); return out;
    case Op::Add1:
    case Op::Add:
    case Op::Sub:
    case Op::Mul: {
      std::vector<Ex> as = args;
      Op ao = o;
      if (o == Op::Add1) {
        as.push_back(mk_int(1));
        ao = Op::Add;
      }
      with_ints(pv, h, as, 0, label, out, [&](const HeapP& hi) {
        auto a = as_int(*hi, as[0]), b = as_int(*hi, as[1]);
        if (a && b) {
          out.push_back({mk_int(arith(ao, *a, *b)), hi});
          return;
        }
        Ex u = mk_opaque({mk_pred(Op::IntP), mk_arith_contract(ao, operand(*hi, as[0]), operand(*hi, as[1]))});
        auto [h2, l] = alloc(hi, u);
        out.push_back({mk_addr(l), h2});
      });
      return out;
    }
    default: {
      // Comparisons.
      with_ints(pv, h, args, 0, label, out, [&](const HeapP& hi) {
        auto a = as_int(*hi, args[0]), b = as_int(*hi, args[1]);
        if (a && b) {
          out.push_back({mk_bool(compare_ints(o, *a, *b)), hi});
          return;
        }
        Ex subject = args[0], rhs = operand(*hi, args[1]);
        Op rel = o;
        if (a) {
          subject = args[1];
          rhs = mk_int(*a);
          rel = flip_cmp(o);
        }
        for (auto& oc : split(pv, hi, subject, mk_cmp_contract(rel, rhs), complement(rel, rhs)))
          out.push_back(oc);
      });
      return out;
    }
  }
}

}  // namespace scv
