#include "scv/summarizer.hpp"

#include "scv/proof.hpp"

namespace scv {

namespace {

constexpr int kDetachDepth = 6;

Sym rec_var() {
  static Sym s = intern("%r");
  return s;
}

std::vector<Ex> free_refs(const Ex& u) {
  std::vector<Ex> out;
  for (auto& r : u->refs)
    if (!r->has_addr) out.push_back(r);
  return out;
}

Ex type_opaque(const Ex& u) {
  std::vector<Ex> refs = free_refs(u);
  if (auto t = type_of(u)) refs.push_back(mk_pred(*t));
  return mk_opaque(std::move(refs));
}

// An address-free approximation of v.
Ex detach(const Heap& h, const Ex& v, int depth) {
  const Ex& u = deref(h, v);
  if (u->k != K::Val) return mk_opaque();
  if (!u->has_addr) return u;
  if (depth <= 0) return type_opaque(u);
  switch (u->p) {
    case P::Opaque:
    case P::Int:
    case P::True:
    case P::False:
    case P::Empty: return with_refs(u, free_refs(u));
    case P::Cons:
      return mk_val(P::Cons, {detach(h, u->kids[0], depth - 1), detach(h, u->kids[1], depth - 1)}, free_refs(u));
    default: return type_opaque(u);
  }
}

bool has_opaque(const Ex& e) {
  if (e->k == K::Val && e->p == P::Opaque) return true;
  for (auto& k : e->kids)
    if (has_opaque(k)) return true;
  return false;
}

// Does sub stand for the same value as v0?
bool same_value(const Heap& h, const Ex& sub, const Ex& v0, const Ex& d0) {
  if (equal(sub, v0)) return true;
  if (has_opaque(d0)) return false;
  return equal(detach(h, sub, kDetachDepth), d0);
}

// Children of a pair, looking through the heap.
const std::vector<Ex>* pair_kids(const Heap& h, const Ex& v) {
  const Ex& u = deref(h, v);
  if (u->k == K::Val && u->p == P::Cons) return &u->kids;
  return nullptr;
}

bool occurs(const Heap& h, const Ex& v0, const Ex& d0, const Ex& v1, int depth) {
  if (depth <= 0) return false;
  auto ks = pair_kids(h, v1);
  if (!ks) return false;
  for (auto& k : *ks)
    if (same_value(h, k, v0, d0) || occurs(h, v0, d0, k, depth - 1)) return true;
  return false;
}

// v1 with occurrences of v0 replaced by !x, address-free.
Ex replace(const Heap& h, const Ex& v1, const Ex& v0, const Ex& d0, Sym x, int depth) {
  if (same_value(h, v1, v0, d0)) return mk_recref(x);
  auto ks = pair_kids(h, v1);
  if (!ks || depth <= 0) return detach(h, v1, kDetachDepth);
  return mk_val(P::Cons, {replace(h, (*ks)[0], v0, d0, x, depth - 1), replace(h, (*ks)[1], v0, d0, x, depth - 1)},
                free_refs(deref(h, v1)));
}

bool shape_match(const Ex& a, const Ex& b) { return a->k == K::Val && b->k == K::Val && a->p == b->p; }

// Add a member to a μ-value's set, merging with a member of the same shape.
std::vector<Ex> add_member(std::vector<Ex> ms, const Ex& m, const Heap& h) {
  for (auto& old : ms) {
    if (equal(old, m)) return ms;
    if (shape_match(old, m) && old->p == P::Cons) {
      old = widen(old, m, h);
      return ms;
    }
  }
  ms.push_back(m);
  return ms;
}

bool concrete(const Ex& u) {
  return u->k == K::Val && (u->p == P::Int || u->p == P::True || u->p == P::False || u->p == P::Empty);
}

bool wildcard(const Ex& e) {
  return (is_value(e) || (e->k == K::Val && (e->p == P::Opaque || e->p == P::Rec))) &&
         !(e->k == K::Val && e->p == P::Lam);
}

bool same_head(const Ex& a, const Ex& b) {
  return a->k == b->k && a->p == b->p && a->op == b->op && a->x == b->x && a->l1 == b->l1 && a->l2 == b->l2 &&
         a->l3 == b->l3 && a->kids.size() == b->kids.size();
}

// Congruence widening of two lambdas of the same code. When `into` is given,
// widened embedded values are settled there.
Ex widen_code(const Ex& a, const Ex& b, const Heap& h, HeapP* into) {
  if (a == b) return b;
  if (wildcard(a) && wildcard(b) && !(a->k == K::Val && a->p == P::Opaque && b->k == K::Val && b->p == P::Opaque)) {
    if (equal(a, b)) return b;
    Ex w = widen(a, b, h);
    if (!into) return w;
    auto [h1, sw] = settle(*into, w);
    *into = h1;
    return sw;
  }
  if (!same_head(a, b)) return b;
  std::vector<Ex> kids;
  bool changed = false;
  for (size_t i = 0; i < b->kids.size(); ++i) {
    kids.push_back(widen_code(a->kids[i], b->kids[i], h, into));
    changed |= kids.back() != b->kids[i];
  }
  return changed ? with_kids(b, std::move(kids)) : b;
}

}  // namespace

bool same_code(const Ex& a, const Ex& b) {
  if (a == b) return true;
  if (wildcard(a) && wildcard(b)) return true;
  if (!same_head(a, b)) return false;
  if (a->k == K::Rt && *a->key != *b->key) return false;
  for (size_t i = 0; i < a->kids.size(); ++i)
    if (!same_code(a->kids[i], b->kids[i])) return false;
  return true;
}

Ex widen(const Ex& v0, const Ex& v1, const Heap& h) {
  if (equal(v0, v1)) return v1;
  const Ex& u0 = deref(h, v0);
  const Ex& u1 = deref(h, v1);
  if (u0->k != K::Val || u1->k != K::Val) return v1;
  if (u0->p == P::Cons && u1->p == P::Cons)
    return mk_val(P::Cons, {widen(u0->kids[0], u1->kids[0], h), widen(u0->kids[1], u1->kids[1], h)}, free_refs(u1));
  if (u0->p == P::Rec) {
    std::vector<Ex> ms = u0->kids;
    if (u1->p == P::Rec) {
      for (auto& m : u1->kids) ms = add_member(ms, subst_recref(mk_recref(u0->x), u1->x, m), h);
    } else {
      Ex d0 = detach(h, v0, kDetachDepth);
      ms = add_member(ms, replace(h, v1, v0, d0, u0->x, kDetachDepth), h);
    }
    return mk_rec(u0->x, ms);
  }
  Ex d0 = detach(h, v0, kDetachDepth);
  if (occurs(h, v0, d0, v1, kDetachDepth)) {
    Sym x = rec_var();
    return mk_rec(x, {d0, replace(h, v1, v0, d0, x, kDetachDepth)});
  }
  if (u0->p == P::Int && u1->p == P::Int) return mk_opaque({mk_pred(Op::IntP)});
  if (u0->p == P::Lam && u1->p == P::Lam && same_code(u0, u1)) return widen_code(u0, u1, h, nullptr);
  if (v0->k == K::Addr && v1->k == K::Addr && u1->p != P::Cons &&
      !(concrete(u0) && equal(with_refs(u0, {}), with_refs(u1, {})))) {
    // Keep what is known of the prior value and still holds for the new one.
    std::vector<Ex> refs;
    for (auto& c : free_refs(u0))
      if (check(h, v1, c) == Res::Proved) refs.push_back(c);
    if (auto t = type_of(u0))
      if (check(h, v1, mk_pred(*t)) == Res::Proved) refs.push_back(mk_pred(*t));
    return mk_opaque(std::move(refs));
  }
  return v1;
}

namespace {

struct Matcher {
  const Heap& h;
  const Heap& h0;
  Prover* pv;
  Renaming f;
  std::vector<std::pair<Ex, Ex>> obligations;  // (current value, key-space contract)
  int fuel = 20000;

  bool same(const Ex& a, const Ex& b) {
    if (equal(a, b)) return true;
    const Ex& ua = deref(h, a);
    const Ex& ub = deref(h, b);
    return concrete(ua) && concrete(ub) && equal(with_refs(ua, {}), with_refs(ub, {}));
  }

  bool expr(const Ex& e, const Ex& e0) {
    if (--fuel < 0) return false;
    if (e0->k == K::Addr || e0->k == K::Val) return value(e, e0);
    if (!same_head(e, e0)) return false;
    if (e->k == K::Rt && *e->key != *e0->key) return false;
    for (size_t i = 0; i < e->kids.size(); ++i) {
      if (e->k == K::Rt && i < 2) continue;
      if (!expr(e->kids[i], e0->kids[i])) return false;
    }
    return true;
  }

  bool value(const Ex& v, const Ex& v0) {
    if (--fuel < 0) return false;
    if (v->k != K::Addr && v->k != K::Val) return false;
    if (v0->k == K::Addr) return addr(v, v0->n);
    return pre(v, v0, v0);
  }

  bool addr(const Ex& v, int64_t l0) {
    auto it = f.find(l0);
    if (it != f.end()) return same(it->second, v);
    Ex u0 = h0.has(l0) ? h0.at(l0) : mk_opaque();
    if (u0->p == P::Rec) return rec(v, u0, mk_addr(l0));
    f[l0] = v;
    return pre(v, u0, mk_addr(l0));
  }

  void oblige(const Ex& v, const Ex& u0) {
    for (auto& c : u0->refs) obligations.emplace_back(v, c);
  }

  bool pre(const Ex& v, const Ex& u0, const Ex& self0) {
    const Ex& u = deref(h, v);
    if (u->k != K::Val) return false;
    switch (u0->p) {
      case P::Opaque: oblige(v, u0); return true;
      case P::Rec: return rec(v, u0, self0);
      case P::Int:
      case P::True:
      case P::False:
      case P::Empty:
        if (u->p != u0->p || u->n != u0->n) return false;
        oblige(v, u0);
        return true;
      case P::Cons:
        if (u->p != P::Cons) return false;
        oblige(v, u0);
        return value(u->kids[0], u0->kids[0]) && value(u->kids[1], u0->kids[1]);
      case P::Lam:
        if (u->p != P::Lam || u->x != u0->x) return false;
        oblige(v, u0);
        return expr(u->kids[0], u0->kids[0]);
      case P::Dep:
        if (u->p != P::Dep || u->x != u0->x) return false;
        return value(u->kids[0], u0->kids[0]) && expr(u->kids[1], u0->kids[1]);
      default: return equal(with_refs(u, {}), with_refs(u0, {}));
    }
  }

  // Matching against μ binds nothing: every member is tried in isolation.
  bool rec(const Ex& v, const Ex& u0, const Ex& self0) {
    const Ex& u = deref(h, v);
    if (u->k == K::Val && u->p == P::Rec) {
      for (auto& m : u->kids) {
        Ex mm = subst_recref(mk_recref(u0->x), u->x, m);
        bool found = false;
        for (auto& m0 : u0->kids) found |= equal(mm, m0);
        if (!found) return false;
      }
      return true;
    }
    for (auto& m0 : u0->kids) {
      Renaming saved_f = f;
      size_t saved_ob = obligations.size();
      if (value(v, subst_recref(self0, u0->x, m0))) return true;
      f = std::move(saved_f);
      obligations.resize(saved_ob);
    }
    return false;
  }

  bool discharge() {
    for (auto& [v, c0] : obligations) {
      bool unbound = false;
      Ex c = map_addrs(c0, [&](int64_t l) -> Ex {
        auto it = f.find(l);
        if (it == f.end()) {
          unbound = true;
          return nullptr;
        }
        return it->second;
      });
      if (unbound) return false;
      Res r = pv ? pv->prove(h, v, c) : check(h, v, c);
      if (r != Res::Proved) return false;
    }
    return true;
  }
};

}  // namespace

std::optional<Renaming> subsumes(const Heap& h, const Ex& v, const Heap& h0, const Ex& v0, Prover* pv) {
  Matcher m{h, h0, pv, {}, {}};
  if (!m.expr(v, v0) || !m.discharge()) return std::nullopt;
  return m.f;
}

namespace {

// Widening for the summarizer: when v1 grew around v0, the μ-value is unrolled
// once so the result still covers v1 and keeps its outer shape.
Ex widen_step(const Ex& v0, const Ex& v1, const Heap& h) {
  Ex w = widen(v0, v1, h);
  const Ex& u0 = deref(h, v0);
  if (w->k == K::Val && w->p == P::Rec && w->kids.size() == 2 && u0->k == K::Val && u0->p != P::Rec &&
      u0->p != P::Cons)
    return subst_recref(w, w->x, w->kids[1]);
  return w;
}

// The result (v, h) in the key space of an Rt whose key address i is binds[i].
MemoResult to_key(const Heap& h, const std::vector<Ex>& binds, const Ex& v) {
  std::vector<Ex> roots = binds;
  roots.push_back(v);
  auto [kh, rs] = restrict_canonical(h, roots);
  return {kh, rs.back()};
}

std::vector<Ex> binds_of(const Ex& rt) { return {rt->kids.begin() + 3, rt->kids.end()}; }

Ex to_current(const Ex& e, const std::vector<Ex>& binds) {
  return map_addrs(e, [&](int64_t l) -> Ex {
    return l >= 0 && static_cast<size_t>(l) < binds.size() ? binds[static_cast<size_t>(l)] : nullptr;
  });
}

// Combine what the current heap knows about an address with what a memoised
// result learnt about it. Nothing when the two contradict each other.
std::optional<Ex> merge(const Heap& h, int64_t l, const Ex& imp) {
  const Ex& cur = h.at(l);
  for (auto& c : imp->refs)
    if (check(h, mk_addr(l), c) == Res::Refuted) return std::nullopt;
  std::vector<Ex> refs = cur->refs;
  refs.insert(refs.end(), imp->refs.begin(), imp->refs.end());
  if (cur->p == P::Opaque && imp->p != P::Rec) return with_refs(imp, std::move(refs));
  if (imp->p == P::Opaque || imp->p == P::Rec || cur->p == P::Rec) return with_refs(cur, std::move(refs));
  if (cur->p != imp->p) return std::nullopt;
  if (concrete(cur) && !equal(with_refs(cur, {}), with_refs(imp, {}))) return std::nullopt;
  return with_refs(cur, std::move(refs));
}

}  // namespace

std::vector<Succ> Summarizer::step(const State& s) {
  std::vector<Succ> out;
  Focus f = decompose(s.e);
  switch (f.redex->k) {
    case K::App:
      if (application(f, s.h, out)) return out;
      break;
    case K::Rt: ret(f, s.h, out); return out;
    case K::Blur: blur(f, s.h, out); return out;
    default: break;
  }
  st_.step_focus(f, s.h, out);
  return out;
}

bool Summarizer::application(const Focus& f, const HeapP& h, std::vector<Succ>& out) {
  const Ex& fn = f.redex->kids[0];
  const Ex& arg = f.redex->kids[1];
  if (deref(*h, fn)->k != K::Val || deref(*h, fn)->p != P::Lam) return false;
  Ex lam = with_refs(deref(*h, fn), {});
  size_t j = f.ctx.size();
  while (j-- > 0) {
    const Ex& n = f.ctx[j].node;
    if (n->k == K::Rt && same_code(n->kids[0], lam)) break;
  }
  if (j == static_cast<size_t>(-1)) {
    enter(f, h, lam, arg, Rule::RtEnter, out);
    return true;
  }
  const Ex& rt = f.ctx[j].node;
  Ex cur = mk_cons(lam, arg);
  Ex key = mk_cons(rt->kids[0], rt->kids[1]);
  if (auto F = subsumes(*h, cur, *rt->heap, key, &st_.prover())) {
    const std::string& k = *rt->key;
    Waiting w{f.ctx, j, h, std::move(*F)};
    for (auto& r : memo_->results[k])
      if (auto s = resume(w, r)) out.push_back({std::move(*s), Rule::RtMemo});
    memo_->waiting[k].push_back(std::move(w));
    return true;
  }
  auto binds = binds_of(rt);
  HeapP h1 = h;
  Ex fn1 = widen_code(to_current(rt->kids[0], binds), lam, *h, &h1);
  auto [h2, arg1] = settle(h1, widen_step(to_current(rt->kids[1], binds), arg, *h1));
  enter(f, h2, fn1, arg1, Rule::RtWiden, out);
  return true;
}

void Summarizer::enter(const Focus& f, const HeapP& h, const Ex& fn, const Ex& arg, Rule rule,
                       std::vector<Succ>& out) {
  std::map<int64_t, int64_t> ren;
  auto [kh, roots] = restrict_canonical(*h, {fn, arg}, &ren);
  std::string key;
  encode(key, *kh);
  encode(key, roots[0]);
  encode(key, roots[1]);
  std::vector<Ex> binds(ren.size());
  for (auto& [c, k] : ren) binds[static_cast<size_t>(k)] = mk_addr(c);
  memo_->keys.emplace(key, MemoKey{kh, roots[0], roots[1]});
  Ex body = subst(arg, fn->x, fn->kids[0]);
  Ex rt = mk_rt(kh, roots[0], roots[1], body, std::make_shared<const std::string>(std::move(key)), std::move(binds));
  out.push_back({{plug(f.ctx, rt), h}, rule});
}

void Summarizer::ret(const Focus& f, const HeapP& h, std::vector<Succ>& out) {
  const Ex& rt = f.redex;
  const Ex& v = rt->kids[2];
  const std::string& k = *rt->key;
  MemoResult res = to_key(*h, binds_of(rt), v);
  std::string enc;
  encode(enc, *res.h);
  encode(enc, res.v);
  out.push_back({{plug(f.ctx, v), h}, Rule::RtReturn});
  if (!memo_->seen[k].insert(enc).second) return;
  for (auto& r : memo_->results[k])
    if (subsumes(*res.h, res.v, *r.h, r.v, &st_.prover())) return;
  memo_->results[k].push_back(res);
  auto it = memo_->waiting.find(k);
  if (it == memo_->waiting.end()) return;
  for (auto& w : it->second)
    if (auto s = resume(w, res)) out.push_back({std::move(*s), Rule::RtResume});
}

std::optional<State> Summarizer::resume(const Waiting& w, const MemoResult& r) {
  std::map<int64_t, Ex> fixed = w.f;
  auto [h1, va] = import_value(w.h, *r.h, r.v, fixed);
  std::vector<Ex> prior;
  for (auto& [lo, cur] : w.f) {
    if (cur->k != K::Addr || !r.h->has(lo)) continue;
    auto [h2, imp] = import_value(h1, *r.h, r.h->at(lo), fixed);
    auto merged = merge(*h2, cur->n, imp);
    if (!merged) return std::nullopt;
    h1 = heap_set(h2, cur->n, *merged);
    prior.push_back(cur);
    prior.push_back(imp);
  }
  Ex inner = plug(w.ctx, w.rt + 1, w.ctx.size(), va);
  Ex e = plug(w.ctx, 0, w.rt + 1, mk_blur(va, inner, std::move(prior)));
  return State{e, h1};
}

void Summarizer::blur(const Focus& f, const HeapP& h, std::vector<Succ>& out) {
  const Ex& b = f.redex;
  const Ex& v = b->kids[1];
  auto [h1, w] = settle(h, widen_step(b->kids[0], v, *h));
  for (size_t i = 2; i + 1 < b->kids.size(); i += 2) {
    const Ex& a = b->kids[i];
    if (a->k != K::Addr || !h1->has(a->n)) continue;
    Ex wa = widen(b->kids[i + 1], a, *h1);
    if (wa->k == K::Val && (wa->p == P::Opaque || wa->p == P::Rec)) h1 = heap_set(h1, a->n, wa);
  }
  out.push_back({{plug(f.ctx, w), h1}, Rule::Blur});
}

}  // namespace scv
