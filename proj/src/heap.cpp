#include "scv/heap.hpp"

#include <deque>
#include <set>
#include <sstream>

#include "scv/proof.hpp"

namespace scv {

HeapP empty_heap() {
  static HeapP h = std::make_shared<const Heap>();
  return h;
}

HeapP heap_set(const HeapP& h, int64_t l, Ex u) {
  auto n = std::make_shared<Heap>(*h);
  n->m[l] = std::move(u);
  return n;
}

std::pair<HeapP, int64_t> alloc(const HeapP& h, Ex u) {
  int64_t l = h->fresh();
  return {heap_set(h, l, std::move(u)), l};
}

const Ex& deref(const Heap& h, const Ex& v) {
  if (v->k == K::Addr && h.has(v->n)) return h.at(v->n);
  return v;
}

std::pair<HeapP, Ex> settle(const HeapP& h, const Ex& v) {
  if (v->k != K::Val) return {h, v};
  if (v->p == P::Rec || v->p == P::Opaque) {
    auto [h2, l] = alloc(h, v);
    return {h2, mk_addr(l)};
  }
  if (v->p == P::Cons) {
    auto [h1, a] = settle(h, v->kids[0]);
    auto [h2, b] = settle(h1, v->kids[1]);
    if (a == v->kids[0] && b == v->kids[1]) return {h2, v};
    return {h2, with_kids(v, {a, b})};
  }
  return {h, v};
}

std::pair<HeapP, Ex> unroll(const HeapP& h, const Ex& rec, const Ex& member) {
  auto [h1, l] = alloc(h, with_refs(rec, {}));
  Ex m = subst_recref(mk_addr(l), rec->x, member);
  return settle(h1, m);
}

namespace {

std::pair<HeapP, Ex> refine_pre(const HeapP& h, const Ex& u, const Ex& c) {
  auto o = pred_of(c);
  if (u->p == P::Opaque && o && *o == Op::ConsP) {
    auto [h1, l1] = alloc(h, mk_opaque());
    auto [h2, l2] = alloc(h1, mk_opaque());
    return {h2, mk_val(P::Cons, {mk_addr(l1), mk_addr(l2)}, u->refs)};
  }
  if (u->p == P::Opaque && o && *o == Op::DepP) {
    auto [h1, l] = alloc(h, mk_opaque());
    static Sym y = intern("y");
    return {h1, mk_val(P::Dep, {mk_addr(l), mk_opaque()}, u->refs, 0, y)};
  }
  if (u->p == P::Rec) {
    std::vector<Ex> keep;
    for (auto& m : u->kids) {
      Ex probe = subst_recref(mk_opaque(), u->x, m);
      if (check(*h, probe, c) != Res::Refuted) keep.push_back(m);
    }
    if (keep.size() == 1) {
      auto [h1, m] = unroll(h, u, keep[0]);
      const Ex& mu = deref(*h1, m);
      if (m->k == K::Addr) {
        // The member was itself an address: merge refinements there.
        std::vector<Ex> refs = mu->refs;
        refs.insert(refs.end(), u->refs.begin(), u->refs.end());
        refs.push_back(c);
        return {h1, with_refs(mu, std::move(refs))};
      }
      std::vector<Ex> refs = m->refs;
      refs.insert(refs.end(), u->refs.begin(), u->refs.end());
      auto [h2, r] = refine_pre(h1, with_refs(m, std::move(refs)), c);
      return {h2, r};
    }
    if (!keep.empty() && keep.size() < u->kids.size()) {
      std::vector<Ex> refs = u->refs;
      refs.push_back(c);
      return {h, mk_val(P::Rec, keep, std::move(refs), 0, u->x)};
    }
  }
  std::vector<Ex> refs = u->refs;
  refs.push_back(c);
  return {h, with_refs(u, std::move(refs))};
}

}  // namespace

std::pair<HeapP, Ex> refine(const HeapP& h, const Ex& v, const Ex& c) {
  if (v->k == K::Addr) {
    auto [h1, u] = refine_pre(h, h->at(v->n), c);
    return {heap_set(h1, v->n, u), v};
  }
  return refine_pre(h, v, c);
}

std::vector<int64_t> reachable(const Heap& h, const std::vector<Ex>& roots) {
  std::vector<int64_t> order;
  std::set<int64_t> seen;
  std::deque<int64_t> work;
  auto visit = [&](const Ex& e) {
    std::vector<int64_t> as;
    collect_addrs(e, as);
    for (auto a : as)
      if (seen.insert(a).second) {
        order.push_back(a);
        work.push_back(a);
      }
  };
  for (auto& r : roots) visit(r);
  while (!work.empty()) {
    int64_t a = work.front();
    work.pop_front();
    if (h.has(a)) visit(h.at(a));
  }
  return order;
}

Ex rename(const Ex& e, const std::map<int64_t, int64_t>& r) {
  return map_addrs(e, [&](int64_t l) -> Ex {
    auto it = r.find(l);
    return it == r.end() ? nullptr : mk_addr(it->second);
  });
}

std::pair<HeapP, std::vector<Ex>> restrict_canonical(const Heap& h, const std::vector<Ex>& roots,
                                                     std::map<int64_t, int64_t>* renaming) {
  auto order = reachable(h, roots);
  std::map<int64_t, int64_t> r;
  for (size_t i = 0; i < order.size(); ++i) r[order[i]] = static_cast<int64_t>(i);
  auto out = std::make_shared<Heap>();
  for (auto a : order)
    if (h.has(a)) out->m[r[a]] = rename(h.at(a), r);
  std::vector<Ex> rs;
  for (auto& x : roots) rs.push_back(rename(x, r));
  if (renaming) *renaming = std::move(r);
  return {out, rs};
}

State canonicalize(const State& s, std::map<int64_t, int64_t>* renaming) {
  if (s.blamed()) return {s.e, empty_heap()};
  auto [h, rs] = restrict_canonical(*s.h, {s.e}, renaming);
  return {rs[0], h};
}

namespace {

void put_int(std::string& out, int64_t v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

}  // namespace

void encode(std::string& out, const Ex& e) {
  out.push_back(static_cast<char>(e->k));
  switch (e->k) {
    case K::Addr: put_int(out, e->n); return;
    case K::Val:
      out.push_back(static_cast<char>(e->p));
      if (e->p == P::Int) put_int(out, e->n);
      if (e->p == P::Neg) out.push_back(static_cast<char>(e->op));
      if (e->p == P::Lam || e->p == P::Dep || e->p == P::Rec || e->p == P::RecRef) put_int(out, e->x);
      break;
    case K::Var: put_int(out, e->x); put_int(out, e->l1); break;
    case K::App: put_int(out, e->l1); break;
    case K::Prim: out.push_back(static_cast<char>(e->op)); put_int(out, e->l1); break;
    case K::DepCon: put_int(out, e->x); break;
    case K::Mon: put_int(out, e->l1); put_int(out, e->l2); put_int(out, e->l3); break;
    case K::Blame: put_int(out, e->l1); put_int(out, e->l2); return;
    case K::Rt: out += *e->key; out.push_back('\0'); break;
    default: break;
  }
  put_int(out, static_cast<int64_t>(e->kids.size()));
  for (size_t i = 0; i < e->kids.size(); ++i) {
    if (e->k == K::Rt && i < 2) continue;  // already part of the key
    encode(out, e->kids[i]);
  }
  put_int(out, static_cast<int64_t>(e->refs.size()));
  for (auto& r : e->refs) encode(out, r);
}

void encode(std::string& out, const Heap& h) {
  put_int(out, static_cast<int64_t>(h.m.size()));
  for (auto& [l, u] : h.m) {
    put_int(out, l);
    encode(out, u);
  }
}

std::string encode_state(const State& s) {
  std::string out;
  encode(out, s.e);
  if (!s.blamed()) encode(out, *s.h);
  return out;
}

std::string show(const Heap& h) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (auto& [l, u] : h.m) {
    if (!first) os << ", ";
    first = false;
    os << 'L' << l << " -> " << show(u);
  }
  os << '}';
  return os.str();
}

std::string show(const State& s) {
  if (s.blamed()) return show(s.e);
  return show(s.e) + "  " + show(*s.h);
}

std::pair<HeapP, Ex> import_value(const HeapP& into, const Heap& from, const Ex& v,
                                  std::map<int64_t, Ex>& fixed) {
  auto order = reachable(from, {v});
  auto out = std::make_shared<Heap>(*into);
  std::map<int64_t, Ex> sub = fixed;
  int64_t next = out->fresh();
  std::vector<int64_t> copied;
  for (auto a : order) {
    if (sub.count(a)) continue;
    sub[a] = mk_addr(next);
    fixed[a] = sub[a];
    copied.push_back(a);
    ++next;
  }
  auto tr = [&](const Ex& e) {
    return map_addrs(e, [&](int64_t l) -> Ex {
      auto it = sub.find(l);
      return it == sub.end() ? nullptr : it->second;
    });
  };
  for (auto a : copied) out->m[sub[a]->n] = from.has(a) ? tr(from.at(a)) : mk_opaque();
  return {out, tr(v)};
}

}  // namespace scv
