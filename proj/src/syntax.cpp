#include "scv/syntax.hpp"

#include <algorithm>
#include <functional>
#include <mutex>
#include <sstream>
#include <unordered_map>

namespace scv {

namespace {

struct SymTable {
  std::mutex mu;
  std::unordered_map<std::string, Sym> ids;
  std::vector<std::unique_ptr<std::string>> names;
};

SymTable& syms() {
  static SymTable t;
  return t;
}

size_t mix(size_t h, size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }

void merge_fv(std::vector<Sym>& out, const std::vector<Sym>& in, Sym bound = -1) {
  for (Sym s : in)
    if (s != bound) out.push_back(s);
}

void finish_fv(std::vector<Sym>& fv) {
  std::sort(fv.begin(), fv.end());
  fv.erase(std::unique(fv.begin(), fv.end()), fv.end());
}

// Fill in cached hash, free variables and address flag.
Ex seal(Node&& nd) {
  size_t h = mix(static_cast<size_t>(nd.k), static_cast<size_t>(nd.p));
  h = mix(h, static_cast<size_t>(nd.op));
  h = mix(h, static_cast<size_t>(nd.x));
  h = mix(h, static_cast<size_t>(nd.l1));
  h = mix(h, static_cast<size_t>(nd.l2));
  h = mix(h, static_cast<size_t>(nd.l3));
  h = mix(h, static_cast<size_t>(nd.n));
  std::vector<Sym> fv;
  bool addr = nd.k == K::Addr;
  for (size_t i = 0; i < nd.kids.size(); ++i) {
    const Ex& k = nd.kids[i];
    h = mix(h, k->hash);
    bool keyspace = (nd.k == K::Rt && i < 2);
    if (!keyspace) addr |= k->has_addr;
    Sym bound = -1;
    if (nd.k == K::Val && nd.p == P::Lam) bound = nd.x;
    if ((nd.k == K::DepCon || (nd.k == K::Val && nd.p == P::Dep)) && i == 1) bound = nd.x;
    merge_fv(fv, k->fv, bound);
  }
  for (auto& r : nd.refs) {
    h = mix(h, r->hash);
    addr |= r->has_addr;
    merge_fv(fv, r->fv);
  }
  if (nd.k == K::Var) fv.push_back(nd.x);
  finish_fv(fv);
  nd.hash = h;
  nd.fv = std::move(fv);
  nd.has_addr = addr;
  return std::make_shared<const Node>(std::move(nd));
}

Sym lam_var() {
  static Sym s = intern("x");
  return s;
}

}  // namespace

Sym intern(std::string_view s) {
  auto& t = syms();
  std::lock_guard<std::mutex> g(t.mu);
  auto it = t.ids.find(std::string(s));
  if (it != t.ids.end()) return it->second;
  Sym id = static_cast<Sym>(t.names.size());
  t.names.push_back(std::make_unique<std::string>(s));
  t.ids.emplace(std::string(s), id);
  return id;
}

const std::string& name(Sym s) {
  static const std::string none = "_";
  if (s < 0) return none;
  auto& t = syms();
  std::lock_guard<std::mutex> g(t.mu);
  return *t.names.at(static_cast<size_t>(s));
}

Sym top_label() {
  static Sym s = intern("†");
  return s;
}
Sym lang_label() {
  static Sym s = intern("Λ");
  return s;
}
Sym havoc_label() {
  static Sym s = intern("havoc");
  return s;
}

static const struct {
  Op op;
  const char* name;
  int arity;
} kOps[] = {
    {Op::Add1, "add1", 1},    {Op::Add, "+", 2},       {Op::Sub, "-", 2},       {Op::Mul, "*", 2},
    {Op::Eq, "=", 2},         {Op::Gt, ">", 2},        {Op::Lt, "<", 2},        {Op::Ge, ">=", 2},
    {Op::Le, "<=", 2},        {Op::Cons, "cons", 2},   {Op::Car, "car", 1},     {Op::Cdr, "cdr", 1},
    {Op::IntP, "int?", 1},    {Op::FalseP, "false?", 1}, {Op::ConsP, "cons?", 1}, {Op::EmptyP, "empty?", 1},
    {Op::ProcP, "proc?", 1},  {Op::DepP, "dep?", 1},    {Op::EvenP, "even?", 1}, {Op::OddP, "odd?", 1},
};

const char* op_name(Op o) { return kOps[static_cast<int>(o)].name; }
int op_arity(Op o) { return kOps[static_cast<int>(o)].arity; }

std::optional<Op> op_from_name(std::string_view s) {
  for (auto& e : kOps)
    if (s == e.name) return e.op;
  if (s == "num?") return Op::IntP;
  return std::nullopt;
}

bool is_pred(Op o) { return o >= Op::IntP; }
bool is_parity(Op o) { return o == Op::EvenP || o == Op::OddP; }
bool is_arith(Op o) { return o <= Op::Mul; }
bool is_cmp(Op o) { return o >= Op::Eq && o <= Op::Le; }

Ex mk_addr(int64_t l) {
  Node nd;
  nd.k = K::Addr;
  nd.n = l;
  return seal(std::move(nd));
}

Ex mk_val(P p, std::vector<Ex> kids, std::vector<Ex> refs, int64_t n, Sym x, Op op) {
  Node nd;
  nd.k = K::Val;
  nd.p = p;
  nd.kids = std::move(kids);
  nd.refs = normalize_refs(std::move(refs));
  nd.n = n;
  nd.x = x;
  nd.op = op;
  return seal(std::move(nd));
}

Ex mk_int(int64_t n) { return mk_val(P::Int, {}, {}, n); }
Ex mk_true() {
  static Ex t = mk_val(P::True);
  return t;
}
Ex mk_false() {
  static Ex f = mk_val(P::False);
  return f;
}
Ex mk_bool(bool b) { return b ? mk_true() : mk_false(); }
Ex mk_empty() {
  static Ex e = mk_val(P::Empty);
  return e;
}
Ex mk_opaque(std::vector<Ex> refs) { return mk_val(P::Opaque, {}, std::move(refs)); }
Ex mk_lam(Sym x, Ex body) { return mk_val(P::Lam, {std::move(body)}, {}, 0, x); }
Ex mk_cons(Ex a, Ex b) { return mk_val(P::Cons, {std::move(a), std::move(b)}); }
Ex mk_depval(Ex dom, Sym x, Ex range) { return mk_val(P::Dep, {std::move(dom), std::move(range)}, {}, 0, x); }
Ex mk_rec(Sym x, std::vector<Ex> members) {
  std::sort(members.begin(), members.end(), ExLess{});
  members.erase(std::unique(members.begin(), members.end(), [](const Ex& a, const Ex& b) { return equal(a, b); }),
                members.end());
  return mk_val(P::Rec, std::move(members), {}, 0, x);
}
Ex mk_recref(Sym x) { return mk_val(P::RecRef, {}, {}, 0, x); }
Ex mk_neg(Op o) { return mk_val(P::Neg, {}, {}, 0, -1, o); }

Ex mk_var(Sym x, Sym l) {
  Node nd;
  nd.k = K::Var;
  nd.x = x;
  nd.l1 = l;
  return seal(std::move(nd));
}

Ex mk_app(Ex f, Ex a, Sym l) {
  Node nd;
  nd.k = K::App;
  nd.kids = {std::move(f), std::move(a)};
  nd.l1 = l;
  return seal(std::move(nd));
}

Ex mk_prim(Op o, std::vector<Ex> args, Sym l) {
  Node nd;
  nd.k = K::Prim;
  nd.op = o;
  nd.kids = std::move(args);
  nd.l1 = l;
  return seal(std::move(nd));
}

Ex mk_if(Ex c, Ex t, Ex e) {
  Node nd;
  nd.k = K::If;
  nd.kids = {std::move(c), std::move(t), std::move(e)};
  return seal(std::move(nd));
}

Ex mk_depcon(Ex dom, Sym x, Ex range) {
  Node nd;
  nd.k = K::DepCon;
  nd.x = x;
  nd.kids = {std::move(dom), std::move(range)};
  return seal(std::move(nd));
}

Ex mk_mon(Ex c, Sym pos, Sym neg, Sym src, Ex e) {
  Node nd;
  nd.k = K::Mon;
  nd.kids = {std::move(c), std::move(e)};
  nd.l1 = pos;
  nd.l2 = neg;
  nd.l3 = src;
  return seal(std::move(nd));
}

Ex mk_blame(Sym pos, Sym src) {
  Node nd;
  nd.k = K::Blame;
  nd.l1 = pos;
  nd.l2 = src;
  return seal(std::move(nd));
}

Ex mk_assume(Ex v, Ex c) {
  Node nd;
  nd.k = K::Assume;
  nd.kids = {std::move(v), std::move(c)};
  return seal(std::move(nd));
}

Ex mk_rt(HeapP key_heap, Ex fn, Ex arg, Ex body, std::shared_ptr<const std::string> key, std::vector<Ex> binds) {
  Node nd;
  nd.k = K::Rt;
  nd.kids = {std::move(fn), std::move(arg), std::move(body)};
  for (auto& b : binds) nd.kids.push_back(std::move(b));
  nd.heap = std::move(key_heap);
  nd.key = std::move(key);
  if (nd.key) nd.n = static_cast<int64_t>(std::hash<std::string>{}(*nd.key));
  return seal(std::move(nd));
}

Ex mk_blur(Ex val, Ex body, std::vector<Ex> prior) {
  Node nd;
  nd.k = K::Blur;
  nd.kids = {std::move(val), std::move(body)};
  for (auto& p : prior) nd.kids.push_back(std::move(p));
  return seal(std::move(nd));
}

Ex rebuild(const Ex& e, std::vector<Ex> kids, std::vector<Ex> refs) {
  Node nd;
  nd.k = e->k;
  nd.p = e->p;
  nd.op = e->op;
  nd.x = e->x;
  nd.l1 = e->l1;
  nd.l2 = e->l2;
  nd.l3 = e->l3;
  nd.n = e->n;
  nd.kids = std::move(kids);
  nd.refs = e->k == K::Val ? normalize_refs(std::move(refs)) : std::move(refs);
  if (e->k == K::Val && e->p == P::Rec) {
    std::sort(nd.kids.begin(), nd.kids.end(), ExLess{});
    nd.kids.erase(std::unique(nd.kids.begin(), nd.kids.end(), [](const Ex& a, const Ex& b) { return equal(a, b); }),
                  nd.kids.end());
  }
  nd.heap = e->heap;
  nd.key = e->key;
  return seal(std::move(nd));
}

Ex with_refs(const Ex& v, std::vector<Ex> refs) { return rebuild(v, v->kids, std::move(refs)); }
Ex with_kids(const Ex& e, std::vector<Ex> kids) { return rebuild(e, std::move(kids), e->refs); }

Ex mk_pred(Op o) {
  static std::vector<Ex> cache = [] {
    std::vector<Ex> v(static_cast<size_t>(Op::OddP) + 1);
    for (int i = static_cast<int>(Op::IntP); i <= static_cast<int>(Op::OddP); ++i)
      v[i] = mk_lam(lam_var(), mk_prim(static_cast<Op>(i), {mk_var(lam_var(), lang_label())}, lang_label()));
    return v;
  }();
  return cache.at(static_cast<size_t>(o));
}

Ex mk_cmp_contract(Op cmp, Ex rhs) {
  return mk_lam(lam_var(), mk_prim(cmp, {mk_var(lam_var(), lang_label()), std::move(rhs)}, lang_label()));
}

Ex mk_neq_contract(Ex rhs) {
  return mk_lam(lam_var(),
                mk_prim(Op::FalseP,
                        {mk_prim(Op::Eq, {mk_var(lam_var(), lang_label()), std::move(rhs)}, lang_label())},
                        lang_label()));
}

Ex mk_arith_contract(Op arith, Ex a, Ex b) {
  return mk_lam(lam_var(), mk_prim(Op::Eq,
                                   {mk_var(lam_var(), lang_label()),
                                    mk_prim(arith, {std::move(a), std::move(b)}, lang_label())},
                                   lang_label()));
}

bool is_value(const Ex& e) {
  return e->k == K::Addr || (e->k == K::Val && e->p != P::Opaque && e->p != P::Rec);
}
bool is_addr(const Ex& e) { return e->k == K::Addr; }
bool is_int(const Ex& e) { return e->k == K::Val && e->p == P::Int; }
bool is_false(const Ex& e) { return e->k == K::Val && e->p == P::False; }

static bool is_param(const Ex& e, Sym x) { return e->k == K::Var && e->x == x; }

std::optional<Op> pred_of(const Ex& c) {
  if (c->k != K::Val || c->p != P::Lam) return std::nullopt;
  const Ex& b = c->kids[0];
  if (b->k == K::Prim && is_pred(b->op) && is_param(b->kids[0], c->x)) return b->op;
  return std::nullopt;
}

std::optional<bool> const_of(const Ex& c) {
  if (c->k != K::Val || c->p != P::Lam) return std::nullopt;
  const Ex& b = c->kids[0];
  if (b->k == K::Val && b->p != P::Opaque && b->p != P::Rec && b->fv.empty()) return !is_false(b);
  return std::nullopt;
}

static bool simple_operand(const Ex& e) { return e->k == K::Addr || is_int(e); }

std::optional<CmpShape> cmp_of(const Ex& c) {
  if (c->k != K::Val || c->p != P::Lam) return std::nullopt;
  const Ex& b = c->kids[0];
  if (b->k == K::Prim && is_cmp(b->op) && is_param(b->kids[0], c->x) && simple_operand(b->kids[1]))
    return CmpShape{b->op, b->kids[1], false};
  if (b->k == K::Prim && b->op == Op::FalseP) {
    const Ex& q = b->kids[0];
    if (q->k == K::Prim && q->op == Op::Eq && is_param(q->kids[0], c->x) && simple_operand(q->kids[1]))
      return CmpShape{Op::Eq, q->kids[1], true};
  }
  return std::nullopt;
}

std::optional<ArithShape> arith_of(const Ex& c) {
  if (c->k != K::Val || c->p != P::Lam) return std::nullopt;
  const Ex& b = c->kids[0];
  if (b->k != K::Prim || b->op != Op::Eq || !is_param(b->kids[0], c->x)) return std::nullopt;
  const Ex& r = b->kids[1];
  if (r->k == K::Prim && (r->op == Op::Add || r->op == Op::Sub || r->op == Op::Mul) &&
      simple_operand(r->kids[0]) && simple_operand(r->kids[1]))
    return ArithShape{r->op, r->kids[0], r->kids[1]};
  return std::nullopt;
}

namespace {

// A test (c x) on the parameter x, as the contract c.
std::optional<Ex> test_of(const Ex& t, Sym x) {
  if (t->k == K::Prim && is_pred(t->op) && is_param(t->kids[0], x)) return mk_pred(t->op);
  if (t->k == K::App && is_param(t->kids[1], x) && t->kids[0]->k == K::Val && t->kids[0]->p == P::Lam &&
      t->kids[0]->fv.empty())
    return t->kids[0];
  return std::nullopt;
}

bool conj_parts(const Ex& b, Sym x, std::vector<Ex>& out) {
  if (b->k == K::If && b->kids[2]->k == K::Val && b->kids[2]->p == P::False) {
    auto t = test_of(b->kids[0], x);
    if (!t) return false;
    out.push_back(*t);
    return conj_parts(b->kids[1], x, out);
  }
  auto t = test_of(b, x);
  if (t) out.push_back(*t);
  return t.has_value();
}

// ((λt. (if t t rest)) test)
bool disj_parts(const Ex& b, Sym x, std::vector<Ex>& out) {
  if (b->k == K::App && b->kids[0]->k == K::Val && b->kids[0]->p == P::Lam) {
    const Ex& lam = b->kids[0];
    const Ex& i = lam->kids[0];
    if (i->k == K::If && is_param(i->kids[0], lam->x) && is_param(i->kids[1], lam->x)) {
      auto t = test_of(b->kids[1], x);
      if (!t) return false;
      out.push_back(*t);
      return disj_parts(i->kids[2], x, out);
    }
  }
  auto t = test_of(b, x);
  if (t) out.push_back(*t);
  return t.has_value();
}

}  // namespace

std::optional<JunctionShape> junction_of(const Ex& c) {
  if (c->k != K::Val || c->p != P::Lam) return std::nullopt;
  const Ex& b = c->kids[0];
  JunctionShape j;
  if (b->k == K::If) {
    j.conj = true;
    if (conj_parts(b, c->x, j.parts) && j.parts.size() > 1) return j;
  } else if (b->k == K::App) {
    j.conj = false;
    if (disj_parts(b, c->x, j.parts) && j.parts.size() > 1) return j;
  }
  return std::nullopt;
}

int compare(const Ex& a, const Ex& b) {
  if (a == b) return 0;
  auto cmp3 = [](auto x, auto y) { return x < y ? -1 : (y < x ? 1 : 0); };
  if (int c = cmp3(a->k, b->k)) return c;
  if (int c = cmp3(a->p, b->p)) return c;
  if (int c = cmp3(a->op, b->op)) return c;
  if (int c = cmp3(a->n, b->n)) return c;
  if (int c = cmp3(a->x, b->x)) return c;
  if (int c = cmp3(a->l1, b->l1)) return c;
  if (int c = cmp3(a->l2, b->l2)) return c;
  if (int c = cmp3(a->l3, b->l3)) return c;
  if (int c = cmp3(a->kids.size(), b->kids.size())) return c;
  if (int c = cmp3(a->refs.size(), b->refs.size())) return c;
  for (size_t i = 0; i < a->kids.size(); ++i)
    if (int c = compare(a->kids[i], b->kids[i])) return c;
  for (size_t i = 0; i < a->refs.size(); ++i)
    if (int c = compare(a->refs[i], b->refs[i])) return c;
  // The key space of Rt is compared through the key string.
  if (a->k == K::Rt) {
    std::string ka = a->key ? *a->key : "", kb = b->key ? *b->key : "";
    if (int c = ka.compare(kb)) return c < 0 ? -1 : 1;
  }
  return 0;
}

std::vector<Ex> normalize_refs(std::vector<Ex> refs) {
  std::sort(refs.begin(), refs.end(), ExLess{});
  refs.erase(std::unique(refs.begin(), refs.end(), [](const Ex& a, const Ex& b) { return equal(a, b); }),
             refs.end());
  return refs;
}

bool refs_contain(const std::vector<Ex>& refs, const Ex& c) {
  return std::binary_search(refs.begin(), refs.end(), c, ExLess{});
}

Ex subst(const Ex& v, Sym x, const Ex& e) {
  if (!std::binary_search(e->fv.begin(), e->fv.end(), x)) return e;
  if (e->k == K::Var) return v;
  std::vector<Ex> kids;
  kids.reserve(e->kids.size());
  for (size_t i = 0; i < e->kids.size(); ++i) {
    bool binds = ((e->k == K::Val && e->p == P::Lam) && e->x == x) ||
                 ((e->k == K::DepCon || (e->k == K::Val && e->p == P::Dep)) && i == 1 && e->x == x);
    kids.push_back(binds ? e->kids[i] : subst(v, x, e->kids[i]));
  }
  std::vector<Ex> refs;
  for (auto& r : e->refs) refs.push_back(subst(v, x, r));
  return rebuild(e, std::move(kids), std::move(refs));
}

Ex subst_recref(const Ex& r, Sym x, const Ex& e) {
  if (e->k == K::Val && e->p == P::RecRef) return e->x == x ? r : e;
  if (e->k == K::Val && e->p == P::Rec && e->x == x) return e;
  if (e->kids.empty() && e->refs.empty()) return e;
  bool changed = false;
  std::vector<Ex> kids;
  for (auto& k : e->kids) {
    kids.push_back(subst_recref(r, x, k));
    changed |= kids.back() != k;
  }
  if (!changed) return e;
  return rebuild(e, std::move(kids), e->refs);
}

void collect_addrs(const Ex& e, std::vector<int64_t>& out) {
  if (!e->has_addr) return;
  if (e->k == K::Addr) {
    out.push_back(e->n);
    return;
  }
  for (size_t i = 0; i < e->kids.size(); ++i) {
    bool keyspace = (e->k == K::Rt && i < 2);
    if (!keyspace) collect_addrs(e->kids[i], out);
  }
  for (auto& r : e->refs) collect_addrs(r, out);
}

static void show_to(std::ostream& os, const Ex& e);

static void show_refs(std::ostream& os, const Ex& e) {
  if (e->refs.empty()) return;
  os << "/{";
  for (size_t i = 0; i < e->refs.size(); ++i) {
    if (i) os << ' ';
    show_to(os, e->refs[i]);
  }
  os << '}';
}

static void show_to(std::ostream& os, const Ex& e) {
  switch (e->k) {
    case K::Addr:
      os << 'L' << e->n;
      return;
    case K::Val:
      switch (e->p) {
        case P::Lam:
          if (e->kids[0]->l1 != lang_label()) {
            os << "(lambda (" << name(e->x) << ") ";
            show_to(os, e->kids[0]);
            os << ')';
          } else if (auto o = pred_of(e)) {
            os << op_name(*o);
          } else if (auto c = cmp_of(e)) {
            os << '(' << (c->neq ? "!=" : op_name(c->cmp)) << "/c ";
            show_to(os, c->rhs);
            os << ')';
          } else if (auto a = arith_of(e)) {
            os << "(=/c (" << op_name(a->arith) << ' ';
            show_to(os, a->a);
            os << ' ';
            show_to(os, a->b);
            os << "))";
          } else {
            os << "(lambda (" << name(e->x) << ") ";
            show_to(os, e->kids[0]);
            os << ')';
          }
          break;
        case P::True: os << "true"; break;
        case P::False: os << "false"; break;
        case P::Int: os << e->n; break;
        case P::Empty: os << "empty"; break;
        case P::Cons:
          os << "(cons ";
          show_to(os, e->kids[0]);
          os << ' ';
          show_to(os, e->kids[1]);
          os << ')';
          break;
        case P::Dep:
          os << "(->d ";
          show_to(os, e->kids[0]);
          os << " (lambda (" << name(e->x) << ") ";
          show_to(os, e->kids[1]);
          os << "))";
          break;
        case P::Opaque: os << "opaque"; break;
        case P::Rec:
          os << "(mu " << name(e->x);
          for (auto& m : e->kids) {
            os << ' ';
            show_to(os, m);
          }
          os << ')';
          break;
        case P::RecRef: os << '!' << name(e->x); break;
        case P::Neg: os << "(not/c " << op_name(e->op) << ')'; break;
      }
      show_refs(os, e);
      return;
    case K::Var: os << name(e->x); return;
    case K::App:
      os << '(';
      show_to(os, e->kids[0]);
      os << ' ';
      show_to(os, e->kids[1]);
      os << ')';
      return;
    case K::Prim:
      os << '(' << op_name(e->op);
      for (auto& a : e->kids) {
        os << ' ';
        show_to(os, a);
      }
      os << ')';
      return;
    case K::If:
      os << "(if ";
      show_to(os, e->kids[0]);
      os << ' ';
      show_to(os, e->kids[1]);
      os << ' ';
      show_to(os, e->kids[2]);
      os << ')';
      return;
    case K::DepCon:
      os << "(->d ";
      show_to(os, e->kids[0]);
      os << " (lambda (" << name(e->x) << ") ";
      show_to(os, e->kids[1]);
      os << "))";
      return;
    case K::Mon:
      os << "(mon " << name(e->l1) << ' ' << name(e->l2) << ' ' << name(e->l3) << ' ';
      show_to(os, e->kids[0]);
      os << ' ';
      show_to(os, e->kids[1]);
      os << ')';
      return;
    case K::Blame: os << "(blame " << name(e->l1) << ' ' << name(e->l2) << ')'; return;
    case K::Assume:
      os << "(assume ";
      show_to(os, e->kids[0]);
      os << ' ';
      show_to(os, e->kids[1]);
      os << ')';
      return;
    case K::Rt:
      os << "(rt ";
      show_to(os, e->kids[0]);
      os << ' ';
      show_to(os, e->kids[1]);
      os << ' ';
      show_to(os, e->kids[2]);
      os << ')';
      return;
    case K::Blur:
      os << "(blur ";
      show_to(os, e->kids[0]);
      os << ' ';
      show_to(os, e->kids[1]);
      os << ')';
      return;
  }
}

std::string show(const Ex& e) {
  std::ostringstream os;
  show_to(os, e);
  return os.str();
}

std::string show(const Program& p) {
  std::ostringstream os;
  for (auto& m : p.modules) {
    os << "(module " << name(m.name) << ' ' << show(m.contract) << ' ' << (m.body ? show(m.body) : "opaque")
       << ")\n";
  }
  os << "(top " << show(p.top) << ")\n";
  return os.str();
}

}  // namespace scv
