#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scv {

// Interned identifier: variables, module names and blame labels.
using Sym = int32_t;

Sym intern(std::string_view s);
const std::string& name(Sym s);

Sym top_label();    // the top-level expression
Sym lang_label();   // the language itself
Sym havoc_label();  // the demonic context module

enum class Op : uint8_t {
  Add1, Add, Sub, Mul,
  Eq, Gt, Lt, Ge, Le,
  Cons, Car, Cdr,
  IntP, FalseP, ConsP, EmptyP, ProcP, DepP,
  EvenP, OddP,
};

const char* op_name(Op o);
std::optional<Op> op_from_name(std::string_view s);
int op_arity(Op o);
bool is_pred(Op o);
bool is_parity(Op o);  // even? or odd?: integer predicates, not type tags
bool is_arith(Op o);
bool is_cmp(Op o);

// Expression kinds. Val carries a pre-value and its refinement set.
enum class K : uint8_t { Addr, Val, Var, App, Prim, If, DepCon, Mon, Blame, Assume, Rt, Blur };
// Pre-value kinds.
enum class P : uint8_t { Lam, True, False, Int, Empty, Cons, Dep, Opaque, Rec, RecRef, Neg };

struct Node;
using Ex = std::shared_ptr<const Node>;
struct Heap;
using HeapP = std::shared_ptr<const Heap>;

struct Node {
  K k = K::Val;
  P p = P::Opaque;
  Op op = Op::Add1;
  Sym x = -1;
  Sym l1 = -1, l2 = -1, l3 = -1;
  int64_t n = 0;
  std::vector<Ex> kids;
  std::vector<Ex> refs;
  // Rt: key heap, in its own address space.
  HeapP heap;
  std::shared_ptr<const std::string> key;

  size_t hash = 0;
  std::vector<Sym> fv;
  bool has_addr = false;
};

// Constructors. Every node is hash-consed only by value (no sharing table).
Ex mk_addr(int64_t l);
Ex mk_val(P p, std::vector<Ex> kids = {}, std::vector<Ex> refs = {}, int64_t n = 0, Sym x = -1, Op op = Op::Add1);
Ex mk_int(int64_t n);
Ex mk_true();
Ex mk_false();
Ex mk_bool(bool b);
Ex mk_empty();
Ex mk_opaque(std::vector<Ex> refs = {});
Ex mk_lam(Sym x, Ex body);
Ex mk_cons(Ex a, Ex b);
Ex mk_depval(Ex dom, Sym x, Ex range);
Ex mk_rec(Sym x, std::vector<Ex> members);
Ex mk_recref(Sym x);
Ex mk_neg(Op o);
Ex mk_var(Sym x, Sym l);
Ex mk_app(Ex f, Ex a, Sym l);
Ex mk_prim(Op o, std::vector<Ex> args, Sym l);
Ex mk_if(Ex c, Ex t, Ex e);
Ex mk_depcon(Ex dom, Sym x, Ex range);
Ex mk_mon(Ex c, Sym pos, Sym neg, Sym src, Ex e);
Ex mk_blame(Sym pos, Sym src);
Ex mk_assume(Ex v, Ex c);
// Rt: fn and arg live in the key heap's address space; binds[i] is the current
// address standing for key address i.
Ex mk_rt(HeapP key_heap, Ex fn, Ex arg, Ex body, std::shared_ptr<const std::string> key, std::vector<Ex> binds);
// Blur: prior value, body, then (address, prior pre-value) pairs for the heap.
Ex mk_blur(Ex val, Ex body, std::vector<Ex> prior);

// Copy of a Val node with a different refinement set.
Ex with_refs(const Ex& v, std::vector<Ex> refs);
// Copy of a node with replaced children.
Ex with_kids(const Ex& e, std::vector<Ex> kids);

// Predicate contract λx.(o? x).
Ex mk_pred(Op o);
// Comparison refinement λx.(⋈ x b) and its negation-free complement.
Ex mk_cmp_contract(Op cmp, Ex rhs);
// Disequality refinement λx.(false? (= x b)).
Ex mk_neq_contract(Ex rhs);
// Exact arithmetic refinement λx.(= x (⊙ a b)).
Ex mk_arith_contract(Op arith, Ex a, Ex b);

bool is_value(const Ex& e);  // Addr, or Val other than Opaque/Rec
bool is_addr(const Ex& e);
bool is_int(const Ex& e);
bool is_false(const Ex& e);

// Recognised contract shapes.
std::optional<Op> pred_of(const Ex& c);          // λx.(o? x)
std::optional<bool> const_of(const Ex& c);       // λx.b, b a value: true unless b is false
struct CmpShape { Op cmp; Ex rhs; bool neq; };  // λx.(⋈ x b) or λx.(false? (= x b))
std::optional<CmpShape> cmp_of(const Ex& c);
struct ArithShape { Op arith; Ex a; Ex b; };     // λx.(= x (⊙ a b))
std::optional<ArithShape> arith_of(const Ex& c);
// and/c and or/c shapes: the flat contracts tested on the parameter, in order.
struct JunctionShape { bool conj; std::vector<Ex> parts; };
std::optional<JunctionShape> junction_of(const Ex& c);

// Structural order, equality and hash.
int compare(const Ex& a, const Ex& b);
inline bool equal(const Ex& a, const Ex& b) { return a == b || compare(a, b) == 0; }
struct ExLess {
  bool operator()(const Ex& a, const Ex& b) const { return compare(a, b) < 0; }
};

// Sorted, duplicate-free refinement set.
std::vector<Ex> normalize_refs(std::vector<Ex> refs);
bool refs_contain(const std::vector<Ex>& refs, const Ex& c);

// Capture-avoiding substitution of closed value v for x in e.
Ex subst(const Ex& v, Sym x, const Ex& e);
// Replace RecRef(x) by r.
Ex subst_recref(const Ex& r, Sym x, const Ex& e);
// Replace every address by the result of f (nullptr keeps it).
template <class F> Ex map_addrs(const Ex& e, F&& f);

// Addresses mentioned by e (ignoring the Rt key space).
void collect_addrs(const Ex& e, std::vector<int64_t>& out);

std::string show(const Ex& e);

struct Module {
  Sym name = -1;
  Ex contract;
  Ex body;  // nullptr marks an opaque module
  bool opaque() const { return body == nullptr; }
};

struct Program {
  std::vector<Module> modules;
  Ex top;
  const Module* find(Sym s) const {
    for (auto& m : modules)
      if (m.name == s) return &m;
    return nullptr;
  }
};

std::string show(const Program& p);

// ---- template definitions ----

Ex rebuild(const Ex& e, std::vector<Ex> kids, std::vector<Ex> refs);

template <class F>
Ex map_addrs(const Ex& e, F&& f) {
  if (!e->has_addr) return e;
  if (e->k == K::Addr) {
    Ex r = f(e->n);
    return r ? r : e;
  }
  bool changed = false;
  std::vector<Ex> kids;
  kids.reserve(e->kids.size());
  size_t i = 0;
  for (auto& k : e->kids) {
    // Rt keeps its function and argument in the key address space.
    bool keyspace = (e->k == K::Rt && i < 2);
    Ex nk = keyspace ? k : map_addrs(k, f);
    changed |= nk != k;
    kids.push_back(std::move(nk));
    ++i;
  }
  std::vector<Ex> refs;
  refs.reserve(e->refs.size());
  for (auto& r : e->refs) {
    Ex nr = map_addrs(r, f);
    changed |= nr != r;
    refs.push_back(std::move(nr));
  }
  if (!changed) return e;
  return rebuild(e, std::move(kids), std::move(refs));
}

}  // namespace scv
