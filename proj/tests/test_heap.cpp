#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "util.hpp"

using namespace scv;
using namespace scv::test;

TEST(Heap, AllocOnEmptyHeap) {
  auto [h, l] = alloc(empty_heap(), mk_opaque());
  EXPECT_EQ(l, 0);
  EXPECT_EQ(h->m.size(), 1u);
  EXPECT_TRUE(equal(h->at(0), mk_opaque()));
}

TEST(Heap, AllocIsFresh) {
  auto [h0, l0] = alloc(empty_heap(), mk_opaque());
  auto [h1, l1] = alloc(h0, mk_opaque({mk_pred(Op::IntP)}));
  EXPECT_EQ(l1, 1);
  EXPECT_NE(l0, l1);
  EXPECT_EQ(h1->m.size(), 2u);
  EXPECT_EQ(h0->m.size(), 1u);
}

TEST(Heap, RefineOpaqueByConsSplitsIntoPair) {
  HeapP h = heap_of({{0, mk_opaque()}});
  auto [h2, v] = refine(h, mk_addr(0), mk_pred(Op::ConsP));
  EXPECT_TRUE(equal(v, mk_addr(0)));
  const Ex& u = h2->at(0);
  ASSERT_EQ(u->p, P::Cons);
  ASSERT_TRUE(is_addr(u->kids[0]));
  ASSERT_TRUE(is_addr(u->kids[1]));
  EXPECT_NE(u->kids[0]->n, u->kids[1]->n);
  EXPECT_EQ(h2->at(u->kids[0]->n)->p, P::Opaque);
  EXPECT_EQ(h2->at(u->kids[1]->n)->p, P::Opaque);
  EXPECT_EQ(h2->m.size(), 3u);
}

TEST(Heap, RefineConcreteAddsContract) {
  HeapP h = empty_heap();
  auto [h2, v] = refine(h, mk_int(5), mk_pred(Op::IntP));
  EXPECT_EQ(h2, h);
  EXPECT_TRUE(equal(v, with_refs(mk_int(5), {mk_pred(Op::IntP)})));
}

TEST(Heap, RefineIsIdempotent) {
  Ex five = with_refs(mk_int(5), {mk_pred(Op::IntP)});
  auto [h2, v] = refine(empty_heap(), five, mk_pred(Op::IntP));
  EXPECT_TRUE(equal(v, five));
}

TEST(Heap, RefineByDepAllocatesFunction) {
  HeapP h = heap_of({{0, mk_opaque()}});
  auto [h2, v] = refine(h, mk_addr(0), mk_pred(Op::DepP));
  EXPECT_EQ(h2->at(0)->p, P::Dep);
}

TEST(Heap, CanonicalizeCollectsAndRenames) {
  HeapP h = heap_of({{5, mk_opaque()}, {9, mk_int(7)}});
  State c = canonicalize(State{mk_addr(5), h});
  EXPECT_TRUE(equal(c.e, mk_addr(0)));
  ASSERT_EQ(c.h->m.size(), 1u);
  EXPECT_TRUE(equal(c.h->at(0), mk_opaque()));
}

TEST(Heap, CanonicalizeDropsUnreachable) {
  HeapP h = heap_of({{0, mk_opaque()}});
  State c = canonicalize(State{mk_int(5), h});
  EXPECT_TRUE(c.h->m.empty());
}

namespace {

// A random heap of n entries whose values mention only addresses below n.
HeapP random_heap(std::mt19937_64& rng, int n) {
  HeapP h = empty_heap();
  auto pick = [&](int k) { return static_cast<int>(rng() % static_cast<uint64_t>(k)); };
  for (int l = 0; l < n; ++l) {
    Ex u;
    switch (pick(4)) {
      case 0: u = mk_opaque({mk_pred(Op::IntP)}); break;
      case 1: u = mk_int(pick(9) - 4); break;
      case 2: u = n > 1 ? mk_cons(mk_addr(pick(n)), mk_addr(pick(n))) : mk_empty(); break;
      default: u = mk_opaque({mk_pred(Op::IntP), mk_cmp_contract(Op::Gt, mk_addr(pick(n)))}); break;
    }
    h = heap_set(h, l, u);
  }
  return h;
}

}  // namespace

TEST(Heap, CanonicalizeIsInvariantUnderRenaming) {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 300; ++round) {
    int n = 1 + static_cast<int>(rng() % 6);
    HeapP h = random_heap(rng, n);
    Ex root = mk_cons(mk_addr(static_cast<int64_t>(rng() % n)), mk_addr(static_cast<int64_t>(rng() % n)));
    std::vector<int64_t> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), 100);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::map<int64_t, int64_t> r;
    for (int l = 0; l < n; ++l) r[l] = perm[static_cast<size_t>(l)];
    HeapP h2 = empty_heap();
    for (auto& [l, u] : h->m) h2 = heap_set(h2, r[l], rename(u, r));
    // Unreachable junk must not matter either.
    h2 = heap_set(h2, 999, mk_int(42));
    State a = canonicalize(State{root, h});
    State b = canonicalize(State{rename(root, r), h2});
    EXPECT_EQ(encode_state(a), encode_state(b)) << show(State{root, h});
  }
}

TEST(Heap, RefineNeverDropsContracts) {
  std::mt19937_64 rng(11);
  std::vector<Ex> cs = {mk_pred(Op::IntP), mk_cmp_contract(Op::Gt, mk_int(0)), mk_pred(Op::EvenP),
                        mk_cmp_contract(Op::Le, mk_int(3))};
  for (int round = 0; round < 200; ++round) {
    HeapP h = heap_of({{0, mk_opaque()}});
    std::vector<Ex> applied;
    for (int k = 0; k < 3; ++k) {
      Ex c = cs[rng() % cs.size()];
      h = refine(h, mk_addr(0), c).first;
      applied.push_back(c);
      for (auto& a : applied) EXPECT_TRUE(refs_contain(h->at(0)->refs, a));
      EXPECT_EQ(h->at(0)->p, P::Opaque);
    }
  }
}
