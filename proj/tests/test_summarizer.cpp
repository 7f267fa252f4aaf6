#include <gtest/gtest.h>

#include <random>
#include <set>

#include "scv/summarizer.hpp"
#include "oracles.hpp"

using namespace scv;
using namespace scv::test;

TEST(Widen, ListGrowsIntoRecursiveValue) {
  Ex w = widen(mk_empty(), mk_cons(mk_int(1), mk_empty()), Heap{});
  ASSERT_EQ(w->p, P::Rec);
  ASSERT_EQ(w->kids.size(), 2u);
  Ex self = mk_recref(w->x);
  std::set<std::string> members;
  for (auto& m : w->kids) members.insert(show(m));
  EXPECT_TRUE(members.count(show(mk_empty())));
  EXPECT_TRUE(members.count(show(mk_cons(mk_int(1), self))));
}

TEST(Widen, DistinctIntegersBecomeUnknownInteger) {
  Ex w = widen(mk_int(3), mk_int(7), Heap{});
  EXPECT_EQ(w->p, P::Opaque);
  EXPECT_TRUE(refs_contain(w->refs, mk_pred(Op::IntP)));
  EXPECT_EQ(w->refs.size(), 1u);
}

TEST(Widen, EqualValuesAreKept) {
  Ex v = mk_cons(mk_int(1), mk_empty());
  EXPECT_TRUE(equal(widen(v, v, Heap{}), v));
}

TEST(Subsumes, UnknownCoversConstant) {
  HeapP h0 = heap_of({{0, mk_opaque()}});
  auto f = subsumes(Heap{}, mk_int(1), *h0, mk_addr(0));
  ASSERT_TRUE(f);
  ASSERT_EQ(f->size(), 1u);
  EXPECT_TRUE(equal(f->at(0), mk_int(1)));
}

TEST(Subsumes, DistinctConstants) { EXPECT_FALSE(subsumes(Heap{}, mk_int(1), Heap{}, mk_int(2))); }

TEST(Subsumes, SharedAddressMustBeConsistent) {
  HeapP h0 = heap_of({{0, mk_opaque()}});
  EXPECT_FALSE(subsumes(Heap{}, mk_if(mk_false(), mk_int(1), mk_int(2)), *h0, mk_if(mk_addr(0), mk_addr(0), mk_addr(0))));
}

TEST(Subsumes, RefinementsMustBeMatched) {
  HeapP h0 = heap_of({{0, mk_opaque({mk_pred(Op::IntP)})}});
  HeapP h1 = heap_of({{0, mk_opaque()}});
  EXPECT_FALSE(subsumes(*h1, mk_addr(0), *h0, mk_addr(0)));
  EXPECT_TRUE(subsumes(*h0, mk_addr(0), *h1, mk_addr(0)));
}

TEST(SameCode, IgnoresEmbeddedValues) {
  EXPECT_TRUE(same_code(expr("(lambda (x) (+ x 1))"), expr("(lambda (x) (+ x 2))")));
  EXPECT_FALSE(same_code(expr("(lambda (x) (+ x 1))"), expr("(lambda (x) (- x 1))")));
}

TEST(Summarize, FactorialTableHoldsBaseAndAbstractResults) {
  EvalOptions eo = no_solver(50000);
  ReachResult r = eval(load("fact.scv"), eo);
  EXPECT_FALSE(r.exhausted);
  ASSERT_TRUE(r.memo);
  bool found = false;
  for (auto& [key, results] : r.memo->results) {
    bool one = false, abstract = false;
    for (auto& m : results) {
      const Ex& u = deref(*m.h, m.v);
      one |= u->p == P::Int && u->n == 1;
      abstract |= u->p == P::Opaque && refs_contain(u->refs, mk_pred(Op::IntP));
    }
    found |= one && abstract;
  }
  EXPECT_TRUE(found);
}

TEST(Summarize, ReverseTerminatesAndVerifies) {
  EvalOptions eo;
  eo.budget = 50000;
  Verification v = verify(load("reverse.scv"), eo);
  EXPECT_FALSE(v.rr.exhausted);
  auto* d = verdict_for(v, "main");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->kind, Verdict::Verified);
}

TEST(Summarize, ReverseWithoutSummarizationExhausts) {
  EvalOptions eo;
  eo.budget = 50000;
  eo.summarize = false;
  Verification v = verify(load("reverse.scv"), eo);
  EXPECT_TRUE(v.rr.exhausted);
  auto* d = verdict_for(v, "main");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->kind, Verdict::Unknown);
}

TEST(SummarizeProperties, ConservativeOnStraightLinePrograms) {
  SuiteResult r = conservativity(50, 8);
  EXPECT_EQ(r.cases, 50u);
  for (auto& f : r.failures) ADD_FAILURE() << f;
}
