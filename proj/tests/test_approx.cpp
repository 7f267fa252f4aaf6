#include <gtest/gtest.h>

#include <random>

#include "util.hpp"

using namespace scv;
using namespace scv::test;

TEST(Approximates, UnknownCoversConstant) {
  State s1{mk_int(1), empty_heap()};
  State s2{mk_addr(0), heap_of({{0, mk_opaque()}})};
  auto f = approximates(s1, s2, prog("(top 0)"));
  ASSERT_TRUE(f);
  EXPECT_TRUE(equal(f->at(0), mk_int(1)));
}

TEST(Approximates, SharedAddressCannotStandForDistinctValues) {
  State s1{mk_if(mk_false(), mk_int(1), mk_int(2)), empty_heap()};
  State s2{mk_if(mk_addr(0), mk_addr(0), mk_addr(0)), heap_of({{0, mk_opaque()}})};
  EXPECT_FALSE(approximates(s1, s2, prog("(top 0)")));
}

TEST(Approximates, SeparateAddressesEachTakeAValue) {
  State s1{mk_if(mk_false(), mk_int(1), mk_int(2)), empty_heap()};
  State s2{mk_if(mk_addr(1), mk_addr(2), mk_addr(3)), heap_of({{1, mk_opaque()}, {2, mk_opaque()}, {3, mk_opaque()}})};
  auto f = approximates(s1, s2, prog("(top 0)"));
  ASSERT_TRUE(f);
  EXPECT_TRUE(equal(f->at(1), mk_false()));
  EXPECT_TRUE(equal(f->at(2), mk_int(1)));
  EXPECT_TRUE(equal(f->at(3), mk_int(2)));
}

TEST(Approximates, RefinementsAreObligations) {
  State s1{mk_int(-1), empty_heap()};
  State pos{mk_addr(0), heap_of({{0, mk_opaque({mk_pred(Op::IntP), mk_cmp_contract(Op::Gt, mk_int(0))})}})};
  State neg{mk_addr(0), heap_of({{0, mk_opaque({mk_pred(Op::IntP), mk_cmp_contract(Op::Lt, mk_int(0))})}})};
  EXPECT_EQ(approx_search(s1, pos, prog("(top 0)")).kind, Approx::No);
  EXPECT_EQ(approx_search(s1, neg, prog("(top 0)")).kind, Approx::Yes);
}

TEST(Approximates, ArithmeticRefinementsAreSolved) {
  // L0 = L1 + 1 with L1 unknown covers 5 (L1 = 4).
  HeapP h = heap_of({{0, mk_opaque({mk_pred(Op::IntP), mk_arith_contract(Op::Add, mk_addr(1), mk_int(1))})},
                     {1, mk_opaque({mk_pred(Op::IntP)})}});
  auto f = approximates(State{mk_int(5), empty_heap()}, State{mk_addr(0), h}, prog("(top 0)"));
  ASSERT_TRUE(f);
  EXPECT_TRUE(equal(f->at(1), mk_int(4)));
}

TEST(Approximates, OpaqueBlameCoversAnything) {
  Program p = prog("(module g (-> int? int?) opaque) (top 0)");
  State s1{mk_int(3), empty_heap()};
  State s2{mk_blame(intern("g"), intern("g")), empty_heap()};
  EXPECT_TRUE(approximates(s1, s2, p));
  State s3{mk_blame(intern("f"), intern("f")), empty_heap()};
  EXPECT_FALSE(approximates(s1, s3, prog("(module f any 1) (top 0)")));
}

TEST(Concrete, Arithmetic) {
  ReachResult r = concrete_interpret(prog("(top (add1 4))"), 100);
  ASSERT_EQ(r.finals.size(), 1u);
  EXPECT_TRUE(equal(r.finals[0].e, mk_int(5)));
}

TEST(Concrete, CarOfEmptyBlamesCaller) {
  ReachResult r = concrete_interpret(prog("(top (car empty))"), 100);
  ASSERT_EQ(r.finals.size(), 1u);
  EXPECT_TRUE(equal(r.finals[0].e, mk_blame(top_label(), lang_label())));
}

TEST(Concrete, ContractsAreMonitored) {
  ReachResult r = concrete_interpret(load("bad-pos.scv"), 1000);
  EXPECT_TRUE(equal(r.finals.at(0).e, mk_blame(intern("f"), intern("f"))));
  ReachResult ok = concrete_interpret(load("e2o.scv"), 1000);
  EXPECT_TRUE(equal(ok.finals.at(0).e, mk_int(3)));
}

TEST(Concrete, FuelRunsOut) {
  ReachResult r = concrete_interpret(prog("(module f any (lambda (x) (f x))) (top (f 0))"), 500);
  EXPECT_TRUE(r.exhausted);
}

TEST(Concrete, RejectsUnknownValues) {
  EXPECT_THROW(concrete_interpret(prog("(module g int? opaque) (top g)"), 100), std::invalid_argument);
}

TEST(Generator, ProgramsAreClosedAndReproducible) {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 a(seed), b(seed);
    Program p = generate_program(a), q = generate_program(b);
    EXPECT_EQ(show(p), show(q));
    EXPECT_NO_THROW(parse_program(show(p)));
  }
}

TEST(Generator, AbstractionOnlyIntroducesUnknowns) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    Program p = generate_program(rng);
    Program a = abstract_program(p, rng);
    ASSERT_EQ(a.modules.size(), p.modules.size());
    for (size_t k = 0; k < p.modules.size(); ++k) {
      EXPECT_TRUE(equal(a.modules[k].contract, p.modules[k].contract));
      if (a.modules[k].body && p.modules[k].body)
        EXPECT_EQ(a.modules[k].body->kids.size(), p.modules[k].body->kids.size());
    }
  }
}

TEST(Oracle, DetectsAnUnsoundAbstraction) {
  // Not an abstraction: the literal changed instead of becoming unknown.
  PairCheck c = check_pair(prog("(top (add1 1))"), prog("(top (add1 5))"));
  EXPECT_FALSE(c.skipped);
  EXPECT_EQ(c.kind, "terminal");
}

TEST(Oracle, DetectsAVerifiedModuleThatIsBlamed) {
  // The second program is not an abstraction of the first; the oracle must notice.
  PairCheck c = check_pair(prog("(module f (-> int? int?) (lambda (x) false)) (top (f 1))"),
                           prog("(module f (-> int? int?) (lambda (x) x)) (top (f 1))"));
  EXPECT_FALSE(c.kind.empty());
}

TEST(Oracle, AcceptsASoundAbstraction) {
  PairCheck c = check_pair(prog("(module f (-> int? int?) (lambda (x) (add1 x))) (top (f 1))"),
                           prog("(module f (-> int? int?) (lambda (x) (add1 x))) (top (f opaque))"));
  EXPECT_FALSE(c.skipped);
  EXPECT_EQ(c.kind, "") << c.detail;
}

TEST(Shrink, ReducesWhilePreservingFailure) {
  Program p = prog("(module a any 1) (module b any 2) (top (+ (add1 3) (if true 4 5)))");
  Program s = shrink(p, [](const Program& q) {
    auto r = concrete_interpret(q, 100);
    return !r.finals.empty() && is_int(r.finals[0].e) && r.finals[0].e->n == 9;
  });
  EXPECT_TRUE(s.modules.empty());
  EXPECT_LT(show(s).size(), show(p).size());
  EXPECT_EQ(concrete_interpret(s, 100).finals[0].e->n, 9);
}

TEST(Soundness, SmallSweep) {
  SoundnessReport r = differential_soundness(11, 100);
  EXPECT_EQ(r.programs, 100u);
  EXPECT_GT(r.concrete_terminals, 150u);
  for (auto& v : r.violations) ADD_FAILURE() << v.kind << "\n" << v.concrete << v.abstract << v.detail;
}
