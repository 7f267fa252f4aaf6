#include <gtest/gtest.h>

#include <random>

#include "util.hpp"

using namespace scv;
using namespace scv::test;

TEST(Step, MonitorFunctionContractWraps) {
  Program p = prog("(module f any 0) (top 0)");
  Prover pv;
  Stepper st(p, pv);
  Sym f = intern("f"), x = intern("x"), y = intern("y");
  Ex dep = mk_depval(mk_pred(Op::EvenP), y, mk_pred(Op::EvenP));
  Ex w = mk_lam(x, mk_var(x, f));
  auto out = st.step(State{mk_mon(dep, f, top_label(), f, w), empty_heap()});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].rule, Rule::MonFn);
  const Ex& r = out[0].s.e;
  ASSERT_EQ(r->k, K::Val);
  ASSERT_EQ(r->p, P::Lam);
  const Ex& body = r->kids[0];
  ASSERT_EQ(body->k, K::Mon);
  EXPECT_EQ(body->l1, f);
  EXPECT_EQ(body->l2, top_label());
  ASSERT_EQ(body->kids[1]->k, K::App);
  const Ex& inner = body->kids[1]->kids[1];
  ASSERT_EQ(inner->k, K::Mon);
  EXPECT_EQ(inner->l1, top_label());
  EXPECT_EQ(inner->l2, f);
  EXPECT_EQ(pred_of(inner->kids[0]), Op::EvenP);
}

TEST(Step, ApplyUnknownFunctionHavocsArgument) {
  Program p = prog("(top 0)");
  p.modules.push_back(havoc_module());
  Prover pv;
  Stepper st(p, pv);
  HeapP h = heap_of({{0, mk_opaque({mk_pred(Op::ProcP)})}});
  auto out = st.step(State{mk_app(mk_addr(0), mk_int(5), top_label()), h});
  ASSERT_EQ(out.size(), 2u);
  bool result = false, havoc = false;
  for (auto& s : out) {
    if (s.rule == Rule::ApplyUnknown) {
      result = true;
      ASSERT_TRUE(is_addr(s.s.e));
      EXPECT_EQ(s.s.h->at(s.s.e->n)->p, P::Opaque);
    }
    if (s.rule == Rule::Havoc) {
      havoc = true;
      ASSERT_EQ(s.s.e->k, K::App);
      EXPECT_EQ(s.s.e->kids[0]->x, havoc_label());
      EXPECT_TRUE(equal(s.s.e->kids[1], mk_int(5)));
    }
  }
  EXPECT_TRUE(result);
  EXPECT_TRUE(havoc);
}

TEST(Step, IfFalseIsDeterministic) {
  Program p = prog("(top 0)");
  Prover pv;
  Stepper st(p, pv);
  auto out = st.step(State{mk_if(mk_false(), mk_int(1), mk_int(2)), empty_heap()});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_TRUE(equal(out[0].s.e, mk_int(2)));
}

TEST(Eval, ValueProgram) {
  ReachResult r = eval(prog("(top 5)"), no_solver());
  ASSERT_EQ(r.finals.size(), 1u);
  EXPECT_TRUE(equal(r.finals[0].e, mk_int(5)));
  EXPECT_TRUE(r.blames.empty());
}

TEST(Eval, FaultyPositiveContractIsBlamed) {
  ReachResult r = eval(prog("(module f (-> (pred int?) (lambda (x) (> x 0))) (lambda (x) 0)) (top (f 1))"), no_solver());
  EXPECT_TRUE(r.blames.count({intern("f"), intern("f")}));
}

TEST(Eval, EvenToOddHoldsUpItsEnd) {
  ReachResult r = eval(load("e2o.scv"), no_solver(20000));
  EXPECT_FALSE(r.exhausted);
  EXPECT_FALSE(has_blame_pos(r, "e2o"));
}

TEST(Verify, EvenToOddVerified) {
  Verification v = verify(load("e2o.scv"), no_solver(20000));
  auto* d = verdict_for(v, "e2o");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->kind, Verdict::Verified);
}

TEST(Verify, FaultyModuleBlamedWithTrace) {
  Verification v = verify(load("bad-pos.scv"), no_solver());
  auto* d = verdict_for(v, "f");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->kind, Verdict::Blamed);
  EXPECT_FALSE(d->trace.empty());
  EXPECT_EQ(name(d->blame.first), "f");
}

TEST(Verify, FactorialWithoutSummarizationExhausts) {
  EvalOptions eo = no_solver(1000);
  eo.summarize = false;
  Verification v = verify(load("fact.scv"), eo);
  auto* d = verdict_for(v, "fact");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->kind, Verdict::Unknown);
  EXPECT_TRUE(v.rr.exhausted);
}

TEST(Verify, OpaqueModulesGetNoVerdict) {
  Verification v = verify(prog("(module g (-> int? int?) opaque) (module f (-> int? int?) (lambda (x) (g x))) (top 0)"),
                          no_solver());
  EXPECT_FALSE(verdict_for(v, "g"));
  auto* d = verdict_for(v, "f");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->kind, Verdict::Verified);
}

TEST(Verify, ParallelExplorationMatchesSequential) {
  EvalOptions eo = no_solver();
  eo.summarize = false;
  Verification a = verify(load("bad-pos.scv"), eo);
  eo.jobs = 2;
  Verification b = verify(load("bad-pos.scv"), eo);
  EXPECT_EQ(a.rr.blames, b.rr.blames);
  ASSERT_EQ(a.rr.finals.size(), b.rr.finals.size());
}

TEST(EvalProperties, ConcreteProgramsAreDeterministic) {
  std::mt19937_64 rng(3);
  int compared = 0;
  for (int i = 0; i < 300; ++i) {
    Program p = generate_program(rng);
    ReachResult c = concrete_interpret(p, 20000);
    if (c.exhausted) continue;
    EvalOptions eo = no_solver(40000);
    eo.havoc = false;
    eo.summarize = false;
    ReachResult r = eval(p, eo);
    if (r.exhausted) continue;
    ASSERT_EQ(r.finals.size(), 1u) << show(p);
    const State& a = r.finals[0];
    const State& b = c.finals[0];
    if (b.blamed()) {
      ASSERT_TRUE(a.blamed()) << show(p);
      EXPECT_EQ(a.e->l1, b.e->l1) << show(p);
      EXPECT_EQ(a.e->l2, b.e->l2) << show(p);
    } else {
      auto witness = approximates(b, a, p);
      EXPECT_TRUE(witness) << show(p) << "\n" << show(a) << " vs " << show(b);
      for (auto& [l, u] : a.h->m) EXPECT_NE(u->p, P::Opaque) << show(p);
    }
    ++compared;
  }
  EXPECT_GT(compared, 250);
}
