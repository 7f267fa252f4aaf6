#include <gtest/gtest.h>

#include "util.hpp"

using namespace scv;
using namespace scv::test;

TEST(Parser, ModuleAndTopReference) {
  Program p = prog("(module f (pred int?) 5) (top (f 5))");
  ASSERT_EQ(p.modules.size(), 1u);
  EXPECT_EQ(name(p.modules[0].name), "f");
  EXPECT_EQ(p.modules[0].contract, mk_pred(Op::IntP));
  ASSERT_EQ(p.top->k, K::App);
  EXPECT_EQ(p.top->kids[0]->k, K::Var);
  EXPECT_EQ(name(p.top->kids[0]->x), "f");
  EXPECT_EQ(p.top->kids[0]->l1, top_label());
  EXPECT_TRUE(equal(p.top->kids[1], mk_int(5)));
  EXPECT_EQ(p.top->l1, top_label());
}

TEST(Parser, IfWithoutModules) {
  Program p = prog("(top (if 1 2 3))");
  EXPECT_TRUE(p.modules.empty());
  EXPECT_TRUE(equal(p.top, mk_if(mk_int(1), mk_int(2), mk_int(3))));
}

TEST(Parser, LetDesugarsToApplication) {
  Program p = prog("(top (let ((x 1)) x))");
  Sym x = intern("x");
  EXPECT_TRUE(equal(p.top, mk_app(mk_lam(x, mk_var(x, top_label())), mk_int(1), top_label())));
}

TEST(Parser, OpaqueModuleBody) {
  Program p = prog("(module h (-> int? int?) opaque) (top 0)");
  ASSERT_EQ(p.modules.size(), 1u);
  EXPECT_TRUE(p.modules[0].opaque());
  EXPECT_EQ(p.modules[0].contract->k, K::DepCon);
}

TEST(Parser, NumAliasesInt) { EXPECT_EQ(prog("(top (num? 1))").top->op, Op::IntP); }

TEST(Parser, Errors) {
  EXPECT_THROW(prog("(top (add1 1 2))"), ParseError);
  EXPECT_THROW(prog("(top y)"), ParseError);
  EXPECT_THROW(prog("(top (if 1 2)"), ParseError);
  EXPECT_THROW(prog("(module f any 1) (module f any 2) (top 0)"), ParseError);
}

TEST(Parser, ErrorPositions) {
  try {
    prog("(top\n  (car))");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 2);
  }
}

TEST(Syntax, SubstIdentity) {
  Sym x = intern("x");
  EXPECT_TRUE(equal(subst(mk_int(5), x, mk_var(x, top_label())), mk_int(5)));
}

TEST(Syntax, SubstRespectsShadowing) {
  Sym x = intern("x");
  Ex lam = mk_lam(x, mk_var(x, top_label()));
  EXPECT_TRUE(equal(subst(mk_int(5), x, lam), lam));
}

TEST(Syntax, SubstStructural) {
  Sym x = intern("x"), y = intern("y");
  Ex e = mk_app(mk_var(x, top_label()), mk_var(y, top_label()), top_label());
  EXPECT_TRUE(equal(subst(mk_int(5), x, e), mk_app(mk_int(5), mk_var(y, top_label()), top_label())));
}

TEST(Syntax, FreeVariables) {
  Sym x = intern("x"), y = intern("y");
  Ex e = mk_lam(x, mk_app(mk_var(x, top_label()), mk_var(y, top_label()), top_label()));
  ASSERT_EQ(e->fv.size(), 1u);
  EXPECT_EQ(e->fv[0], y);
}

TEST(Syntax, ContractShapes) {
  Ex c = mk_cmp_contract(Op::Gt, mk_int(0));
  auto s = cmp_of(c);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->cmp, Op::Gt);
  EXPECT_FALSE(s->neq);
  EXPECT_TRUE(equal(s->rhs, mk_int(0)));

  auto a = arith_of(mk_arith_contract(Op::Add, mk_addr(1), mk_int(1)));
  ASSERT_TRUE(a);
  EXPECT_EQ(a->arith, Op::Add);
  EXPECT_EQ(pred_of(mk_pred(Op::ConsP)), Op::ConsP);
  EXPECT_FALSE(pred_of(c));
}

TEST(Syntax, Junctions) {
  Ex c = parse_expr("(and/c int? (lambda (x) (> x 0)))", top_label());
  auto j = junction_of(c);
  ASSERT_TRUE(j);
  EXPECT_TRUE(j->conj);
  EXPECT_EQ(j->parts.size(), 2u);
  auto o = junction_of(parse_expr("(or/c int? false?)", top_label()));
  ASSERT_TRUE(o);
  EXPECT_FALSE(o->conj);
  EXPECT_EQ(o->parts.size(), 2u);
}

TEST(Syntax, ShowRoundTrips) {
  const char* src = "(module f (-> int? (lambda (x) (> x 0))) (lambda (x) (add1 x)))\n(top (f 1))\n";
  Program p = prog(src);
  Program q = prog(show(p));
  EXPECT_EQ(show(p), show(q));
}
