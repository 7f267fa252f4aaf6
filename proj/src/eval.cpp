#include "scv/eval.hpp"

#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "scv/proof.hpp"
#include "scv/summarizer.hpp"

namespace scv {

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::Seed: return "seed";
    case Rule::SelfRef: return "module-self-reference";
    case Rule::ExtRef: return "module-external-reference";
    case Rule::ApplyFn: return "apply-function";
    case Rule::ApplyNonFn: return "apply-non-function";
    case Rule::ApplyUnknown: return "apply-unknown";
    case Rule::Havoc: return "havoc";
    case Rule::ApplyPrim: return "apply-primitive";
    case Rule::IfTrue: return "if-true";
    case Rule::IfFalse: return "if-false";
    case Rule::RefineUnknown: return "refine-unknown";
    case Rule::Assume: return "assume";
    case Rule::MonProved: return "monitor-proved";
    case Rule::MonRefuted: return "monitor-refuted";
    case Rule::MonFlat: return "monitor-flat";
    case Rule::MonFn: return "monitor-function-contract";
    case Rule::MonNonFn: return "monitor-non-function";
    case Rule::DepCon: return "dependent-contract";
    case Rule::HaltBlame: return "halt-blame";
    case Rule::RtEnter: return "summary-enter";
    case Rule::RtWiden: return "summary-widen";
    case Rule::RtMemo: return "summary-memo";
    case Rule::RtReturn: return "summary-return";
    case Rule::RtResume: return "summary-resume";
    case Rule::Blur: return "summary-blur";
  }
  return "?";
}

Focus decompose(const Ex& e0) {
  Focus f;
  Ex e = e0;
  for (;;) {
    if (e->k == K::Blame || is_value(e)) {
      f.redex = e;
      return f;
    }
    int idx = -1;
    const auto& k = e->kids;
    switch (e->k) {
      case K::App:
        if (!is_value(k[0])) idx = 0;
        else if (!is_value(k[1])) idx = 1;
        break;
      case K::Prim:
        for (size_t i = 0; i < k.size(); ++i)
          if (!is_value(k[i])) {
            idx = static_cast<int>(i);
            break;
          }
        break;
      case K::If:
      case K::DepCon:
        if (!is_value(k[0])) idx = 0;
        break;
      case K::Mon:
        if (!is_value(k[0])) idx = 0;
        else if (!is_value(k[1])) idx = 1;
        break;
      case K::Rt:
        if (!is_value(k[2])) idx = 2;
        break;
      case K::Blur:
        if (!is_value(k[1])) idx = 1;
        break;
      default: break;
    }
    if (idx < 0) {
      f.redex = e;
      return f;
    }
    f.ctx.push_back({e, static_cast<size_t>(idx)});
    e = e->kids[static_cast<size_t>(idx)];
  }
}

Ex plug(const std::vector<Frame>& ctx, size_t from, size_t to, Ex e) {
  for (size_t i = to; i-- > from;) {
    auto kids = ctx[i].node->kids;
    kids[ctx[i].idx] = std::move(e);
    e = with_kids(ctx[i].node, std::move(kids));
  }
  return e;
}

bool is_terminal(const State& s) { return s.blamed() || is_value(s.e); }

Ex amb(const std::vector<Ex>& es) {
  Ex e = es.back();
  for (size_t i = es.size() - 1; i-- > 0;) e = mk_if(mk_opaque(), es[i], e);
  return e;
}

namespace {

Ex havoc_ref() { return mk_var(havoc_label(), havoc_label()); }

}  // namespace

Module havoc_module() {
  Sym x = intern("x");
  Sym h = havoc_label();
  auto probe = [&](Ex e) { return mk_app(havoc_ref(), std::move(e), h); };
  Ex body = amb({probe(mk_app(mk_var(x, h), mk_opaque(), h)), probe(mk_prim(Op::Car, {mk_var(x, h)}, h)),
                 probe(mk_prim(Op::Cdr, {mk_var(x, h)}, h))});
  Sym u = intern("_");
  Module m;
  m.name = h;
  m.contract = mk_depcon(mk_lam(u, mk_true()), u, mk_lam(u, mk_false()));
  m.body = mk_lam(x, body);
  return m;
}

Ex seed_expr(const Program& p) {
  std::vector<Ex> alts{mk_true()};
  for (auto& m : p.modules)
    if (!m.opaque() && m.name != havoc_label())
      alts.push_back(mk_app(havoc_ref(), mk_var(m.name, havoc_label()), havoc_label()));
  return mk_app(mk_lam(intern("_"), p.top), amb(alts), top_label());
}

std::vector<Succ> Stepper::step(const State& s) {
  std::vector<Succ> out;
  step_focus(decompose(s.e), s.h, out);
  return out;
}

void Stepper::step_focus(const Focus& f, const HeapP& h, std::vector<Succ>& out) {
  const Ex& r = f.redex;
  auto go = [&](Ex e, HeapP h2, Rule rule) { out.push_back({{plug(f.ctx, std::move(e)), std::move(h2)}, rule}); };
  switch (r->k) {
    case K::Blame: out.push_back({{r, h}, Rule::HaltBlame}); return;
    case K::Var: {
      const Module* m = p_.find(r->x);
      if (!m) throw std::logic_error("unbound variable " + name(r->x));
      Ex body = m->opaque() ? mk_opaque() : m->body;
      if (r->l1 == m->name)
        go(body, h, Rule::SelfRef);
      else
        go(mk_mon(m->contract, m->name, r->l1, m->name, body), h, Rule::ExtRef);
      return;
    }
    case K::Val: {
      if (r->p != P::Opaque && r->p != P::Rec) break;
      auto [h2, a] = settle(h, r);
      go(a, h2, Rule::RefineUnknown);
      return;
    }
    case K::App: apply(f.ctx, r, h, out); return;
    case K::Prim:
      for (auto& o : delta(pv_, h, r->op, r->kids, r->l1)) {
        if (o.ans->k == K::Blame)
          out.push_back({{o.ans, o.h}, Rule::ApplyPrim});
        else
          go(o.ans, o.h, Rule::ApplyPrim);
      }
      return;
    case K::If: {
      static const Ex false_p = mk_pred(Op::FalseP);
      static const Ex not_false = mk_neg(Op::FalseP);
      for (auto& o : split(pv_, h, r->kids[0], false_p, not_false)) {
        if (is_false(o.ans))
          go(r->kids[1], o.h, Rule::IfTrue);
        else
          go(r->kids[2], o.h, Rule::IfFalse);
      }
      return;
    }
    case K::DepCon: go(mk_depval(r->kids[0], r->x, r->kids[1]), h, Rule::DepCon); return;
    case K::Mon: monitor(f.ctx, r, h, out); return;
    case K::Assume: {
      auto [h2, v] = refine(h, r->kids[0], r->kids[1]);
      go(v, h2, Rule::Assume);
      return;
    }
    case K::Rt: go(r->kids[2], h, Rule::RtReturn); return;
    case K::Blur: go(r->kids[1], h, Rule::Blur); return;
    default: break;
  }
  throw std::logic_error("stuck state at " + show(r));
}

void Stepper::apply(const std::vector<Frame>& ctx, const Ex& redex, const HeapP& h, std::vector<Succ>& out) {
  static const Ex proc_p = mk_pred(Op::ProcP);
  static const Ex not_proc = mk_neg(Op::ProcP);
  const Ex& fn = redex->kids[0];
  const Ex& arg = redex->kids[1];
  Sym l = redex->l1;
  auto go = [&](Ex e, HeapP h2, Rule rule) { out.push_back({{plug(ctx, std::move(e)), std::move(h2)}, rule}); };
  const Ex& fv = deref(*h, fn);
  if (fv->k == K::Val && fv->p == P::Lam) {
    go(subst(arg, fv->x, fv->kids[0]), h, Rule::ApplyFn);
    return;
  }
  Res r = pv_.prove(*h, fn, proc_p);
  if (r != Res::Refuted) {
    HeapP h1 = r == Res::Proved ? h : refine(h, fn, proc_p).first;
    const Ex& u = deref(*h1, fn);
    if (u->p == P::Lam) {
      go(subst(arg, u->x, u->kids[0]), h1, Rule::ApplyFn);
    } else if (u->p == P::Rec && fn->k == K::Addr) {
      // Several procedure members remain: apply each one.
      for (auto& m : u->kids) {
        auto [h2, mv] = unroll(h1, u, m);
        const Ex& mu = deref(*h2, mv);
        if (mu->p != P::Lam) continue;
        go(subst(arg, mu->x, mu->kids[0]), heap_set(h2, fn->n, mu), Rule::ApplyFn);
      }
    } else {
      auto [h2, la] = alloc(h1, mk_opaque());
      go(mk_addr(la), h2, Rule::ApplyUnknown);
      go(mk_app(havoc_ref(), arg, havoc_label()), h1, Rule::Havoc);
    }
  }
  if (r != Res::Proved) out.push_back({{mk_blame(l, lang_label()), h}, Rule::ApplyNonFn});
}

void Stepper::monitor(const std::vector<Frame>& ctx, const Ex& redex, const HeapP& h, std::vector<Succ>& out) {
  static const Ex dep_p = mk_pred(Op::DepP);
  static const Ex not_dep = mk_neg(Op::DepP);
  const Ex& c = redex->kids[0];
  const Ex& v = redex->kids[1];
  Sym pos = redex->l1, src = redex->l3;
  Res d = pv_.prove(*h, c, dep_p);
  if (d != Res::Refuted) {
    HeapP h1 = d == Res::Proved ? h : refine(h, c, dep_p).first;
    fn_contract(ctx, redex, deref(*h1, c), h1, out);
  }
  if (d == Res::Proved) return;
  HeapP h2 = d == Res::Refuted ? h : refine(h, c, not_dep).first;
  switch (pv_.prove(*h2, v, c)) {
    case Res::Proved: out.push_back({{plug(ctx, v), h2}, Rule::MonProved}); return;
    case Res::Refuted: out.push_back({{mk_blame(pos, src), h2}, Rule::MonRefuted}); return;
    default:
      out.push_back(
          {{plug(ctx, mk_if(mk_app(c, v, src), mk_assume(v, c), mk_blame(pos, src))), h2}, Rule::MonFlat});
  }
}

void Stepper::fn_contract(const std::vector<Frame>& ctx, const Ex& redex, const Ex& dep, const HeapP& h,
                          std::vector<Succ>& out) {
  static const Ex proc_p = mk_pred(Op::ProcP);
  static const Ex not_proc = mk_neg(Op::ProcP);
  const Ex& v = redex->kids[1];
  Sym pos = redex->l1, neg = redex->l2, src = redex->l3;
  Res r = pv_.prove(*h, v, proc_p);
  if (r != Res::Refuted) {
    HeapP h1 = r == Res::Proved ? h : refine(h, v, proc_p).first;
    Sym x = dep->x;
    Ex inner = mk_app(v, mk_mon(dep->kids[0], neg, pos, src, mk_var(x, pos)), pos);
    Ex lam = mk_lam(x, mk_mon(dep->kids[1], pos, neg, src, inner));
    out.push_back({{plug(ctx, lam), h1}, Rule::MonFn});
  }
  if (r != Res::Proved) {
    HeapP h2 = r == Res::Refuted ? h : refine(h, v, not_proc).first;
    out.push_back({{mk_blame(pos, src), h2}, Rule::MonNonFn});
  }
}

std::vector<TraceStep> ReachResult::trace_to(int64_t node, size_t limit) const {
  std::vector<int64_t> path;
  for (int64_t n = node; n >= 0; n = (*graph)[static_cast<size_t>(n)].parent) path.push_back(n);
  std::vector<TraceStep> out;
  for (size_t i = path.size() - 1; i-- > 0;) {
    const auto& cur = (*graph)[static_cast<size_t>(path[i])];
    const auto& prev = (*graph)[static_cast<size_t>(path[i + 1])];
    out.push_back({cur.rule, show(decompose(prev.s.e).redex), show(cur.s)});
  }
  if (out.size() > limit) out.erase(out.begin(), out.end() - static_cast<std::ptrdiff_t>(limit));
  return out;
}

ReachResult eval(const Program& p, const EvalOptions& opt) {
  Program q = p;
  // Apply-Unknown needs the demonic context even when the seed does not use it.
  q.modules.push_back(havoc_module());
  Ex e0 = opt.havoc ? seed_expr(q) : q.top;

  ReachResult rr;
  rr.graph = std::make_shared<std::vector<ReachResult::GNode>>();
  auto& g = *rr.graph;
  std::unordered_map<std::string, int64_t> seen;
  std::vector<int64_t> frontier;

  auto discover = [&](const State& raw, int64_t parent, Rule rule, std::vector<int64_t>& next) {
    State s = canonicalize(raw);
    std::string key = encode_state(s);
    if (seen.count(key)) return;
    int64_t id = static_cast<int64_t>(g.size());
    seen.emplace(std::move(key), id);
    g.push_back({s, parent, rule});
    if (is_terminal(s)) {
      rr.finals.push_back(s);
      rr.final_nodes.push_back(id);
      if (s.blamed()) rr.blames.insert({s.e->l1, s.e->l2});
    } else {
      next.push_back(id);
    }
  };
  discover({e0, empty_heap()}, -1, Rule::Seed, frontier);

  int jobs = std::max(1, opt.jobs);
  if (opt.summarize) jobs = 1;
  std::vector<std::unique_ptr<Prover>> provers;
  for (int i = 0; i < jobs; ++i) provers.push_back(std::make_unique<Prover>(opt.solver));
  std::vector<std::unique_ptr<Stepper>> steppers;
  for (int i = 0; i < jobs; ++i) steppers.push_back(std::make_unique<Stepper>(q, *provers[static_cast<size_t>(i)]));
  std::unique_ptr<Summarizer> summ;
  if (opt.summarize) summ = std::make_unique<Summarizer>(*steppers[0]);

  while (!frontier.empty()) {
    int64_t room = opt.budget - rr.expanded;
    if (room <= 0) {
      rr.exhausted = true;
      break;
    }
    size_t n = std::min(frontier.size(), static_cast<size_t>(room));
    std::vector<std::vector<Succ>> succs(n);
    auto work = [&](size_t worker) {
      for (size_t i = worker; i < n; i += static_cast<size_t>(jobs)) {
        const State& s = g[static_cast<size_t>(frontier[i])].s;
        succs[i] = summ ? summ->step(s) : steppers[worker]->step(s);
      }
    };
    if (jobs == 1 || n < 2) {
      work(0);
    } else {
      std::vector<std::thread> ts;
      for (int w = 0; w < jobs; ++w) ts.emplace_back(work, static_cast<size_t>(w));
      for (auto& t : ts) t.join();
    }
    rr.expanded += static_cast<int64_t>(n);
    std::vector<int64_t> next;
    for (size_t i = 0; i < n; ++i)
      for (auto& sc : succs[i]) discover(sc.s, frontier[i], sc.rule, next);
    if (n < frontier.size()) {
      next.insert(next.begin(), frontier.begin() + static_cast<std::ptrdiff_t>(n), frontier.end());
      rr.exhausted = true;
      frontier = std::move(next);
      break;
    }
    frontier = std::move(next);
  }
  if (!frontier.empty()) rr.exhausted = true;

  for (auto& pv : provers) {
    rr.solver_queries += pv->queries();
    if (rr.warning.empty()) rr.warning = pv->warning();
  }
  if (summ) rr.memo = summ->memo();
  return rr;
}

const char* verdict_name(Verdict::Kind k) {
  switch (k) {
    case Verdict::Verified: return "VERIFIED";
    case Verdict::Blamed: return "BLAMED";
    default: return "UNKNOWN";
  }
}

bool discarded_blame(const Program& p, std::pair<Sym, Sym> b) {
  Sym pos = b.first;
  if (pos == top_label() || pos == havoc_label() || pos == lang_label()) return true;
  const Module* m = p.find(pos);
  return !m || m->opaque();
}

Verification verify(const Program& p, const EvalOptions& opt) {
  Verification out;
  out.rr = eval(p, opt);
  const auto& rr = out.rr;
  for (auto& b : rr.blames)
    if (discarded_blame(p, b)) out.discarded.push_back(b);
  for (auto& m : p.modules) {
    if (m.opaque()) continue;
    Verdict v;
    v.module = m.name;
    v.kind = Verdict::Verified;
    for (size_t i = 0; i < rr.finals.size(); ++i) {
      const State& s = rr.finals[i];
      if (s.blamed() && s.e->l1 == m.name) {
        v.kind = Verdict::Blamed;
        v.blame = {s.e->l1, s.e->l2};
        v.trace = rr.trace_to(rr.final_nodes[i]);
        break;
      }
    }
    if (v.kind == Verdict::Verified && rr.exhausted) {
      v.kind = Verdict::Unknown;
      v.reason = "budget exhausted";
    }
    out.verdicts.push_back(std::move(v));
  }
  return out;
}

}  // namespace scv
