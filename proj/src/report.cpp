#include "scv/report.hpp"

#include <json.hpp>
#include <sstream>

namespace scv {

namespace {

bool partial(Op o) { return !is_pred(o) && o != Op::Cons; }

size_t prim_sites(const Ex& e) {
  if (!e) return 0;
  size_t n = e->k == K::Prim && partial(e->op) ? 1 : 0;
  for (auto& k : e->kids) n += prim_sites(k);
  return n;
}

size_t contract_leaves(const Ex& c) {
  if (c->k == K::DepCon) {
    const Ex& range = c->kids[1];
    return contract_leaves(c->kids[0]) + (range->k == K::DepCon ? contract_leaves(range) : 1);
  }
  return 1;
}

}  // namespace

size_t count_checks(const Program& p) {
  size_t n = prim_sites(p.top);
  for (auto& m : p.modules) n += contract_leaves(m.contract) + prim_sites(m.body);
  return n;
}

std::string report_text(const Program&, const Verification& v, const ReportOptions& o) {
  std::ostringstream os;
  for (auto& d : v.verdicts) {
    os << name(d.module) << ": " << verdict_name(d.kind);
    if (d.kind == Verdict::Blamed) os << " (blame " << name(d.blame.first) << " via " << name(d.blame.second) << ")";
    if (!d.reason.empty()) os << " (" << d.reason << ")";
    os << '\n';
    if (d.kind != Verdict::Blamed) continue;
    os << "  witness trace (" << d.trace.size() << " steps):\n";
    for (size_t i = 0; i < d.trace.size(); ++i) {
      os << "    " << i + 1 << ". " << rule_name(d.trace[i].rule) << "  " << d.trace[i].redex << '\n';
      if (o.trace_states) os << "       => " << d.trace[i].state << '\n';
    }
  }
  for (auto& b : v.discarded) os << "discarded blame: " << name(b.first) << " via " << name(b.second) << '\n';
  if (!v.rr.warning.empty()) os << "warning: " << v.rr.warning << '\n';
  return os.str();
}

std::string report_json(const Program& p, const Verification& v, const EvalOptions& eo, const ReportOptions& o) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["summarize"] = eo.summarize;
  j["solver"] = eo.solver.enabled() ? eo.solver.command : "none";
  j["budget"] = eo.budget;
  j["expanded"] = v.rr.expanded;
  j["exhausted"] = v.rr.exhausted;
  j["solver_queries"] = v.rr.solver_queries;
  j["checks"] = count_checks(p);
  j["modules"] = ordered_json::array();
  for (auto& d : v.verdicts) {
    ordered_json m;
    m["name"] = name(d.module);
    m["verdict"] = verdict_name(d.kind);
    if (d.kind == Verdict::Blamed)
      m["blame"] = {{"pos", name(d.blame.first)}, {"src", name(d.blame.second)}};
    else
      m["blame"] = nullptr;
    m["reason"] = d.reason;
    m["trace"] = ordered_json::array();
    for (auto& t : d.trace) {
      ordered_json s = {{"rule", rule_name(t.rule)}, {"redex", t.redex}};
      if (o.trace_states) s["state"] = t.state;
      m["trace"].push_back(std::move(s));
    }
    j["modules"].push_back(std::move(m));
  }
  j["discarded"] = ordered_json::array();
  for (auto& b : v.discarded) j["discarded"].push_back({{"pos", name(b.first)}, {"src", name(b.second)}});
  j["warning"] = v.rr.warning;
  return j.dump(2) + "\n";
}

int exit_code(const Verification& v) {
  bool unknown = false;
  for (auto& d : v.verdicts) {
    if (d.kind == Verdict::Blamed) return 1;
    unknown |= d.kind == Verdict::Unknown;
  }
  return unknown ? 2 : 0;
}

}  // namespace scv
