#pragma once

#include <algorithm>
#include <string>

#include "scv/approx.hpp"
#include "scv/eval.hpp"
#include "scv/parser.hpp"

namespace scv::test {

inline Program prog(const std::string& text) { return parse_program(text); }

inline Program load(const std::string& file) { return parse_file(std::string(SCV_PROGRAMS_DIR) + "/" + file); }

inline Ex expr(const std::string& text) { return parse_expr(text, top_label()); }

inline HeapP heap_of(std::initializer_list<std::pair<int64_t, Ex>> entries) {
  HeapP h = empty_heap();
  for (auto& [l, u] : entries) h = heap_set(h, l, u);
  return h;
}

inline const Verdict* verdict_for(const Verification& v, const std::string& module) {
  for (auto& d : v.verdicts)
    if (name(d.module) == module) return &d;
  return nullptr;
}

inline bool has_blame_pos(const ReachResult& rr, const std::string& pos) {
  return std::any_of(rr.blames.begin(), rr.blames.end(), [&](auto& b) { return name(b.first) == pos; });
}

inline EvalOptions no_solver(int64_t budget = 100000) {
  EvalOptions eo;
  eo.budget = budget;
  eo.solver = SolverConfig{"none"};
  return eo;
}

}  // namespace scv::test
