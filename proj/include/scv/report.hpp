#pragma once

#include <string>

#include "scv/eval.hpp"

namespace scv {

// Static dynamic-check sites: flat contract leaves plus partial primitive applications.
size_t count_checks(const Program& p);

struct ReportOptions {
  bool trace_states = false;  // include full states in witness traces
};

std::string report_text(const Program& p, const Verification& v, const ReportOptions& o);
std::string report_json(const Program& p, const Verification& v, const EvalOptions& eo, const ReportOptions& o);

// 0 all verified, 1 some blamed, 2 some unknown.
int exit_code(const Verification& v);

}  // namespace scv
