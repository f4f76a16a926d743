#pragma once

#include "config.hpp"

#include <iosfwd>
#include <string>

namespace qstrat::app {

// Each command writes its outputs into cfg "out" and returns the exit status
// (0 success, 1 assertion failure). Errors propagate as exceptions.
int run_analyze(const RunConfig& cfg, std::ostream& log);
int run_cover(const RunConfig& cfg, std::ostream& log);
int run_beta(const RunConfig& cfg, std::ostream& log);
int run_reifenberg(const RunConfig& cfg, std::ostream& log);
int run_verify(const RunConfig& cfg, std::ostream& log);

// Validates, runs and maps errors to exit status 2 with a diagnostic JSON (error.json in
// the output directory when it can be created) and a one-line message on `err`.
int dispatch(const std::string& command, const RunConfig& cfg, std::ostream& log, std::ostream& err);

// Least-squares slope of log(values) against log(scales).
double loglog_slope(const std::vector<double>& scales, const std::vector<double>& values);

}  // namespace qstrat::app
