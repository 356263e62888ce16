#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "eptctr/problem_suite.hpp"
#include "eptctr/solver.hpp"

namespace eptctr::cli {

/// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailed = 2;

/// One row of the suite report.
struct SuiteRow {
  std::string problem;
  int64_t n = 0;
  int64_t m = 0;
  int64_t accepted_steps = 0;
  int64_t total_iters = 0;
  int64_t n_f = 0;
  int64_t n_g = 0;
  double f_star = 0.0;
  double kkt_inf = 0.0;
  double feas_inf = 0.0;
  double wall_ms = 0.0;
  SolveStatus status = SolveStatus::NumericalError;
};

/// Scientific notation, 9 significant digits, lowercase exponent.
std::string format_float(double value);

void write_history_csv(std::ostream& out,
                       const std::vector<IterationRecord>& history);

void write_suite_csv(std::ostream& out, const std::vector<SuiteRow>& rows);

/**
 * Applies snake_case SolverConfig fields from a JSON object. Throws
 * eptctr::Error(InvalidConfig) on unknown keys or wrong types.
 */
void apply_config_json(SolverConfig& cfg, const std::string& json_text);

/**
 * Solves one benchmark problem and times factorization plus iteration.
 */
SuiteRow run_problem(ExampleId id, int64_t n, const SolverConfig& cfg,
                     SolveResult* result_out = nullptr);

/**
 * Runs the given problems, `jobs` at a time, returning rows in input order.
 */
std::vector<SuiteRow> run_suite(
    const std::vector<std::pair<ExampleId, int64_t>>& runs, int jobs);

/**
 * Entry point for `eptctr <subcommand> ...`. Human-readable output goes to
 * `out`, diagnostics to `err`.
 */
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace eptctr::cli
