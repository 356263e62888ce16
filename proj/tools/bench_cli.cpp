#include "bench_cli.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

namespace eptctr::cli {

namespace {

using json = nlohmann::json;

constexpr const char* kHistoryHeader =
    "k,f,pg_inf,pg_2,dt,rho,accepted,model_decrease";
constexpr const char* kSuiteHeader =
    "problem,n,m,accepted_steps,total_iters,n_f,n_g,f_star,kkt_inf,feas_inf,"
    "wall_ms,status";

// Desk-scale dimension; divisible by 2, 3 and 6.
constexpr int64_t kDeskN = 120;

std::optional<ExampleId> lookup(const std::string& id, std::ostream& err) {
  auto parsed = parse_example_id(id);
  if (!parsed) {
    err << "unknown problem '" << id << "' (expected ex1..ex10)\n";
  }
  return parsed;
}

bool check_dimension(ExampleId id, int64_t n, std::ostream& err) {
  if (!valid_dimension(id, n)) {
    err << name(id) << ": n must be a positive multiple of "
        << dimension_divisor(id) << ", got " << n << "\n";
    return false;
  }
  return true;
}

std::string read_file(const std::string& path) {
  std::ifstream in{path};
  if (!in) {
    throw Error{ErrorKind::InvalidConfig, "cannot read " + path};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json result_json(const SuiteRow& row, const SolveResult& result) {
  json j;
  j["problem"] = row.problem;
  j["n"] = row.n;
  j["m"] = row.m;
  j["status"] = std::string{to_string(result.status)};
  j["steps"] = result.steps;
  j["total_iters"] = result.total_iters;
  j["n_f"] = result.n_f;
  j["n_g"] = result.n_g;
  j["f_star"] = result.f_star;
  j["kkt_inf"] = result.kkt_inf;
  j["feas_inf"] = result.feas_inf;
  j["wall_ms"] = row.wall_ms;
  j["x_star"] = std::vector<double>(result.x_star.begin(), result.x_star.end());
  j["lambda_star"] = std::vector<double>(result.lambda_star.begin(),
                                         result.lambda_star.end());
  return j;
}

void print_summary(std::ostream& out, const SuiteRow& row) {
  out << row.problem << " (n = " << row.n << ", m = " << row.m << ")\n"
      << "  status       " << to_string(row.status) << "\n"
      << "  steps        " << row.accepted_steps << " accepted, "
      << row.total_iters << " total\n"
      << "  evaluations  f: " << row.n_f << ", g: " << row.n_g << "\n"
      << "  f(x*)        " << format_float(row.f_star) << "\n"
      << "  kkt_inf      " << format_float(row.kkt_inf) << "\n"
      << "  feas_inf     " << format_float(row.feas_inf) << "\n"
      << "  wall_ms      " << format_float(row.wall_ms) << "\n";
}

std::vector<std::string> split_ids(const std::string& list) {
  std::vector<std::string> ids;
  std::stringstream ss{list};
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) {
      ids.push_back(item);
    }
  }
  return ids;
}

}  // namespace

std::string format_float(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.8e", value);
  return buf;
}

void write_history_csv(std::ostream& out,
                       const std::vector<IterationRecord>& history) {
  out << kHistoryHeader << "\n";
  for (const auto& rec : history) {
    out << rec.k << ',' << format_float(rec.f) << ','
        << format_float(rec.pg_norm_inf) << ',' << format_float(rec.pg_norm_2)
        << ',' << format_float(rec.dt) << ',' << format_float(rec.rho) << ','
        << (rec.accepted ? 1 : 0) << ',' << format_float(rec.model_decrease)
        << "\n";
  }
}

void write_suite_csv(std::ostream& out, const std::vector<SuiteRow>& rows) {
  out << kSuiteHeader << "\n";
  for (const auto& r : rows) {
    out << r.problem << ',' << r.n << ',' << r.m << ',' << r.accepted_steps
        << ',' << r.total_iters << ',' << r.n_f << ',' << r.n_g << ','
        << format_float(r.f_star) << ',' << format_float(r.kkt_inf) << ','
        << format_float(r.feas_inf) << ',' << format_float(r.wall_ms) << ','
        << to_string(r.status) << "\n";
  }
}

void apply_config_json(SolverConfig& cfg, const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error{ErrorKind::InvalidConfig, e.what()};
  }
  if (!j.is_object()) {
    throw Error{ErrorKind::InvalidConfig, "config must be a JSON object"};
  }
  for (const auto& [key, value] : j.items()) {
    auto real = [&](double& field) {
      if (!value.is_number()) {
        throw Error{ErrorKind::InvalidConfig, key + " must be a number"};
      }
      field = value.get<double>();
    };
    auto integer = [&](int64_t& field) {
      if (!value.is_number_integer()) {
        throw Error{ErrorKind::InvalidConfig, key + " must be an integer"};
      }
      field = value.get<int64_t>();
    };
    if (key == "eps") {
      real(cfg.eps);
    } else if (key == "dt0") {
      real(cfg.dt0);
    } else if (key == "eta_a") {
      real(cfg.eta_a);
    } else if (key == "eta1") {
      real(cfg.eta1);
    } else if (key == "gamma1") {
      real(cfg.gamma1);
    } else if (key == "eta2") {
      real(cfg.eta2);
    } else if (key == "gamma2") {
      real(cfg.gamma2);
    } else if (key == "theta") {
      real(cfg.theta);
    } else if (key == "dt_min") {
      real(cfg.dt_min);
    } else if (key == "dt_max") {
      real(cfg.dt_max);
    } else if (key == "max_iter") {
      integer(cfg.max_iter);
    } else if (key == "max_fun_evals") {
      integer(cfg.max_fun_evals);
    } else {
      throw Error{ErrorKind::InvalidConfig, "unknown config key '" + key + "'"};
    }
  }
}

SuiteRow run_problem(ExampleId id, int64_t n, const SolverConfig& cfg,
                     SolveResult* result_out) {
  const Problem problem = build(id, n);

  // Covers factorization, feasibility projection and the main loop.
  const auto start = std::chrono::steady_clock::now();
  SolveResult result = solve(problem, cfg);
  const auto stop = std::chrono::steady_clock::now();

  SuiteRow row;
  row.problem = std::string{name(id)};
  row.n = problem.n();
  row.m = problem.m();
  row.accepted_steps = result.steps;
  row.total_iters = result.total_iters;
  row.n_f = result.n_f;
  row.n_g = result.n_g;
  row.f_star = result.f_star;
  row.kkt_inf = result.kkt_inf;
  row.feas_inf = result.feas_inf;
  row.wall_ms =
      std::chrono::duration<double, std::milli>(stop - start).count();
  row.status = result.status;
  if (result_out) {
    *result_out = std::move(result);
  }
  return row;
}

std::vector<SuiteRow> run_suite(
    const std::vector<std::pair<ExampleId, int64_t>>& runs, int jobs) {
  std::vector<SuiteRow> rows(runs.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < runs.size(); i = next++) {
      rows[i] = run_problem(runs[i].first, runs[i].second, SolverConfig{});
    }
  };
  const auto workers =
      static_cast<size_t>(std::clamp<int64_t>(jobs, 1, std::max<size_t>(runs.size(), 1)));
  if (workers == 1) {
    worker();
    return rows;
  }
  std::vector<std::jthread> pool;
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back(worker);
  }
  pool.clear();
  return rows;
}

namespace {

struct SolveOptions {
  std::string problem;
  int64_t n = 0;
  std::optional<double> tol;
  std::optional<double> dt0;
  std::optional<int64_t> max_iter;
  std::string json_path;
  std::string history_path;
  std::string config_path;
};

struct SuiteOptions {
  std::string scale = "desk";
  std::optional<int64_t> n;
  std::string only;
  std::string out_path;
  int jobs = 1;
  bool no_timing = false;
};

struct CheckGradOptions {
  std::string problem;
  int64_t n = 0;
  uint64_t seed = 0;
  int points = 10;
};

int cmd_solve(const SolveOptions& opt, std::ostream& out, std::ostream& err) {
  const auto id = lookup(opt.problem, err);
  if (!id || !check_dimension(*id, opt.n, err)) {
    return kExitUsage;
  }

  SolverConfig cfg;
  try {
    if (!opt.config_path.empty()) {
      apply_config_json(cfg, read_file(opt.config_path));
    }
    if (opt.tol) {
      cfg.eps = *opt.tol;
    }
    if (opt.dt0) {
      cfg.dt0 = *opt.dt0;
    }
    if (opt.max_iter) {
      cfg.max_iter = *opt.max_iter;
    }
    cfg.validate();
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }

  SolveResult result;
  const SuiteRow row = run_problem(*id, opt.n, cfg, &result);
  print_summary(out, row);

  if (!opt.json_path.empty()) {
    std::ofstream f{opt.json_path};
    if (!f) {
      err << "cannot write " << opt.json_path << "\n";
      return kExitUsage;
    }
    f << result_json(row, result).dump(2) << "\n";
  }
  if (!opt.history_path.empty()) {
    std::ofstream f{opt.history_path};
    if (!f) {
      err << "cannot write " << opt.history_path << "\n";
      return kExitUsage;
    }
    write_history_csv(f, result.history);
  }
  return result.status == SolveStatus::Converged ? kExitOk : kExitFailed;
}

int cmd_suite(const SuiteOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<ExampleId> ids;
  if (opt.only.empty()) {
    ids.assign(kAllExamples.begin(), kAllExamples.end());
  } else {
    for (const auto& text : split_ids(opt.only)) {
      const auto id = lookup(text, err);
      if (!id) {
        return kExitUsage;
      }
      ids.push_back(*id);
    }
  }

  std::vector<std::pair<ExampleId, int64_t>> runs;
  for (ExampleId id : ids) {
    int64_t n = opt.scale == "paper" ? paper_dimension(id) : kDeskN;
    if (opt.n) {
      n = *opt.n;
    }
    if (!check_dimension(id, n, err)) {
      return kExitUsage;
    }
    runs.emplace_back(id, n);
  }

  auto rows = run_suite(runs, opt.jobs);
  if (opt.no_timing) {
    for (auto& row : rows) {
      row.wall_ms = 0.0;
    }
  }

  if (opt.out_path.empty()) {
    write_suite_csv(out, rows);
  } else {
    std::ofstream f{opt.out_path};
    if (!f) {
      err << "cannot write " << opt.out_path << "\n";
      return kExitUsage;
    }
    write_suite_csv(f, rows);
    for (const auto& row : rows) {
      out << row.problem << ": " << to_string(row.status) << ", "
          << row.accepted_steps << " steps, f* = " << format_float(row.f_star)
          << "\n";
    }
  }

  const bool all_ok = std::all_of(rows.begin(), rows.end(), [](const auto& r) {
    return r.status == SolveStatus::Converged;
  });
  return all_ok ? kExitOk : kExitFailed;
}

int cmd_check_grad(const CheckGradOptions& opt, std::ostream& out,
                   std::ostream& err) {
  const auto id = lookup(opt.problem, err);
  if (!id || !check_dimension(*id, opt.n, err)) {
    return kExitUsage;
  }
  const auto report = gradient_check(*id, opt.n, opt.points, opt.seed);
  out << name(*id) << " (n = " << opt.n << ", seed = " << opt.seed << ", "
      << report.num_points << " points)\n";
  for (size_t i = 0; i < report.per_block_position.size(); ++i) {
    out << "  block position " << i << ": "
        << format_float(report.per_block_position[i]) << "\n";
  }
  out << "  max relative error: " << format_float(report.max_rel_error)
      << "\n";
  const bool pass = report.max_rel_error <= 1e-5;
  out << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kExitOk : kExitFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Explicit continuation solver for linearly constrained "
               "minimization, with benchmark harness",
               "eptctr"};
  app.require_subcommand(1);

  SolveOptions solve_opt;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one benchmark problem");
  solve_cmd->add_option("--problem", solve_opt.problem, "ex1 .. ex10")
      ->required();
  solve_cmd->add_option("--n", solve_opt.n, "Dimension")->required();
  solve_cmd->add_option("--tol", solve_opt.tol, "Tolerance on ||Pg||_inf");
  solve_cmd->add_option("--dt0", solve_opt.dt0, "Initial time step");
  solve_cmd->add_option("--max-iter", solve_opt.max_iter, "Iteration cap");
  solve_cmd->add_option("--json", solve_opt.json_path, "Write result JSON");
  solve_cmd->add_option("--history", solve_opt.history_path,
                        "Write per-iteration CSV");
  solve_cmd->add_option("--config", solve_opt.config_path,
                        "SolverConfig JSON (flags take precedence)");

  SuiteOptions suite_opt;
  auto* suite_cmd = app.add_subcommand("suite", "Run the benchmark suite");
  suite_cmd->add_option("--scale", suite_opt.scale, "paper or desk")
      ->check(CLI::IsMember({"paper", "desk"}));
  suite_cmd->add_option("--n", suite_opt.n, "Use this n for every problem");
  suite_cmd->add_option("--only", suite_opt.only, "Comma-separated ids");
  suite_cmd->add_option("--out", suite_opt.out_path, "Report CSV path");
  suite_cmd->add_option("--jobs", suite_opt.jobs, "Parallel solves")
      ->check(CLI::PositiveNumber);
  suite_cmd->add_flag("--no-timing", suite_opt.no_timing,
                      "Write wall_ms as 0 for reproducible reports");

  CheckGradOptions grad_opt;
  auto* grad_cmd =
      app.add_subcommand("check-grad", "Finite-difference gradient check");
  grad_cmd->add_option("--problem", grad_opt.problem, "ex1 .. ex10")
      ->required();
  grad_cmd->add_option("--n", grad_opt.n, "Dimension")->required();
  grad_cmd->add_option("--seed", grad_opt.seed, "Random seed");
  grad_cmd->add_option("--points", grad_opt.points, "Number of test points")
      ->check(CLI::PositiveNumber);

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("eptctr");
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*solve_cmd) {
      return cmd_solve(solve_opt, out, err);
    }
    if (*suite_cmd) {
      return cmd_suite(suite_opt, out, err);
    }
    return cmd_check_grad(grad_opt, out, err);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace eptctr::cli
