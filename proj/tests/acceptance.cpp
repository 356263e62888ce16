// Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
// if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "bench_cli.hpp"
#include "eptctr/eptctr.hpp"
#include "oracles.hpp"

using namespace eptctr;
using test::Rng;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) {
      detail = why;
    }
    pass = false;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Rounds to three significant digits.
double sig3(double v) {
  if (v == 0.0) {
    return 0.0;
  }
  const double scale = std::pow(10.0, 2 - std::floor(std::log10(std::abs(v))));
  return std::round(v * scale) / scale;
}

Verdict projector_suite() {
  Verdict v;
  const auto start = Clock::now();
  Rng rng{1};
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = rng.integer(2, 50);
    const auto m = rng.integer(1, n - 1);
    const Matrix A = rng.full_rank(m, n);
    const Projector p{ConstraintSystem{A, rng.vector(m)}};
    const Vector g = rng.vector(n);
    const double gn = g.norm();
    const Vector pg = p.project_gradient(g);
    if ((p.project_gradient(pg) - pg).norm() > 1e-10 * gn) {
      v.fail("idempotence, trial " + std::to_string(trial));
    }
    if ((A * pg).norm() > 1e-10 * gn) {
      v.fail("A·Pg, trial " + std::to_string(trial));
    }
    if (pg.norm() > gn * (1 + 1e-12)) {
      v.fail("norm growth, trial " + std::to_string(trial));
    }
    if ((pg - test::dense_projector(A) * g).norm() > 1e-9 * gn) {
      v.fail("dense oracle, trial " + std::to_string(trial));
    }
  }
  const double secs = seconds_since(start);
  if (secs >= 5.0) {
    v.fail("runtime " + fmt(secs) + " s");
  }
  if (v.pass) {
    v.detail = "200 instances in " + fmt(secs) + " s";
  }
  return v;
}

Verdict spectral_suite() {
  Verdict v;
  const auto start = Clock::now();
  Rng rng{2};
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = rng.integer(3, 50);
    const Matrix H = dense_h(rng.gated_pair(n), 1e-6, n);
    const std::string tag = ", trial " + std::to_string(trial);
    if ((H - H.transpose()).norm() > 1e-14 * H.norm()) {
      v.fail("asymmetric" + tag);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
    std::vector<double> others;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mu = eig.eigenvalues()(i);
      if (mu <= 0.5 - 1e-8) {
        v.fail("eigenvalue " + fmt(mu) + tag);
      }
      if (std::abs(mu - 1.0) > 1e-8) {
        others.push_back(mu);
      }
    }
    if (others.size() > 2) {
      v.fail(std::to_string(others.size()) + " non-unit eigenvalues" + tag);
      continue;
    }
    while (others.size() < 2) {
      others.push_back(1.0);
    }
    const double sum = 1.0 / others[0] + 1.0 / others[1];
    if (std::abs(sum - 2.0) > 1e-8) {
      v.fail("1/mu1 + 1/mu2 = " + fmt(sum) + tag);
    }
  }
  const double secs = seconds_since(start);
  if (secs >= 5.0) {
    v.fail("runtime " + fmt(secs) + " s");
  }
  if (v.pass) {
    v.detail = "200 pairs in " + fmt(secs) + " s";
  }
  return v;
}

Verdict direction_oracle() {
  Verdict v;
  Rng rng{3};
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = rng.integer(2, 50);
    const CurvaturePair pair = rng.gated_pair(n);
    const Vector pg = rng.vector(n);
    const Vector d = direction(pg, pair, 1e-6);
    const Vector oracle = -(dense_h(pair, 1e-6, n) * pg);
    const std::string tag = ", trial " + std::to_string(trial);
    if ((d - oracle).norm() > 1e-12 * std::max(1.0, oracle.norm())) {
      v.fail("oracle mismatch " + fmt((d - oracle).norm()) + tag);
    }
    const double pp = pg.squaredNorm();
    if (d.dot(pg) > -0.5 * pp + 1e-10 * pp) {
      v.fail("descent margin" + tag);
    }
  }
  if (v.pass) {
    v.detail = "500 instances";
  }
  return v;
}

Verdict closed_form(std::map<std::pair<ExampleId, int64_t>, cli::SuiteRow>& cache) {
  Verdict v;
  std::string summary;
  auto check = [&](ExampleId id, int64_t n) {
    const auto it = cache.find({id, n});
    const cli::SuiteRow row =
        it != cache.end() ? it->second : cli::run_problem(id, n, SolverConfig{});
    cache[{id, n}] = row;
    const double expected = known_optima(id, n)->f_star;
    const double rel = std::abs(row.f_star - expected) / std::abs(expected);
    const std::string tag = std::string{name(id)} + " n=" + std::to_string(n);
    if (row.status != SolveStatus::Converged) {
      v.fail(tag + " " + std::string{to_string(row.status)});
    } else if (rel > 1e-6) {
      v.fail(tag + " rel error " + fmt(rel));
    }
    summary += (summary.empty() ? "" : ", ") + tag + " rel " + fmt(rel);
  };
  for (int64_t n : {2, 120, 5000}) {
    check(ExampleId::Ex1, n);
  }
  for (int64_t n : {3, 120, 4800}) {
    check(ExampleId::Ex3, n);
  }
  if (v.pass) {
    v.detail = summary;
  }
  return v;
}

Verdict table_reproduction(
    const std::map<std::pair<ExampleId, int64_t>, cli::SuiteRow>& cache,
    double total_secs) {
  Verdict v;
  std::string summary;
  for (ExampleId id : kAllExamples) {
    const auto& row = cache.at({id, paper_dimension(id)});
    const std::string tag{name(id)};
    if (row.status != SolveStatus::Converged) {
      v.fail(tag + " " + std::string{to_string(row.status)});
      continue;
    }
    if (id == ExampleId::Ex8) {
      if (row.kkt_inf > 1e-6 || row.feas_inf > 1e-6) {
        v.fail(tag + " not a KKT point");
      }
      summary += " " + tag + "=" + fmt(row.f_star) + "(unchecked)";
      continue;
    }
    const double table = *table_f_star(id);
    summary += " " + tag + "=" + fmt(sig3(row.f_star));
    if (sig3(row.f_star) != sig3(table)) {
      v.fail(tag + " f* " + fmt(row.f_star) + " vs table " + fmt(table));
    }
  }
  if (total_secs >= 120.0) {
    v.fail("total runtime " + fmt(total_secs) + " s");
  }
  if (v.pass) {
    v.detail = "in " + fmt(total_secs) + " s:" + summary;
  } else {
    v.detail += " (runtime " + fmt(total_secs) + " s;" + summary + ")";
  }
  return v;
}

Verdict step_counts(
    const std::map<std::pair<ExampleId, int64_t>, cli::SuiteRow>& cache) {
  Verdict v;
  std::string summary;
  for (ExampleId id : kAllExamples) {
    if (id == ExampleId::Ex8) {
      continue;
    }
    const auto& row = cache.at({id, paper_dimension(id)});
    const int64_t hi = 3 * table_steps(id);
    summary += " " + std::string{name(id)} + "=" +
               std::to_string(row.accepted_steps) + "/" + std::to_string(hi);
    if (row.accepted_steps < 3 || row.accepted_steps > hi) {
      v.fail(std::string{name(id)} + " took " +
             std::to_string(row.accepted_steps) + " steps, band [3, " +
             std::to_string(hi) + "]");
    }
  }
  if (v.pass) {
    v.detail = "steps/limit:" + summary;
  }
  return v;
}

Verdict invariants() {
  Verdict v;
  const SolverConfig cfg;
  int64_t iterations = 0;
  double worst_vs_g = 0.0;
  double worst_vs_pg = 0.0;
  for (ExampleId id : kAllExamples) {
    const Problem p = build(id, 120);
    const Projector proj{p.cs};
    const double feas_tol = feasibility_tolerance(p.cs);
    double last_f = std::numeric_limits<double>::infinity();
    const std::string tag{name(id)};
    const SolveResult r =
        solve(p, cfg, [&](const IterationRecord& rec, const SolverState& st) {
          ++iterations;
          const std::string at = tag + " k=" + std::to_string(rec.k);
          if (p.cs.violation_inf(st.x) > feas_tol) {
            v.fail(at + " infeasible");
          }
          if (rec.f > last_f) {
            v.fail(at + " f increased");
          }
          last_f = rec.f;
          if (rec.model_decrease <
              model_decrease_lower_bound(rec.dt, rec.pg_norm_2) - 1e-12) {
            v.fail(at + " model decrease below bound");
          }
          // Both quantities come out of cancellation against g, so their
          // agreement is measured on the scale of g.
          const double kkt = proj.residuals(p.cs, st.x, st.g).kkt_inf;
          const double diff = std::abs(kkt - rec.pg_norm_inf);
          const double g_inf = st.g.lpNorm<Eigen::Infinity>();
          worst_vs_g = std::max(worst_vs_g, diff / std::max(1.0, g_inf));
          worst_vs_pg =
              std::max(worst_vs_pg, diff / std::max(kkt, rec.pg_norm_inf));
          if (diff > 1e-9 * std::max(1.0, g_inf)) {
            v.fail(at + " kkt_inf " + fmt(kkt) + " vs " + fmt(rec.pg_norm_inf));
          }
        });
    if (r.f_star > last_f) {
      v.fail(tag + " final f increased");
    }
    if (r.feas_inf > feas_tol) {
      v.fail(tag + " final point infeasible");
    }
  }
  if (v.pass) {
    v.detail = std::to_string(iterations) +
               " iterations checked; max |kkt_inf - pg_inf| is " +
               fmt(worst_vs_g) + " of |g|_inf, " + fmt(worst_vs_pg) +
               " of pg_inf";
  }
  return v;
}

Verdict gradient_checks() {
  Verdict v;
  for (ExampleId id : kAllExamples) {
    std::ostringstream out, err;
    const int code = cli::run({"check-grad", "--problem", std::string{name(id)},
                               "--n", "120"},
                              out, err);
    if (code != cli::kExitOk) {
      v.fail(std::string{name(id)} + " exit " + std::to_string(code));
    }
  }
  if (v.pass) {
    v.detail = "all ten examples at n=120";
  }
  return v;
}

Verdict infeasible_starts() {
  Verdict v;
  for (ExampleId id : {ExampleId::Ex2, ExampleId::Ex3, ExampleId::Ex4,
                       ExampleId::Ex6, ExampleId::Ex7, ExampleId::Ex8}) {
    const Problem p = build(id, 120);
    const Projector proj{p.cs};
    const Vector xf = proj.make_feasible(p.x0);
    const Matrix A{p.cs.A};
    const Vector oracle = test::dense_feasible(A, p.cs.b, p.x0);
    const double tol = 1e-10 * (1 + p.cs.b.lpNorm<Eigen::Infinity>());
    const std::string tag{name(id)};
    if (p.cs.violation_inf(xf) > tol) {
      v.fail(tag + " feas_inf " + fmt(p.cs.violation_inf(xf)));
    }
    if ((xf - oracle).norm() > 1e-9 * std::max(1.0, oracle.norm())) {
      v.fail(tag + " oracle distance " + fmt((xf - oracle).norm()));
    }
  }
  if (v.pass) {
    v.detail = "six infeasible starts projected";
  }
  return v;
}

Verdict determinism() {
  Verdict v;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "eptctr_acceptance";
  fs::create_directories(dir);
  std::string csv[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path path = dir / ("suite" + std::to_string(i) + ".csv");
    std::ostringstream out, err;
    const int code = cli::run({"suite", "--scale", "desk", "--no-timing",
                               "--out", path.string()},
                              out, err);
    if (code != cli::kExitOk) {
      v.fail("suite exit " + std::to_string(code) + ": " + err.str());
    }
    std::ifstream in{path, std::ios::binary};
    std::stringstream ss;
    ss << in.rdbuf();
    csv[i] = ss.str();
  }
  fs::remove_all(dir);
  if (csv[0].empty() || csv[0] != csv[1]) {
    v.fail("CSV outputs differ");
  }
  if (v.pass) {
    v.detail = std::to_string(csv[0].size()) + " identical bytes";
  }
  return v;
}

}  // namespace

int main() {
  std::map<std::pair<ExampleId, int64_t>, cli::SuiteRow> cache;

  std::vector<std::pair<std::string, Verdict>> results;
  auto report = [&](const std::string& label, Verdict v) {
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << label << ": "
              << v.detail << std::endl;
    results.emplace_back(label, std::move(v));
  };

  report("1 projector properties", projector_suite());
  report("2 spectral structure of H", spectral_suite());
  report("3 direction oracle", direction_oracle());

  // Paper-scale runs are shared by criteria 4, 5 and 6.
  const auto paper_start = Clock::now();
  for (ExampleId id : kAllExamples) {
    const int64_t n = paper_dimension(id);
    cache[{id, n}] = cli::run_problem(id, n, SolverConfig{});
  }
  const double paper_secs = seconds_since(paper_start);

  report("4 closed-form optima", closed_form(cache));
  report("5 results table at paper scale", table_reproduction(cache, paper_secs));
  report("6 accepted step band", step_counts(cache));
  report("7 solve invariants", invariants());
  report("8 gradient checks", gradient_checks());
  report("9 infeasible starts", infeasible_starts());
  report("10 deterministic suite CSV", determinism());

  int failed = 0;
  for (const auto& [label, v] : results) {
    failed += v.pass ? 0 : 1;
  }
  std::cout << (failed == 0 ? "ALL PASS" : std::to_string(failed) + " FAILED")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
