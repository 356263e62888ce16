#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "eptctr/error.hpp"
#include "eptctr/lbfgs_direction.hpp"
#include "eptctr/problem.hpp"
#include "eptctr/qr_projection.hpp"

namespace eptctr {

/**
 * Tunable constants of the explicit continuation method with trust-region
 * time-stepping.
 */
struct SolverConfig {
  /// Termination tolerance on ‖P·g‖∞.
  double eps = 1e-6;
  /// Initial time step Δt₀.
  double dt0 = 1e-2;
  /// A trial step is accepted when ρ > eta_a.
  double eta_a = 1e-6;
  /// Δt grows by gamma1 when |1 − ρ| ≤ eta1.
  double eta1 = 0.25;
  double gamma1 = 2.0;
  /// Δt shrinks by gamma2 when |1 − ρ| ≥ eta2.
  double eta2 = 0.75;
  double gamma2 = 0.5;
  /// Curvature gate threshold.
  double theta = 1e-6;
  int64_t max_iter = 10000;
  int64_t max_fun_evals = 50000;
  double dt_min = 1e-16;
  double dt_max = 1e16;

  void validate() const {
    auto fail = [](const std::string& what) {
      throw Error{ErrorKind::InvalidConfig, what};
    };
    if (!(0.0 < eta_a && eta_a < eta1 && eta1 < eta2 && eta2 < 1.0)) {
      fail("need 0 < eta_a < eta1 < eta2 < 1");
    }
    if (!(gamma1 > 1.0)) {
      fail("need gamma1 > 1");
    }
    if (!(0.0 < gamma2 && gamma2 < 1.0)) {
      fail("need 0 < gamma2 < 1");
    }
    if (!(eps > 0.0)) {
      fail("need eps > 0");
    }
    if (!(theta > 0.0)) {
      fail("need theta > 0");
    }
    if (!(0.0 < dt_min && dt_min <= dt0 && dt0 <= dt_max)) {
      fail("need 0 < dt_min <= dt0 <= dt_max");
    }
    if (max_iter < 0 || max_fun_evals < 1) {
      fail("iteration caps must be non-negative");
    }
  }
};

enum class SolveStatus {
  Converged,
  MaxIterations,
  MaxEvaluations,
  StalledTimeStep,
  NumericalError,
};

constexpr std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged:
      return "Converged";
    case SolveStatus::MaxIterations:
      return "MaxIterations";
    case SolveStatus::MaxEvaluations:
      return "MaxEvaluations";
    case SolveStatus::StalledTimeStep:
      return "StalledTimeStep";
    case SolveStatus::NumericalError:
      return "NumericalError";
  }
  return "Unknown";
}

/**
 * One pass through the main loop. f, the projected-gradient norms and dt
 * describe the iterate the trial step was taken from.
 */
struct IterationRecord {
  int64_t k = 0;
  double f = 0.0;
  double pg_norm_inf = 0.0;
  double pg_norm_2 = 0.0;
  double dt = 0.0;
  double rho = 0.0;
  bool accepted = false;
  /// m_k(0) − m_k(s_k)
  double model_decrease = 0.0;
};

/**
 * Iterate state at the start of a loop iteration.
 */
struct SolverState {
  int64_t k = 0;
  Vector x;
  double f = 0.0;
  Vector g;
  Vector pg;
  CurvaturePair pair;
  double dt = 0.0;
  int64_t n_f = 0;
  int64_t n_g = 0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalError;
  Vector x_star;
  double f_star = std::numeric_limits<double>::quiet_NaN();
  Vector lambda_star;
  double kkt_inf = std::numeric_limits<double>::quiet_NaN();
  double feas_inf = std::numeric_limits<double>::quiet_NaN();
  /// Accepted iterations.
  int64_t steps = 0;
  /// Loop iterations, accepted or not.
  int64_t total_iters = 0;
  int64_t n_f = 0;
  int64_t n_g = 0;
  std::vector<IterationRecord> history;
};

/**
 * Called once per loop iteration, after the acceptance decision and before
 * the time step is adapted. The state is the iterate the trial started from.
 */
using IterationCallback =
    std::function<void(const IterationRecord&, const SolverState&)>;

/// (Δt/(1+Δt))·d
inline Vector trial_step(double dt, const Vector& d) {
  return (dt / (1.0 + dt)) * d;
}

/// m_k(0) − m_k(s) = −(1 + Δt/2)/(1 + Δt)·gᵀs
inline double model_decrease(double dt, const Vector& g, const Vector& s) {
  detail::require_size(s.size(), g.size(), "s");
  return -(1.0 + 0.5 * dt) / (1.0 + dt) * g.dot(s);
}

/// Actual over predicted reduction; −∞ whenever the quotient is not usable.
inline double ratio(double f_old, double f_new, double md) {
  constexpr double kReject = -std::numeric_limits<double>::infinity();
  if (!(md > 0.0) || !std::isfinite(md)) {
    return kReject;
  }
  const double rho = (f_old - f_new) / md;
  return std::isfinite(rho) ? rho : kReject;
}

/**
 * ratio() with both reductions shifted by δ = 10·ε·max(1, |f_old|) when the
 * trial does not increase f.
 *
 * Once the predicted decrease drops to the rounding level of f, the plain
 * quotient is noise and would drive Δt to dt_min; the shift sends ρ towards 1
 * in that regime and leaves it unchanged otherwise. A trial with f_new > f_old
 * keeps the plain (negative) quotient, so it is always rejected.
 */
inline double guarded_ratio(double f_old, double f_new, double md) {
  if (!std::isfinite(f_new)) {
    return -std::numeric_limits<double>::infinity();
  }
  if (f_new > f_old) {
    return ratio(f_old, f_new, md);
  }
  const double delta = 10.0 * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, std::abs(f_old));
  return ratio(f_old + delta, f_new, md + delta);
}

inline double update_dt(double dt, double rho, const SolverConfig& cfg) {
  const double dev = std::abs(1.0 - rho);
  double next = dt;
  if (dev <= cfg.eta1) {
    next = cfg.gamma1 * dt;
  } else if (dev >= cfg.eta2 || std::isnan(dev)) {
    next = cfg.gamma2 * dt;
  }
  return std::clamp(next, cfg.dt_min, cfg.dt_max);
}

/// Lower bound on the model decrease guaranteed by the eigenvalue bound of H.
inline double model_decrease_lower_bound(double dt, double pg_norm_2) {
  return dt / (4.0 * (1.0 + dt)) * pg_norm_2 * pg_norm_2;
}

/// Feasibility drift allowed on iterates after the initial projection.
inline double feasibility_tolerance(const ConstraintSystem& cs) {
  return 1e-9 * (1.0 + cs.b.lpNorm<Eigen::Infinity>());
}

namespace detail {

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace detail

/**
 * Minimizes the problem's objective on {x : Ax = b}.
 *
 * The start point is projected onto the feasible set; every later step lies in
 * null(A), so iterates stay feasible up to rounding. Trial steps
 * s = −(Δt/(1+Δt))·H·P·g are accepted when the actual-to-predicted reduction
 * ratio exceeds eta_a, and Δt is adapted from that ratio like a trust radius.
 */
inline SolveResult solve(const Problem& problem, const SolverConfig& cfg = {},
                         const IterationCallback& callback = {}) {
  cfg.validate();
  detail::require_size(problem.x0.size(), problem.n(), "x0");
  const auto& cs = problem.cs;
  const Projector projector{cs};

  SolveResult result;
  SolverState st;
  st.x = projector.make_feasible(problem.x0);
  st.f = problem.objective.value(st.x);
  st.n_f = 1;
  st.dt = cfg.dt0;

  auto finish = [&](SolveStatus status) {
    result.status = status;
    result.x_star = st.x;
    result.f_star = st.f;
    result.n_f = st.n_f;
    result.n_g = st.n_g;
    result.total_iters = st.k;
    if (st.g.size() == st.x.size() && detail::all_finite(st.g)) {
      result.lambda_star = projector.multipliers(st.g);
      const Residuals res = projector.residuals(cs, st.x, st.g);
      result.kkt_inf = res.kkt_inf;
      result.feas_inf = res.feas_inf;
    } else {
      result.lambda_star = Vector::Constant(
          problem.m(), std::numeric_limits<double>::quiet_NaN());
      result.feas_inf = cs.violation_inf(st.x);
    }
    return result;
  };

  if (!std::isfinite(st.f)) {
    return finish(SolveStatus::NumericalError);
  }
  st.g = problem.objective.gradient(st.x);
  st.n_g = 1;
  detail::require_size(st.g.size(), problem.n(), "gradient");
  if (!detail::all_finite(st.g)) {
    return finish(SolveStatus::NumericalError);
  }
  st.pg = projector.project_gradient(st.g);

  int64_t stalled = 0;
  while (st.pg.lpNorm<Eigen::Infinity>() > cfg.eps) {
    if (st.k >= cfg.max_iter) {
      return finish(SolveStatus::MaxIterations);
    }
    if (st.n_f >= cfg.max_fun_evals) {
      return finish(SolveStatus::MaxEvaluations);
    }

    const Vector d = direction(st.pg, st.pair, cfg.theta);
    Vector s = trial_step(st.dt, d);
    const double md = model_decrease(st.dt, st.g, s);
    const double pg_norm_2 = st.pg.norm();
    assert(md >= model_decrease_lower_bound(st.dt, pg_norm_2) -
                     1e-12 * std::max(1.0, md));

    Vector x_trial = st.x + s;
    const double f_trial = problem.objective.value(x_trial);
    ++st.n_f;
    const double rho = guarded_ratio(st.f, f_trial, md);
    const bool accepted = rho > cfg.eta_a;

    IterationRecord rec{.k = st.k,
                        .f = st.f,
                        .pg_norm_inf = st.pg.lpNorm<Eigen::Infinity>(),
                        .pg_norm_2 = pg_norm_2,
                        .dt = st.dt,
                        .rho = rho,
                        .accepted = accepted,
                        .model_decrease = md};
    result.history.push_back(rec);
    if (callback) {
      callback(rec, st);
    }

    if (accepted) {
      Vector g_new = problem.objective.gradient(x_trial);
      ++st.n_g;
      if (!detail::all_finite(g_new)) {
        // Report the last iterate with a usable gradient.
        ++st.k;
        return finish(SolveStatus::NumericalError);
      }
      Vector pg_new = projector.project_gradient(g_new);
      // The retained pair always comes from the same accepted step.
      st.pair = CurvaturePair{std::move(s), pg_new - st.pg};
      st.x = std::move(x_trial);
      st.f = f_trial;
      st.g = std::move(g_new);
      st.pg = std::move(pg_new);
      ++result.steps;
    }

    st.dt = update_dt(st.dt, rho, cfg);
    ++st.k;

    if (!accepted && st.dt <= cfg.dt_min) {
      if (++stalled >= 50) {
        return finish(SolveStatus::StalledTimeStep);
      }
    } else {
      stalled = 0;
    }
  }
  return finish(SolveStatus::Converged);
}

}  // namespace eptctr
