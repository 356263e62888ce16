#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "eptctr/error.hpp"
#include "eptctr/problem.hpp"
#include "eptctr/qr_projection.hpp"

namespace eptctr {

/**
 * The ten separable benchmark problems. Each objective is a sum of identical
 * block functions over consecutive coordinates plus a constant; the
 * constraints repeat one small coefficient block along the diagonal.
 */
enum class ExampleId { Ex1 = 1, Ex2, Ex3, Ex4, Ex5, Ex6, Ex7, Ex8, Ex9, Ex10 };

inline constexpr std::array<ExampleId, 10> kAllExamples{
    ExampleId::Ex1, ExampleId::Ex2, ExampleId::Ex3, ExampleId::Ex4,
    ExampleId::Ex5, ExampleId::Ex6, ExampleId::Ex7, ExampleId::Ex8,
    ExampleId::Ex9, ExampleId::Ex10};

namespace suite_detail {

using BlockValue = double (*)(std::span<const double>);
using BlockGradient = void (*)(std::span<const double>, std::span<double>);

struct ConstraintRow {
  std::array<double, 3> coeffs{};
  double rhs = 0.0;
};

struct ExampleSpec {
  std::string_view name;
  int obj_block = 1;
  double constant = 0.0;
  BlockValue value = nullptr;
  BlockGradient gradient = nullptr;
  int con_block = 1;
  std::vector<ConstraintRow> rows;
  /// Start point: `pattern` tiled over x when `tile`, otherwise followed by 0.
  std::vector<double> pattern;
  bool tile = true;
  int64_t paper_n = 0;
  /// Reference f(x*) and accepted steps from the published results table.
  std::optional<double> table_f;
  int table_steps = 0;
};

inline double sq(double v) { return v * v; }

inline const ExampleSpec& spec(ExampleId id) {
  static const std::array<ExampleSpec, 10> specs = [] {
    std::array<ExampleSpec, 10> s;
    // x² + 10y², x + y = 4
    s[0] = {.name = "ex1",
            .obj_block = 2,
            .value = [](std::span<const double> x) {
              return sq(x[0]) + 10.0 * sq(x[1]);
            },
            .gradient =
                [](std::span<const double> x, std::span<double> g) {
                  g[0] = 2.0 * x[0];
                  g[1] = 20.0 * x[1];
                },
            .con_block = 2,
            .rows = {{{1.0, 1.0, 0.0}, 4.0}},
            .pattern = {2.0, 2.0},
            .paper_n = 5000,
            .table_f = 3.64e4,
            .table_steps = 11};
    // (x − 2)² + 2(y − 1)⁴ over pairs, constant −5; triples with 1,4,2 = 3
    s[1] = {.name = "ex2",
            .obj_block = 2,
            .constant = -5.0,
            .value = [](std::span<const double> x) {
              return sq(x[0] - 2.0) + 2.0 * sq(sq(x[1] - 1.0));
            },
            .gradient =
                [](std::span<const double> x, std::span<double> g) {
                  g[0] = 2.0 * (x[0] - 2.0);
                  g[1] = 8.0 * std::pow(x[1] - 1.0, 3);
                },
            .con_block = 3,
            .rows = {{{1.0, 4.0, 2.0}, 3.0}},
            .pattern = {-0.5, 1.5, 1.0},
            .tile = false,
            .paper_n = 4800,
            .table_f = 5.78e3,
            .table_steps = 15};
    // ‖x‖², two rows per triple
    s[2] = {.name = "ex3",
            .obj_block = 3,
            .value = [](std::span<const double> x) {
              return sq(x[0]) + sq(x[1]) + sq(x[2]);
            },
            .gradient =
                [](std::span<const double> x, std::span<double> g) {
                  g[0] = 2.0 * x[0];
                  g[1] = 2.0 * x[1];
                  g[2] = 2.0 * x[2];
                },
            .con_block = 3,
            .rows = {{{1.0, 2.0, 1.0}, 1.0}, {{2.0, -1.0, -3.0}, 4.0}},
            .pattern = {1.0, 0.5, -1.0},
            .paper_n = 4800,
            .table_f = 2.86e3,
            .table_steps = 12};
    // x² + y⁶, constant −1; x + y = 1
    s[3] = {.name = "ex4",
            .obj_block = 2,
            .constant = -1.0,
            .value = [](std::span<const double> x) {
              return sq(x[0]) + std::pow(x[1], 6);
            },
            .gradient =
                [](std::span<const double> x, std::span<double> g) {
                  g[0] = 2.0 * x[0];
                  g[1] = 6.0 * std::pow(x[1], 5);
                },
            .con_block = 2,
            .rows = {{{1.0, 1.0, 0.0}, 1.0}},
            .pattern = {1.0, 1.0},
            .paper_n = 5000,
            .table_f = 493.79,
            .table_steps = 11};
    // (x − 2)⁴ + 2(y − 1)⁶, constant −5; x + 4y = 3
    s[4] = {.name = "ex5",
            .obj_block = 2,
            .constant = -5.0,
            .value = [](std::span<const double> x) {
              return std::pow(x[0] - 2.0, 4) + 2.0 * std::pow(x[1] - 1.0, 6);
            },
            .gradient =
                [](std::span<const double> x, std::span<double> g) {
                  g[0] = 4.0 * std::pow(x[0] - 2.0, 3);
                  g[1] = 12.0 * std::pow(x[1] - 1.0, 5);
                },
            .con_block = 2,
            .rows = {{{1.0, 4.0, 0.0}, 3.0}},
            .pattern = {-1.0, 1.0},
            .paper_n = 5000,
            .table_f = 432.15,
            .table_steps = 13};
    // x² + y⁴ + z⁶, same constraints as ex3
    s[5] = {.name = "ex6",
            .obj_block = 3,
            .value = [](std::span<const double> x) {
              return sq(x[0]) + std::pow(x[1], 4) + std::pow(x[2], 6);
            },
            .gradient =
                [](std::span<const double> x, std::span<double> g) {
                  g[0] = 2.0 * x[0];
                  g[1] = 4.0 * std::pow(x[1], 3);
                  g[2] = 6.0 * std::pow(x[2], 5);
                },
            .con_block = 3,
            .rows = {{{1.0, 2.0, 1.0}, 1.0}, {{2.0, -1.0, -3.0}, 4.0}},
            .pattern = {2.0},
            .tile = false,
            .paper_n = 4800,
            .table_f = 2.06e3,
            .table_steps = 15};
    // x⁴ + 3y², x + y = 4
    s[6] = {.name = "ex7",
            .obj_block = 2,
            .value = [](std::span<const double> x) {
              return std::pow(x[0], 4) + 3.0 * sq(x[1]);
            },
            .gradient =
                [](std::span<const double> x, std::span<double> g) {
                  g[0] = 4.0 * std::pow(x[0], 3);
                  g[1] = 6.0 * x[1];
                },
            .con_block = 2,
            .rows = {{{1.0, 1.0, 0.0}, 4.0}},
            .pattern = {2.0, 2.0},
            .tile = false,
            .paper_n = 5000,
            .table_f = 5.94e4,
            .table_steps = 13};
    // a² + a²c² + 2ab + b⁴ + 8b; 2a + 5b + c = 3. Nonconvex.
    s[7] = {.name = "ex8",
            .obj_block = 3,
            .value = [](std::span<const double> x) {
              const double a = x[0], b = x[1], c = x[2];
              return sq(a) + sq(a) * sq(c) + 2.0 * a * b + sq(sq(b)) + 8.0 * b;
            },
            .gradient =
                [](std::span<const double> x, std::span<double> g) {
                  const double a = x[0], b = x[1], c = x[2];
                  g[0] = 2.0 * a + 2.0 * a * sq(c) + 2.0 * b;
                  g[1] = 2.0 * a + 4.0 * b * b * b + 8.0;
                  g[2] = 2.0 * sq(a) * c;
                },
            .con_block = 3,
            .rows = {{{2.0, 5.0, 1.0}, 3.0}},
            .pattern = {1.5},
            .tile = false,
            .paper_n = 4800,
            .table_f = std::nullopt,
            .table_steps = 133};
    // x⁴ + 10y⁶, x + y = 4
    s[8] = {.name = "ex9",
            .obj_block = 2,
            .value = [](std::span<const double> x) {
              return std::pow(x[0], 4) + 10.0 * std::pow(x[1], 6);
            },
            .gradient =
                [](std::span<const double> x, std::span<double> g) {
                  g[0] = 4.0 * std::pow(x[0], 3);
                  g[1] = 60.0 * std::pow(x[1], 5);
                },
            .con_block = 2,
            .rows = {{{1.0, 1.0, 0.0}, 4.0}},
            .pattern = {2.0, 2.0},
            .paper_n = 5000,
            .table_f = 2.21e5,
            .table_steps = 8};
    // x⁸ + y⁶ + z², x + 2y + 2z = 1
    s[9] = {.name = "ex10",
            .obj_block = 3,
            .value = [](std::span<const double> x) {
              return std::pow(x[0], 8) + std::pow(x[1], 6) + sq(x[2]);
            },
            .gradient =
                [](std::span<const double> x, std::span<double> g) {
                  g[0] = 8.0 * std::pow(x[0], 7);
                  g[1] = 6.0 * std::pow(x[1], 5);
                  g[2] = 2.0 * x[2];
                },
            .con_block = 3,
            .rows = {{{1.0, 2.0, 2.0}, 1.0}},
            .pattern = {1.0, 0.0, 0.0},
            .paper_n = 4800,
            .table_f = 2.00,
            .table_steps = 20};
    return s;
  }();
  return specs[static_cast<int>(id) - 1];
}

inline int divisor(const ExampleSpec& s) {
  return std::lcm(s.obj_block, s.con_block);
}

}  // namespace suite_detail

inline std::string_view name(ExampleId id) {
  return suite_detail::spec(id).name;
}

/// Parses "ex1" … "ex10".
inline std::optional<ExampleId> parse_example_id(std::string_view text) {
  for (ExampleId id : kAllExamples) {
    if (name(id) == text) {
      return id;
    }
  }
  return std::nullopt;
}

/// n must be a positive multiple of this.
inline int dimension_divisor(ExampleId id) {
  return suite_detail::divisor(suite_detail::spec(id));
}

/// Dimension used for the published results table.
inline int64_t paper_dimension(ExampleId id) {
  return suite_detail::spec(id).paper_n;
}

/// Accepted steps reported in the published results table.
inline int table_steps(ExampleId id) { return suite_detail::spec(id).table_steps; }

/// Objective value reported in the published results table; none for ex8.
inline std::optional<double> table_f_star(ExampleId id) {
  return suite_detail::spec(id).table_f;
}

/// Number of coordinates per objective block.
inline int objective_block_size(ExampleId id) {
  return suite_detail::spec(id).obj_block;
}

inline bool valid_dimension(ExampleId id, int64_t n) {
  return n > 0 && n % dimension_divisor(id) == 0;
}

/// Number of constraints for dimension n.
inline int64_t constraint_count(ExampleId id, int64_t n) {
  const auto& s = suite_detail::spec(id);
  return static_cast<int64_t>(s.rows.size()) * (n / s.con_block);
}

/**
 * Evaluates the objective one block at a time.
 */
inline double block_objective_value(ExampleId id, const Vector& x) {
  const auto& s = suite_detail::spec(id);
  double f = s.constant;
  for (Eigen::Index i = 0; i + s.obj_block <= x.size(); i += s.obj_block) {
    f += s.value(std::span<const double>{x.data() + i,
                                         static_cast<size_t>(s.obj_block)});
  }
  return f;
}

/**
 * Builds benchmark problem `id` in dimension n. Throws BadDimension unless n
 * is a positive multiple of dimension_divisor(id).
 */
inline Problem build(ExampleId id, int64_t n) {
  const auto& s = suite_detail::spec(id);
  if (!valid_dimension(id, n)) {
    throw Error{ErrorKind::BadDimension,
                std::string{s.name} + " needs n divisible by " +
                    std::to_string(suite_detail::divisor(s)) + ", got " +
                    std::to_string(n)};
  }

  const int64_t blocks = n / s.con_block;
  const auto rows_per_block = static_cast<int64_t>(s.rows.size());
  const int64_t m = blocks * rows_per_block;

  std::vector<Eigen::Triplet<double>> triplets;
  Vector b(m);
  for (int64_t blk = 0; blk < blocks; ++blk) {
    for (int64_t r = 0; r < rows_per_block; ++r) {
      const auto& row = s.rows[static_cast<size_t>(r)];
      const int64_t i = blk * rows_per_block + r;
      for (int c = 0; c < s.con_block; ++c) {
        if (row.coeffs[static_cast<size_t>(c)] != 0.0) {
          triplets.emplace_back(i, blk * s.con_block + c,
                                row.coeffs[static_cast<size_t>(c)]);
        }
      }
      b(i) = row.rhs;
    }
  }
  SparseMatrix A(m, n);
  A.setFromTriplets(triplets.begin(), triplets.end());

  Vector x0 = Vector::Zero(n);
  const auto p = static_cast<int64_t>(s.pattern.size());
  for (int64_t i = 0; i < n; ++i) {
    if (s.tile) {
      x0(i) = s.pattern[static_cast<size_t>(i % p)];
    } else if (i < p) {
      x0(i) = s.pattern[static_cast<size_t>(i)];
    }
  }

  Objective objective;
  objective.value = [id](const Vector& x) {
    return block_objective_value(id, x);
  };
  objective.gradient = [&s](const Vector& x) {
    Vector g(x.size());
    const auto len = static_cast<size_t>(s.obj_block);
    for (Eigen::Index i = 0; i + s.obj_block <= x.size(); i += s.obj_block) {
      s.gradient(std::span<const double>{x.data() + i, len},
                 std::span<double>{g.data() + i, len});
    }
    return g;
  };

  Problem problem;
  problem.name = std::string{s.name};
  problem.objective = std::move(objective);
  problem.cs = ConstraintSystem{std::move(A), std::move(b)};
  problem.x0 = std::move(x0);
  if (n == s.paper_n) {
    problem.known_f_star = s.table_f;
  }
  return problem;
}

enum class OptimumSource {
  /// Closed-form solution of the separable block problem.
  Analytic,
  /// Value reported in the published results table at the paper dimension.
  Reference,
};

struct KnownOptimum {
  /// Optimal values of one block, tiled over x. Only for Analytic entries.
  std::optional<std::vector<double>> x_pattern;
  double f_star = 0.0;
  OptimumSource source = OptimumSource::Analytic;
};

/**
 * Closed-form optima for ex1 and ex3; the published reference value for the
 * other convex-looking examples at their paper dimension; none for ex8.
 */
inline std::optional<KnownOptimum> known_optima(ExampleId id, int64_t n) {
  if (!valid_dimension(id, n)) {
    return std::nullopt;
  }
  const double nd = static_cast<double>(n);
  switch (id) {
    case ExampleId::Ex1:
      // 2x = 20y on x + y = 4
      return KnownOptimum{.x_pattern = std::vector{40.0 / 11.0, 4.0 / 11.0},
                          .f_star = nd / 2.0 * 160.0 / 11.0,
                          .source = OptimumSource::Analytic};
    case ExampleId::Ex3:
      // least-norm solution Aᵀ(AAᵀ)⁻¹b of one block
      return KnownOptimum{
          .x_pattern = std::vector{16.0 / 15.0, 1.0 / 3.0, -11.0 / 15.0},
          .f_star = nd / 3.0 * (10050.0 / 5625.0),
          .source = OptimumSource::Analytic};
    case ExampleId::Ex8:
      return std::nullopt;
    default:
      break;
  }
  const auto& s = suite_detail::spec(id);
  if (n != s.paper_n || !s.table_f) {
    return std::nullopt;
  }
  return KnownOptimum{.x_pattern = std::nullopt,
                      .f_star = *s.table_f,
                      .source = OptimumSource::Reference};
}

struct GradientCheckReport {
  /// Max over all points and coordinates of |fd − g| / max(1, |g|).
  double max_rel_error = 0.0;
  /// The same maximum split by position within an objective block.
  std::vector<double> per_block_position;
  int num_points = 0;
};

/**
 * Compares the analytic gradient with central differences, step
 * h = 1e-6·(1 + |xᵢ|), at seeded feasible points x0ᶠ + P·u with u uniform in
 * [−½, ½]ⁿ. The first point is x0ᶠ itself.
 */
inline GradientCheckReport gradient_check(const Problem& problem,
                                          int block_size, int num_points,
                                          uint64_t seed) {
  const Projector projector{problem.cs};
  const Vector base = projector.make_feasible(problem.x0);
  const Eigen::Index n = problem.n();
  std::mt19937_64 rng{seed};
  std::uniform_real_distribution<double> unif{-0.5, 0.5};

  GradientCheckReport report;
  report.per_block_position.assign(static_cast<size_t>(block_size), 0.0);
  report.num_points = num_points;
  for (int p = 0; p < num_points; ++p) {
    Vector x = base;
    if (p > 0) {
      Vector u(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        u(i) = unif(rng);
      }
      x += projector.project_gradient(u);
    }
    const Vector g = problem.objective.gradient(x);
    Vector xp = x;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double h = 1e-6 * (1.0 + std::abs(x(i)));
      xp(i) = x(i) + h;
      const double f_plus = problem.objective.value(xp);
      xp(i) = x(i) - h;
      const double f_minus = problem.objective.value(xp);
      xp(i) = x(i);
      const double fd = (f_plus - f_minus) / (2.0 * h);
      const double err = std::abs(fd - g(i)) / std::max(1.0, std::abs(g(i)));
      auto& slot = report.per_block_position[static_cast<size_t>(i % block_size)];
      slot = std::max(slot, err);
      report.max_rel_error = std::max(report.max_rel_error, err);
    }
  }
  return report;
}

inline GradientCheckReport gradient_check(ExampleId id, int64_t n,
                                          int num_points, uint64_t seed) {
  return gradient_check(build(id, n), objective_block_size(id), num_points,
                        seed);
}

}  // namespace eptctr
