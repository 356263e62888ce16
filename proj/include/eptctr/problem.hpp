#pragma once

#include <functional>
#include <optional>
#include <string>

#include "eptctr/qr_projection.hpp"

namespace eptctr {

/**
 * Smooth objective with analytic gradient. Both callbacks must be safe for
 * concurrent read-only use.
 */
struct Objective {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

/**
 * min f(x) subject to A·x = b, started from x0.
 */
struct Problem {
  std::string name;
  Objective objective;
  ConstraintSystem cs;
  Vector x0;
  /// Reference optimal value, when one is known.
  std::optional<double> known_f_star;

  Eigen::Index n() const { return cs.cols(); }
  Eigen::Index m() const { return cs.rows(); }
};

}  // namespace eptctr
