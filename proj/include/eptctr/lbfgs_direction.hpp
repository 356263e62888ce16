#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include <Eigen/Core>

#include "eptctr/error.hpp"
#include "eptctr/qr_projection.hpp"

namespace eptctr {

/**
 * The single retained curvature pair (s, y) of the last accepted step, with
 * the inner products yᵀs, yᵀy and sᵀs cached at construction.
 *
 * A default-constructed pair is empty and selects H = I.
 */
class CurvaturePair {
 public:
  CurvaturePair() = default;

  CurvaturePair(Vector s, Vector y) : s_{std::move(s)}, y_{std::move(y)} {
    detail::require_size(y_.size(), s_.size(), "y");
    ys_ = y_.dot(s_);
    yy_ = y_.squaredNorm();
    ss_ = s_.squaredNorm();
    present_ = true;
  }

  bool empty() const { return !present_; }
  Eigen::Index size() const { return s_.size(); }

  const Vector& s() const { return s_; }
  const Vector& y() const { return y_; }
  double ys() const { return ys_; }
  double yy() const { return yy_; }
  double ss() const { return ss_; }

 private:
  Vector s_;
  Vector y_;
  double ys_ = 0.0;
  double yy_ = 0.0;
  double ss_ = 0.0;
  bool present_ = false;
};

/**
 * Whether the quasi-Newton update is used: |sᵀy| > θ‖s‖².
 */
inline bool curvature_gate(const CurvaturePair& pair, double theta) {
  if (pair.empty() || pair.ss() == 0.0) {
    return false;
  }
  return std::abs(pair.ys()) > theta * pair.ss();
}

/**
 * d = −H·pg with
 *
 *   H = I − (ysᵀ + syᵀ)/(yᵀs) + 2(yᵀy)/(yᵀs)²·ssᵀ   if the gate passes,
 *   H = I                                          otherwise,
 *
 * evaluated with the two inner products sᵀpg and yᵀpg.
 */
inline Vector direction(const Vector& pg, const CurvaturePair& pair,
                        double theta) {
  if (!curvature_gate(pair, theta)) {
    return -pg;
  }
  detail::require_size(pg.size(), pair.size(), "pg");

  const double s_pg = pair.s().dot(pg);
  const double y_pg = pair.y().dot(pg);
  const double inv_ys = 1.0 / pair.ys();

  Vector d = -pg;
  d += (s_pg * inv_ys) * pair.y();
  d += (y_pg * inv_ys - 2.0 * pair.yy() * s_pg * inv_ys * inv_ys) * pair.s();
  return d;
}

/**
 * Dense H for the pair. Intended for small n only (testing and diagnostics).
 */
inline Matrix dense_h(const CurvaturePair& pair, double theta, Eigen::Index n) {
  Matrix H = Matrix::Identity(n, n);
  if (!curvature_gate(pair, theta)) {
    return H;
  }
  detail::require_size(pair.size(), n, "pair");
  const Vector& s = pair.s();
  const Vector& y = pair.y();
  H -= (y * s.transpose() + s * y.transpose()) / pair.ys();
  H += (2.0 * pair.yy() / (pair.ys() * pair.ys())) * (s * s.transpose());
  // FMA contraction can leave the two triangles a few ulps apart.
  return 0.5 * (H + H.transpose());
}

}  // namespace eptctr
