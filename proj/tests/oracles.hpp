#pragma once

// Reference computations for the tests. Deliberately avoid QR so they stay
// independent of the code under test.

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "eptctr/lbfgs_direction.hpp"
#include "eptctr/qr_projection.hpp"

namespace eptctr::test {

/// P = I − Aᵀ(AAᵀ)⁻¹A via an explicit inverse.
inline Matrix dense_projector(const Matrix& A) {
  const Eigen::Index n = A.cols();
  const Matrix AAt = A * A.transpose();
  return Matrix::Identity(n, n) - A.transpose() * AAt.inverse() * A;
}

/// λ = −(AAᵀ)⁻¹A·g via an explicit inverse.
inline Vector dense_multipliers(const Matrix& A, const Vector& g) {
  const Matrix AAt = A * A.transpose();
  return -(AAt.inverse() * (A * g));
}

/// x0 − Aᵀ(AAᵀ)⁻¹(Ax0 − b)
inline Vector dense_feasible(const Matrix& A, const Vector& b,
                             const Vector& x0) {
  const Matrix AAt = A * A.transpose();
  return x0 - A.transpose() * (AAt.inverse() * (A * x0 - b));
}

/**
 * argmin ‖x − x0‖² s.t. Ax = b from the KKT system
 *   [I  Aᵀ][x]   [x0]
 *   [A  0 ][ν] = [b ].
 */
inline Vector qp_least_distance(const Matrix& A, const Vector& b,
                                const Vector& x0) {
  const Eigen::Index n = A.cols();
  const Eigen::Index m = A.rows();
  Matrix K = Matrix::Zero(n + m, n + m);
  K.topLeftCorner(n, n).setIdentity();
  K.topRightCorner(n, m) = A.transpose();
  K.bottomLeftCorner(m, n) = A;
  Vector rhs(n + m);
  rhs << x0, b;
  return Eigen::FullPivLU<Matrix>(K).solve(rhs).head(n);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_{seed} {}

  double uniform(double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>{lo, hi}(gen_);
  }

  int64_t integer(int64_t lo, int64_t hi) {
    return std::uniform_int_distribution<int64_t>{lo, hi}(gen_);
  }

  Vector vector(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      v(i) = uniform();
    }
    return v;
  }

  Matrix matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix M(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) {
        M(i, j) = uniform();
      }
    }
    return M;
  }

  /// Random m × n matrix, m < n, well away from rank deficiency.
  Matrix full_rank(Eigen::Index m, Eigen::Index n) {
    for (;;) {
      Matrix A = matrix(m, n);
      Eigen::JacobiSVD<Matrix> svd(A);
      const auto& sv = svd.singularValues();
      if (sv(m - 1) > 1e-3 * sv(0)) {
        return A;
      }
    }
  }

  /// Random pair that passes the curvature gate for θ = 1e-6.
  CurvaturePair gated_pair(Eigen::Index n) {
    for (;;) {
      Vector s = vector(n);
      Vector y = vector(n);
      if (std::abs(s.dot(y)) > 1e-3 * s.squaredNorm()) {
        return CurvaturePair{s, y};
      }
    }
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

/// ‖a − b‖ / max(1, ‖b‖)
inline double rel_diff(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace eptctr::test
