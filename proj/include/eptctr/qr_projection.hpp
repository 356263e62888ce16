#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Core>
#include <Eigen/Householder>
#include <Eigen/QR>
#include <Eigen/SparseCore>

#include "eptctr/error.hpp"

namespace eptctr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/**
 * Linear equality constraints A·x = b with A of size m × n, m < n.
 */
struct ConstraintSystem {
  SparseMatrix A;
  Vector b;

  ConstraintSystem() = default;
  ConstraintSystem(SparseMatrix A_, Vector b_)
      : A{std::move(A_)}, b{std::move(b_)} {}
  ConstraintSystem(const Matrix& A_dense, Vector b_)
      : A{A_dense.sparseView()}, b{std::move(b_)} {}

  Eigen::Index rows() const { return A.rows(); }
  Eigen::Index cols() const { return A.cols(); }

  /// ‖A·x − b‖∞
  double violation_inf(const Vector& x) const {
    detail::require_size(x.size(), cols(), "x");
    return (A * x - b).lpNorm<Eigen::Infinity>();
  }

  void validate() const {
    const auto m = rows();
    const auto n = cols();
    if (m < 1 || n < 2 || m >= n) {
      throw Error{ErrorKind::DimensionMismatch,
                  "constraint matrix is " + std::to_string(m) + "x" +
                      std::to_string(n) + ", need 1 <= m < n and n >= 2"};
    }
    detail::require_size(b.size(), m, "b");
  }
};

/**
 * Residuals of the first-order optimality conditions.
 */
struct Residuals {
  /// ‖g + Aᵀλ‖∞ with λ the least-squares multipliers.
  double kkt_inf = 0.0;
  /// ‖A·x − b‖∞
  double feas_inf = 0.0;
};

struct FactorOptions {
  /// Pivot threshold relative to max|R1|; negative selects 1e-12·n.
  double rank_tol = -1.0;
  /// Form Q2 even when m ≤ n/2. Used to cross-check both projection formulas.
  bool force_q2 = false;
};

/**
 * Householder QR of Aᵀ = [Q1 | Q2]·[R1; 0] and the operations derived from it.
 *
 * P = I − Q1Q1ᵀ = Q2Q2ᵀ is the orthogonal projector onto null(A). Q2 is only
 * stored when m > n/2, where applying Q2Q2ᵀ is the cheaper route.
 *
 * Immutable after construction.
 */
class Projector {
 public:
  Projector(const ConstraintSystem& cs, FactorOptions options = {}) {
    cs.validate();
    n_ = cs.cols();
    m_ = cs.rows();

    Matrix At = Matrix(cs.A.transpose());
    Eigen::HouseholderQR<Matrix> qr{std::move(At)};

    R1_ = qr.matrixQR().topLeftCorner(m_, m_).triangularView<Eigen::Upper>();
    const double r_max = R1_.cwiseAbs().maxCoeff();
    const double rank_tol =
        options.rank_tol < 0.0 ? 1e-12 * static_cast<double>(n_)
                               : options.rank_tol;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (!(std::abs(R1_(i, i)) > rank_tol * r_max)) {
        throw Error{ErrorKind::RankDeficient,
                    "|R1(" + std::to_string(i) + "," + std::to_string(i) +
                        ")| is below the rank tolerance"};
      }
    }

    const bool want_q2 = uses_q2_branch() || options.force_q2;
    if (want_q2) {
      Matrix Q = qr.householderQ();
      Q1_ = Q.leftCols(m_);
      Q2_ = Q.rightCols(n_ - m_);
    } else {
      Q1_ = qr.householderQ() * Matrix::Identity(n_, m_);
    }

    // R1ᵀ·b_r = b, so Q1ᵀx = b_r ⟺ Ax = b.
    b_r_ = R1_.transpose().triangularView<Eigen::Lower>().solve(cs.b);
  }

  Eigen::Index n() const { return n_; }
  Eigen::Index m() const { return m_; }
  const Matrix& Q1() const { return Q1_; }
  const std::optional<Matrix>& Q2() const { return Q2_; }
  const Matrix& R1() const { return R1_; }
  const Vector& b_r() const { return b_r_; }

  /// True when m > n/2 and P·g is evaluated as Q2(Q2ᵀg).
  bool uses_q2_branch() const { return 2 * m_ > n_; }

  Vector project_gradient(const Vector& g) const {
    detail::require_size(g.size(), n_, "g");
    if (uses_q2_branch()) {
      return project_q2(g);
    }
    return project_q1(g);
  }

  /// g − Q1(Q1ᵀg)
  Vector project_q1(const Vector& g) const {
    detail::require_size(g.size(), n_, "g");
    Vector c = Q1_.transpose() * g;
    Vector r = g;
    r.noalias() -= Q1_ * c;
    return r;
  }

  /// Q2(Q2ᵀg); requires Q2 to be materialized.
  Vector project_q2(const Vector& g) const {
    detail::require_size(g.size(), n_, "g");
    if (!Q2_) {
      throw Error{ErrorKind::DimensionMismatch, "Q2 was not materialized"};
    }
    Vector c = Q2_->transpose() * g;
    return *Q2_ * c;
  }

  /**
   * Closest point to x0 (in the 2-norm) on {x : Ax = b}.
   */
  Vector make_feasible(const Vector& x0) const {
    detail::require_size(x0.size(), n_, "x0");
    Vector c = Q1_.transpose() * x0 - b_r_;
    Vector x = x0;
    x.noalias() -= Q1_ * c;
    return x;
  }

  /**
   * λ = −(AAᵀ)⁻¹A·g, from R1·λ = −Q1ᵀg. Then g + Aᵀλ = P·g.
   */
  Vector multipliers(const Vector& g) const {
    detail::require_size(g.size(), n_, "g");
    Vector rhs = -(Q1_.transpose() * g);
    return R1_.triangularView<Eigen::Upper>().solve(rhs);
  }

  Residuals residuals(const ConstraintSystem& cs, const Vector& x,
                      const Vector& g) const {
    detail::require_size(x.size(), n_, "x");
    detail::require_size(g.size(), n_, "g");
    if (cs.rows() != m_ || cs.cols() != n_) {
      throw Error{ErrorKind::DimensionMismatch,
                  "constraint system does not match the factorization"};
    }
    const Vector lambda = multipliers(g);
    Vector grad_l = g;
    grad_l.noalias() += cs.A.transpose() * lambda;
    return {.kkt_inf = grad_l.lpNorm<Eigen::Infinity>(),
            .feas_inf = cs.violation_inf(x)};
  }

 private:
  Eigen::Index n_ = 0;
  Eigen::Index m_ = 0;
  Matrix Q1_;
  std::optional<Matrix> Q2_;
  Matrix R1_;
  Vector b_r_;
};

/**
 * Factors Aᵀ for the constraint system. Throws RankDeficient or
 * DimensionMismatch.
 */
inline Projector factor(const ConstraintSystem& cs,
                        FactorOptions options = {}) {
  return Projector{cs, options};
}

}  // namespace eptctr
