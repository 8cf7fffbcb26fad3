#ifndef ADMEQ_QUADRATIC_HPP_
#define ADMEQ_QUADRATIC_HPP_

#include "admeq/core.hpp"
#include "admeq/linear_operator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

#include <map>
#include <memory>
#include <mutex>
#include <optional>

namespace admeq {

// Projection onto the affine set {x : Ax = b}.
//
// project(x) = x - A*(AA*)^-1 (Ax - b).  The Cholesky factor of AA* is built
// once and reused; with allow_pseudo the pseudo-inverse (complete orthogonal
// decomposition) replaces (AA*)^-1 for row-rank-deficient A.
class AffineProjector {
 public:
  AffineProjector(const LinearOperator& a, Vector b, bool allow_pseudo = false)
      : amat_(a.materialize()), b_(std::move(b)), pseudo_(allow_pseudo) {
    require_dims(b_.size() == amat_.rows(), "AffineProjector: b size mismatch");
    if (pseudo_) {
      cod_ = std::make_shared<Eigen::CompleteOrthogonalDecomposition<Matrix>>(amat_);
    } else {
      const Matrix gram = amat_ * amat_.transpose();
      auto llt = std::make_shared<Eigen::LLT<Matrix>>(gram);
      if (llt->info() != Eigen::Success || llt->rcond() < 1e-14)
        throw RankDeficient("AffineProjector: AA* is numerically rank deficient");
      llt_ = std::move(llt);
    }
  }

  AffineProjector(Matrix a, Vector b, bool allow_pseudo = false)
      : AffineProjector(LinearOperator::dense(std::move(a)), std::move(b), allow_pseudo) {}

  Vector project(const Vector& x) const {
    require_dims(x.size() == amat_.cols(), "AffineProjector: x size mismatch");
    const Vector residual = amat_ * x - b_;
    if (pseudo_) return x - cod_->solve(residual);
    return x - amat_.transpose() * llt_->solve(residual);
  }

  // (AA*)^-1 rhs; only meaningful on the full-row-rank path.
  Vector solve_gram(const Vector& rhs) const {
    if (!llt_) throw RankDeficient("AffineProjector: gram solve unavailable on pseudo path");
    return llt_->solve(rhs);
  }

  const Matrix& matrix() const { return amat_; }
  const Vector& rhs() const { return b_; }

 private:
  Matrix amat_;
  Vector b_;
  bool pseudo_;
  std::shared_ptr<Eigen::LLT<Matrix>> llt_;
  std::shared_ptr<Eigen::CompleteOrthogonalDecomposition<Matrix>> cod_;
};

inline Vector project_affine(const Vector& x, const LinearOperator& a, const Vector& b,
                             bool allow_pseudo = false) {
  return AffineProjector(a, b, allow_pseudo).project(x);
}

// Convex quadratic  q(w) = 1/2 <w, Qw> + <c, w> + constant,  optionally
// restricted to an affine set {w : Ew = d}.  This is exactly the class whose
// proximal map is affine, which several update-order results depend on.
class QuadraticForm {
 public:
  struct Constraint {
    LinearOperator e;
    Vector d;
  };

  QuadraticForm(LinearOperator q, Vector c, double constant = 0.0,
                std::optional<Constraint> constraint = std::nullopt)
      : q_(std::move(q)),
        c_(std::move(c)),
        constant_(constant),
        constraint_(std::move(constraint)),
        cache_(std::make_shared<Cache>()) {
    require_dims(q_.rows() == q_.cols() && q_.rows() == c_.size(),
                 "QuadraticForm: Q/c dimensions inconsistent");
    if (!q_.is_scaled_identity()) {
      const Matrix& qm = q_.materialize();
      const double scale = 1.0 + qm.cwiseAbs().maxCoeff();
      require((qm - qm.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale,
              "QuadraticForm: Q is not symmetric");
    }
    if (constraint_) {
      require_dims(constraint_->e.cols() == c_.size() && constraint_->e.rows() == constraint_->d.size(),
                   "QuadraticForm: constraint dimensions inconsistent");
      // d must be attainable, otherwise the form is identically +inf.
      const Matrix& em = constraint_->e.materialize();
      const Vector best = em * em.completeOrthogonalDecomposition().solve(constraint_->d);
      require((best - constraint_->d).norm() <= 1e-10 * (1.0 + constraint_->d.norm()),
              "QuadraticForm: constraint right-hand side not in range of E");
    }
  }

  static QuadraticForm scaled_norm(Index n, double weight, Vector center) {
    // (weight/2) ||w - center||^2
    Vector c = -weight * center;
    const double constant = 0.5 * weight * center.squaredNorm();
    return QuadraticForm(LinearOperator::scaled_identity(n, weight), std::move(c), constant);
  }

  Index dim() const { return c_.size(); }
  const LinearOperator& quadratic_operator() const { return q_; }
  const Vector& linear_term() const { return c_; }
  double constant_term() const { return constant_; }
  const std::optional<Constraint>& constraint() const { return constraint_; }

  double value(const Vector& x) const {
    require_dims(x.size() == dim(), "QuadraticForm::value: size mismatch");
    if (constraint_) {
      const Vector r = constraint_->e.apply(x) - constraint_->d;
      if (r.norm() > 1e-9 * (1.0 + constraint_->d.norm())) return kInfinity;
    }
    return 0.5 * x.dot(q_.apply(x)) + c_.dot(x) + constant_;
  }

  //  argmin_w q(w) + 1/(2 tau) ||w - x||^2,  s.t. Ew = d when constrained.
  //  Unconstrained: (Q + I/tau) w = x/tau - c.  Constrained: KKT solve.
  //  One factorization per tau, cached.
  Vector prox(const Vector& x, double tau) const {
    require(tau > 0.0, "QuadraticForm::prox: tau must be positive");
    require_dims(x.size() == dim(), "QuadraticForm::prox: size mismatch");
    const Index n = dim();
    if (!constraint_) {
      auto llt = cached_llt(tau);
      return llt->solve(x / tau - c_);
    }
    auto lu = cached_kkt(tau);
    const Index m = constraint_->d.size();
    Vector rhs(n + m);
    rhs.head(n) = x / tau - c_;
    rhs.tail(m) = constraint_->d;
    Vector sol = lu->solve(rhs);
    return sol.head(n);
  }

  // Conjugate value q*(v) = 1/2 <v - c, Q^-1 (v - c)> - constant, available
  // for unconstrained forms with invertible Q.
  std::optional<double> conjugate_value(const Vector& v) const {
    if (constraint_) return std::nullopt;
    if (q_.is_scaled_identity()) {
      const double w = q_.scale();
      if (w <= 0.0) return std::nullopt;
      return 0.5 * (v - c_).squaredNorm() / w - constant_;
    }
    Eigen::LLT<Matrix> llt(q_.materialize());
    if (llt.info() != Eigen::Success || llt.rcond() < 1e-14) return std::nullopt;
    const Vector d = v - c_;
    return 0.5 * d.dot(llt.solve(d)) - constant_;
  }

 private:
  using LltPtr = std::shared_ptr<Eigen::LLT<Matrix>>;
  using LuPtr = std::shared_ptr<Eigen::FullPivLU<Matrix>>;

  struct Cache {
    std::mutex mutex;
    std::map<double, LltPtr> llt_by_tau;
    std::map<double, LuPtr> kkt_by_tau;
  };

  LltPtr cached_llt(double tau) const {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->llt_by_tau.find(tau);
    if (it != cache_->llt_by_tau.end()) return it->second;
    Matrix h = q_.materialize();
    h.diagonal().array() += 1.0 / tau;
    auto llt = std::make_shared<Eigen::LLT<Matrix>>(h);
    if (llt->info() != Eigen::Success)
      throw SingularSystem("QuadraticForm::prox: Q + I/tau not positive definite");
    cache_->llt_by_tau.emplace(tau, llt);
    return llt;
  }

  LuPtr cached_kkt(double tau) const {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->kkt_by_tau.find(tau);
    if (it != cache_->kkt_by_tau.end()) return it->second;
    const Index n = dim();
    const Index m = constraint_->d.size();
    Matrix kkt = Matrix::Zero(n + m, n + m);
    kkt.topLeftCorner(n, n) = q_.materialize();
    kkt.topLeftCorner(n, n).diagonal().array() += 1.0 / tau;
    kkt.topRightCorner(n, m) = constraint_->e.materialize().transpose();
    kkt.bottomLeftCorner(m, n) = constraint_->e.materialize();
    auto lu = std::make_shared<Eigen::FullPivLU<Matrix>>();
    lu->setThreshold(1e-12);
    lu->compute(kkt);
    if (lu->rank() < n + m)
      throw SingularSystem("QuadraticForm::prox: KKT system is rank deficient");
    cache_->kkt_by_tau.emplace(tau, lu);
    return lu;
  }

  LinearOperator q_;
  Vector c_;
  double constant_;
  std::optional<Constraint> constraint_;
  std::shared_ptr<Cache> cache_;
};

inline Vector prox_quadratic(const Vector& x, const QuadraticForm& q, double tau) {
  return q.prox(x, tau);
}

}  // namespace admeq

#endif  // ADMEQ_QUADRATIC_HPP_
