#ifndef ADMEQ_FORMULATIONS_HPP_
#define ADMEQ_FORMULATIONS_HPP_

#include "admeq/core.hpp"
#include "admeq/linear_operator.hpp"
#include "admeq/prox.hpp"
#include "admeq/quadratic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

namespace admeq {

// min f(x) + g(y)  s.t.  Ax + By = b.
struct AdmProblem {
  ProxFunction f;
  ProxFunction g;
  LinearOperator A;
  LinearOperator B;
  Vector b;

  AdmProblem(ProxFunction f_, ProxFunction g_, LinearOperator a, LinearOperator bb, Vector rhs)
      : f(std::move(f_)), g(std::move(g_)), A(std::move(a)), B(std::move(bb)), b(std::move(rhs)) {
    require_dims(A.cols() == f.dim(), "AdmProblem: A/f dimension mismatch");
    require_dims(B.cols() == g.dim(), "AdmProblem: B/g dimension mismatch");
    require_dims(A.rows() == B.rows() && A.rows() == b.size(),
                 "AdmProblem: constraint dimensions inconsistent");
  }

  Index constraint_dim() const { return b.size(); }

  double objective(const Vector& x, const Vector& y) const { return f.value(x) + g.value(y); }

  Vector residual(const Vector& x, const Vector& y) const {
    return A.apply(x) + B.apply(y) - b;
  }
};

// One side of the master problem: the image function
//   H(s) = min { h(x) : Lx - shift = s },
// exposed through a joint prox (which also yields the minimizing witness x)
// and a minimum-norm recovery map.
//
// Joint solvers are registered for three classes: L a scaled identity (any
// h), h convex quadratic possibly on an affine set, and h an indicator of an
// affine set.  These cover every problem family shipped here; anything else
// raises NoSubproblemSolver at construction.
class MasterSide {
 public:
  struct ProxResult {
    Vector image;    // Lx - shift at the minimizer
    Vector witness;  // the minimizer x itself
  };

  MasterSide(ProxFunction h, LinearOperator l, Vector shift, std::string label)
      : h_(std::move(h)),
        l_(std::move(l)),
        shift_(std::move(shift)),
        label_(std::move(label)),
        cache_(std::make_shared<Cache>()) {
    require_dims(l_.cols() == h_.dim() && l_.rows() == shift_.size(),
                 "MasterSide: operator/shift dimensions inconsistent");
    if (l_.is_scaled_identity()) {
      klass_ = Class::DirectProx;
    } else if (const auto* qs = h_.quadratic_structure()) {
      klass_ = Class::Kkt;
      qmat_ = qs->form.quadratic_operator().materialize();
      clin_ = qs->form.linear_term();
      if (qs->form.constraint()) {
        emat_ = qs->form.constraint()->e.materialize();
        dvec_ = qs->form.constraint()->d;
      }
    } else if (const auto* as = h_.affine_set_structure()) {
      klass_ = Class::Kkt;
      qmat_ = Matrix::Zero(h_.dim(), h_.dim());
      clin_ = Vector::Zero(h_.dim());
      emat_ = as->e.materialize();
      dvec_ = as->d;
    } else {
      throw NoSubproblemSolver("MasterSide(" + label_ + "): no joint solver for this class");
    }
  }

  Index image_dim() const { return l_.rows(); }
  Index witness_dim() const { return h_.dim(); }
  const ProxFunction& inner() const { return h_; }
  const LinearOperator& op() const { return l_; }
  const Vector& shift() const { return shift_; }

  Vector image_of(const Vector& x) const { return l_.apply(x) - shift_; }

  // prox_{lambda H}(r) together with the witness x.
  ProxResult prox(const Vector& r, double lambda) const {
    require(lambda > 0.0, "MasterSide::prox: lambda must be positive");
    require_dims(r.size() == image_dim(), "MasterSide::prox: size mismatch");
    if (klass_ == Class::DirectProx) {
      const double c = l_.scale();
      Vector x = h_.prox((r + shift_) / c, lambda / (c * c));
      Vector image = c * x - shift_;
      return {std::move(image), std::move(x)};
    }
    // minimize 1/2 x'Qx + c'x + 1/(2 lambda) ||Lx - (shift + r)||^2 (s.t. Ex = d)
    const Matrix& lm = l_.materialize();
    const Vector target = shift_ + r;
    Vector x;
    if (emat_.size() == 0) {
      auto llt = cached_llt(lambda);
      x = llt->solve(lm.transpose() * target / lambda - clin_);
    } else {
      const Index n = witness_dim();
      const Index m = dvec_.size();
      Vector rhs(n + m);
      rhs.head(n) = lm.transpose() * target / lambda - clin_;
      rhs.tail(m) = dvec_;
      auto kkt = cached_kkt(lambda);
      // A rank-deficient multiplier block still has a unique image Lx; the
      // least-norm solve picks the minimum-norm witness deterministically.
      x = kkt->lu ? Vector(kkt->lu->solve(rhs).head(n)) : Vector(kkt->cod->solve(rhs).head(n));
    }
    Vector image = lm * x - shift_;
    return {std::move(image), std::move(x)};
  }

  // Minimum-norm representative of argmin { h(x) : Lx - shift = s }.
  Vector recover(const Vector& s) const {
    require_dims(s.size() == image_dim(), "MasterSide::recover: size mismatch");
    const Vector target = shift_ + s;
    if (klass_ == Class::DirectProx) return target / l_.scale();
    // Stationarity + feasibility, solved least-norm so a rank-deficient
    // multiplier block cannot spoil determinism.
    auto cod = cached_recover();
    const Index n = witness_dim();
    const Index m = image_dim();
    const Index p = dvec_.size();
    Vector rhs = Vector::Zero(n + m + p);
    rhs.head(n) = -clin_;
    rhs.segment(n, m) = target;
    if (p > 0) rhs.tail(p) = dvec_;
    return cod->solve(rhs).head(n);
  }

  double value(const Vector& s) const {
    if (!h_.has_value()) throw ConjugateUnavailable("MasterSide::value: h has no value oracle");
    const Vector x = recover(s);
    if ((image_of(x) - s).norm() > 1e-8 * (1.0 + s.norm())) return kInfinity;
    return h_.value(x);
  }

  bool prox_is_affine() const {
    return klass_ == Class::DirectProx ? h_.is_affine_prox() : true;
  }

  // Image-space view of H as a plain ProxFunction.  Its conjugate value uses
  // H*(u) = h*(L*u) - <u, shift>.
  ProxFunction as_prox_function() const {
    auto self = std::make_shared<MasterSide>(*this);
    ProxFunction::ValueFn value;
    if (h_.has_value()) value = [self](const Vector& s) { return self->value(s); };
    ProxFunction fn(
        image_dim(), std::move(value),
        [self](const Vector& r, double tau) { return self->prox(r, tau).image; },
        prox_is_affine());
    if (h_.has_conjugate_value()) {
      fn.with_conjugate_value([self](const Vector& u) {
        return self->h_.conjugate_value(self->l_.adjoint_apply(u)) - u.dot(self->shift_);
      });
    }
    return fn;
  }

 private:
  enum class Class { DirectProx, Kkt };

  using LltPtr = std::shared_ptr<Eigen::LLT<Matrix>>;
  using CodPtr = std::shared_ptr<Eigen::CompleteOrthogonalDecomposition<Matrix>>;

  struct KktSolver {
    std::shared_ptr<Eigen::FullPivLU<Matrix>> lu;  // regular case
    CodPtr cod;                                    // least-norm fallback
  };
  using KktPtr = std::shared_ptr<const KktSolver>;

  struct Cache {
    std::mutex mutex;
    std::map<double, LltPtr> llt_by_lambda;
    std::map<double, KktPtr> kkt_by_lambda;
    CodPtr recover;
  };

  LltPtr cached_llt(double lambda) const {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->llt_by_lambda.find(lambda);
    if (it != cache_->llt_by_lambda.end()) return it->second;
    const Matrix& lm = l_.materialize();
    Matrix h = qmat_ + lm.transpose() * lm / lambda;
    auto llt = std::make_shared<Eigen::LLT<Matrix>>(h);
    if (llt->info() != Eigen::Success || llt->rcond() < 1e-14)
      throw SingularSystem("MasterSide(" + label_ + "): joint prox system is singular");
    cache_->llt_by_lambda.emplace(lambda, llt);
    return llt;
  }

  KktPtr cached_kkt(double lambda) const {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->kkt_by_lambda.find(lambda);
    if (it != cache_->kkt_by_lambda.end()) return it->second;
    const Matrix& lm = l_.materialize();
    const Index n = witness_dim();
    const Index m = dvec_.size();
    Matrix kkt = Matrix::Zero(n + m, n + m);
    kkt.topLeftCorner(n, n) = qmat_ + lm.transpose() * lm / lambda;
    kkt.topRightCorner(n, m) = emat_.transpose();
    kkt.bottomLeftCorner(m, n) = emat_;
    auto solver = std::make_shared<KktSolver>();
    solver->lu = std::make_shared<Eigen::FullPivLU<Matrix>>();
    solver->lu->setThreshold(1e-12);
    solver->lu->compute(kkt);
    if (solver->lu->rank() < n + m) {
      solver->lu.reset();
      solver->cod = std::make_shared<Eigen::CompleteOrthogonalDecomposition<Matrix>>(kkt);
    }
    cache_->kkt_by_lambda.emplace(lambda, solver);
    return solver;
  }

  CodPtr cached_recover() const {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    if (cache_->recover) return cache_->recover;
    const Matrix& lm = l_.materialize();
    const Index n = witness_dim();
    const Index m = image_dim();
    const Index p = dvec_.size();
    Matrix sys = Matrix::Zero(n + m + p, n + m + p);
    sys.topLeftCorner(n, n) = qmat_.size() > 0 ? qmat_ : Matrix::Zero(n, n);
    sys.block(0, n, n, m) = lm.transpose();
    sys.block(n, 0, m, n) = lm;
    if (p > 0) {
      sys.block(0, n + m, n, p) = emat_.transpose();
      sys.block(n + m, 0, p, n) = emat_;
    }
    cache_->recover = std::make_shared<Eigen::CompleteOrthogonalDecomposition<Matrix>>(sys);
    return cache_->recover;
  }

  ProxFunction h_;
  LinearOperator l_;
  Vector shift_;
  std::string label_;
  Class klass_ = Class::DirectProx;
  Matrix qmat_;  // empty for DirectProx
  Vector clin_;
  Matrix emat_;  // empty when unconstrained
  Vector dvec_;
  std::shared_ptr<Cache> cache_;
};

// Master form of an AdmProblem:  min F(s) + G(t)  s.t.  s + t = 0,  with
//   F(s) = min { f(x) : Ax = s },   G(t) = min { g(y) : By - b = t }.
class MasterProblem {
 public:
  explicit MasterProblem(AdmProblem p)
      : problem_(std::move(p)),
        f_side_(problem_.f, problem_.A, Vector::Zero(problem_.constraint_dim()), "F"),
        g_side_(problem_.g, problem_.B, problem_.b, "G") {}

  const AdmProblem& problem() const { return problem_; }
  const MasterSide& F_side() const { return f_side_; }
  const MasterSide& G_side() const { return g_side_; }

  ProxFunction F() const { return f_side_.as_prox_function(); }
  ProxFunction G() const { return g_side_.as_prox_function(); }

  Vector recover_x(const Vector& s) const { return f_side_.recover(s); }
  Vector recover_y(const Vector& t) const { return g_side_.recover(t); }

  Index image_dim() const { return problem_.constraint_dim(); }

 private:
  AdmProblem problem_;
  MasterSide f_side_;
  MasterSide g_side_;
};

inline MasterProblem build_master(AdmProblem p) { return MasterProblem(std::move(p)); }

// Dual form carrying prox oracles of u -> F*(-u) and v -> G*(-v).
//
// Both proxes are realized from the master proxes through the generalized
// Moreau decomposition plus negation,
//   prox_{tau H*(-.)}(r) = r + tau prox_{H/tau}(-r/tau),
// so no separate conjugate derivation is ever needed.
class DualProblem {
 public:
  explicit DualProblem(MasterProblem mp)
      : master_(std::make_shared<MasterProblem>(std::move(mp))),
        fstar_neg_(make_neg_conjugate(master_, /*f_side=*/true)),
        gstar_neg_(make_neg_conjugate(master_, /*f_side=*/false)) {}

  const MasterProblem& master() const { return *master_; }
  const ProxFunction& Fstar_neg() const { return fstar_neg_; }
  const ProxFunction& Gstar_neg() const { return gstar_neg_; }

 private:
  static ProxFunction make_neg_conjugate(const std::shared_ptr<MasterProblem>& mp, bool f_side) {
    const MasterSide& side = f_side ? mp->F_side() : mp->G_side();
    const AdmProblem& p = mp->problem();
    ProxFunction::ValueFn value;
    if (f_side && p.f.has_conjugate_value()) {
      auto fp = std::make_shared<ProxFunction>(p.f);
      auto ap = std::make_shared<LinearOperator>(p.A);
      value = [fp, ap](const Vector& u) { return fp->conjugate_value(-ap->adjoint_apply(u)); };
    } else if (!f_side && p.g.has_conjugate_value()) {
      auto gp = std::make_shared<ProxFunction>(p.g);
      auto bp = std::make_shared<LinearOperator>(p.B);
      auto bb = std::make_shared<Vector>(p.b);
      value = [gp, bp, bb](const Vector& v) {
        return gp->conjugate_value(-bp->adjoint_apply(v)) + v.dot(*bb);
      };
    }
    auto side_ptr = std::make_shared<MasterSide>(side);
    return ProxFunction(
        side.image_dim(), std::move(value),
        [side_ptr](const Vector& r, double tau) -> Vector {
          return r + tau * side_ptr->prox(-r / tau, 1.0 / tau).image;
        },
        side.prox_is_affine());
  }

  std::shared_ptr<MasterProblem> master_;
  ProxFunction fstar_neg_;
  ProxFunction gstar_neg_;
};

inline DualProblem build_dual(MasterProblem mp) { return DualProblem(std::move(mp)); }
inline DualProblem build_dual(AdmProblem p) { return DualProblem(build_master(std::move(p))); }

// min u(s) + v(y)  s.t.  Cx - y = 0,  mu (x - s) = 0.
// x carries no objective; grouping for ADM is x versus (s, y).
class ThreeBlockProblem {
 public:
  ThreeBlockProblem(ProxFunction u, ProxFunction v, LinearOperator c, double mu = 1.0)
      : u_(std::move(u)),
        v_(std::move(v)),
        c_(std::move(c)),
        mu_(mu),
        u_conj_(conjugate_prox(u_)),
        v_conj_(conjugate_prox(v_)) {
    require(mu_ > 0.0, "ThreeBlockProblem: mu must be positive");
    require_dims(c_.cols() == u_.dim(), "ThreeBlockProblem: C/u dimension mismatch");
    require_dims(c_.rows() == v_.dim(), "ThreeBlockProblem: C/v dimension mismatch");
    const Matrix& cm = c_.materialize();
    primal_llt_ = std::make_shared<Eigen::LLT<Matrix>>(
        Matrix(mu_ * mu_ * Matrix::Identity(cm.cols(), cm.cols()) + cm.transpose() * cm));
    dual_llt_ = std::make_shared<Eigen::LLT<Matrix>>(
        Matrix(Matrix::Identity(cm.rows(), cm.rows()) + cm * cm.transpose()));
    if (primal_llt_->info() != Eigen::Success || dual_llt_->info() != Eigen::Success)
      throw SingularSystem("ThreeBlockProblem: normal equations not positive definite");
  }

  const ProxFunction& u() const { return u_; }
  const ProxFunction& v() const { return v_; }
  const ProxFunction& u_conjugate() const { return u_conj_; }
  const ProxFunction& v_conjugate() const { return v_conj_; }
  const LinearOperator& C() const { return c_; }
  double mu() const { return mu_; }

  Vector solve_primal_x(const Vector& rhs) const { return primal_llt_->solve(rhs); }
  Vector solve_dual_v(const Vector& rhs) const { return dual_llt_->solve(rhs); }

  double objective(const Vector& s, const Vector& y) const { return u_.value(s) + v_.value(y); }

 private:
  ProxFunction u_;
  ProxFunction v_;
  LinearOperator c_;
  double mu_;
  ProxFunction u_conj_;
  ProxFunction v_conj_;
  std::shared_ptr<Eigen::LLT<Matrix>> primal_llt_;
  std::shared_ptr<Eigen::LLT<Matrix>> dual_llt_;
};

inline ThreeBlockProblem build_three_block(ProxFunction u, ProxFunction v, LinearOperator c,
                                           double mu = 1.0) {
  return ThreeBlockProblem(std::move(u), std::move(v), std::move(c), mu);
}

// Nonnegative saddle-point residual of (x, y, u) for the Lagrangian of an
// AdmProblem: primal feasibility plus prox-based fixed-point residuals of the
// two optimality inclusions  0 in df(x) + A*u  and  0 in dg(y) + B*u,
// measured at unit prox step.  Zero (up to tolerance) iff (x, y, u) is a
// saddle point.
inline double saddle_point_residual(const AdmProblem& p, const Vector& x, const Vector& y,
                                    const Vector& u) {
  require_dims(x.size() == p.f.dim() && y.size() == p.g.dim() && u.size() == p.b.size(),
               "saddle_point_residual: dimension mismatch");
  const double primal = p.residual(x, y).norm();
  const double rx = (x - p.f.prox(x - p.A.adjoint_apply(u), 1.0)).norm();
  const double ry = (y - p.g.prox(y - p.B.adjoint_apply(u), 1.0)).norm();
  return std::sqrt(primal * primal + rx * rx + ry * ry);
}

}  // namespace admeq

#endif  // ADMEQ_FORMULATIONS_HPP_
