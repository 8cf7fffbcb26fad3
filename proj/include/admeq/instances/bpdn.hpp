#ifndef ADMEQ_INSTANCES_BPDN_HPP_
#define ADMEQ_INSTANCES_BPDN_HPP_

#include "admeq/formulations.hpp"
#include "admeq/rng.hpp"
#include "admeq/solvers.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace admeq {

// Basis pursuit denoising:  min ||u||_1 + 1/(2 alpha) ||Au - b||^2.
//
// Two ADM-ready splits are carried:
//   dual split    min -<b,x> + alpha/2 ||x||^2 + i_Binf(y),  A* x - y = 0,
//   primal split  min ||v||_1 + 1/(2 alpha) ||Au - b||^2,    u - v = 0.
// Factorizations of (AA* + alpha lambda I) and (A*A + alpha lambda I) are
// cached per lambda.  With orthonormal A (A*A = I) the master-form iteration
// needs no operator products inside the loop.
struct BpdnInstance {
  Matrix A;
  Vector b;
  double alpha;
  bool orthonormal;
  LinearOperator Aop;
  Vector atb;  // A* b, precalculated

  BpdnInstance(Matrix a, Vector rhs, double alpha_)
      : A(std::move(a)),
        b(std::move(rhs)),
        alpha(alpha_),
        orthonormal(false),
        Aop(LinearOperator::dense(A)),
        atb(A.transpose() * b),
        cache_(std::make_shared<Cache>()) {
    require(alpha > 0.0, "BpdnInstance: alpha must be positive");
    require_dims(A.rows() == b.size(), "BpdnInstance: A/b mismatch");
    const Matrix gram = A.transpose() * A;
    orthonormal =
        A.rows() == A.cols() &&
        (gram - Matrix::Identity(A.cols(), A.cols())).cwiseAbs().maxCoeff() <= 1e-10;
  }

  Index m() const { return A.rows(); }
  Index n() const { return A.cols(); }

  AdmProblem dual_split_problem() const {
    QuadraticForm q(LinearOperator::scaled_identity(m(), alpha), -b);
    ProxFunction f = ProxFunction::quadratic(std::move(q));
    // f*(w) = 1/(2 alpha) ||w + b||^2
    const Vector bb = b;
    const double a = alpha;
    f.with_conjugate_value(
        [bb, a](const Vector& w) { return 0.5 * (w + bb).squaredNorm() / a; });
    return AdmProblem(std::move(f), ProxFunction::linf_ball_indicator(n()),
                      LinearOperator::dense(A.transpose()),
                      LinearOperator::scaled_identity(n(), -1.0), Vector::Zero(n()));
  }

  AdmProblem primal_split_problem() const {
    // g(u) = 1/(2 alpha) ||Au - b||^2 is the quadratic block; keeping it in
    // the g slot makes the master G affine-prox, which the update-order
    // equivalence needs.
    QuadraticForm q(LinearOperator::dense(A.transpose() * A / alpha), -atb / alpha,
                    0.5 * b.squaredNorm() / alpha);
    return AdmProblem(ProxFunction::l1_norm(n()), ProxFunction::quadratic(std::move(q)),
                      LinearOperator::scaled_identity(n(), -1.0),
                      LinearOperator::identity(n()), Vector::Zero(n()));
  }

  double primal_objective(const Vector& u) const {
    return norm_l1(u) + 0.5 * (A * u - b).squaredNorm() / alpha;
  }

  double dual_objective(const Vector& x) const {
    return -b.dot(x) + 0.5 * alpha * x.squaredNorm();
  }

  // (AA* + alpha lambda I)^-1 rhs
  Vector solve_row_system(const Vector& rhs, double lambda) const {
    return cached(lambda).row->solve(rhs);
  }
  // (A*A + alpha lambda I)^-1 rhs
  Vector solve_col_system(const Vector& rhs, double lambda) const {
    return cached(lambda).col->solve(rhs);
  }

 private:
  using LltPtr = std::shared_ptr<Eigen::LLT<Matrix>>;
  struct Factorized {
    LltPtr row;
    LltPtr col;
  };
  struct Cache {
    std::mutex mutex;
    std::map<double, Factorized> by_lambda;
  };

  const Factorized& cached(double lambda) const {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->by_lambda.find(lambda);
    if (it != cache_->by_lambda.end()) return it->second;
    Factorized f;
    Matrix row = A * A.transpose();
    row.diagonal().array() += alpha * lambda;
    Matrix col = A.transpose() * A;
    col.diagonal().array() += alpha * lambda;
    f.row = std::make_shared<Eigen::LLT<Matrix>>(row);
    f.col = std::make_shared<Eigen::LLT<Matrix>>(col);
    if (f.row->info() != Eigen::Success || f.col->info() != Eigen::Success)
      throw SingularSystem("BpdnInstance: regularized normal equations not SPD");
    return cache_->by_lambda.emplace(lambda, std::move(f)).first->second;
  }

  std::shared_ptr<Cache> cache_;
};

inline BpdnInstance make_bpdn(Index m, Index n, std::uint64_t seed, double alpha,
                              bool orthonormal = false) {
  require(m > 0 && n > 0, "make_bpdn: sizes must be positive");
  Rng rng(seed);
  Matrix a = rng.normal_matrix(m, n);
  if (orthonormal) {
    require(m == n, "make_bpdn: orthonormal A needs m == n");
    Eigen::HouseholderQR<Matrix> qr(a);
    a = qr.householderQ() * Matrix::Identity(m, n);
  }
  Vector b = rng.normal_vector(m);
  return BpdnInstance(std::move(a), std::move(b), alpha);
}

// ADM on the dual split; s = A* x rides in the state, so each iteration
// spends three operator products (A y, A z, A* x).
inline SteppedAlgorithm bpdn_dual_stepper(std::shared_ptr<const BpdnInstance> inst) {
  return {"bpdn-dual",
          [inst](const SolverState& st, const SolverConfig& cfg) {
            const double lam = cfg.lambda;
            const Vector y = project_linf_ball(st.at("s") + lam * st.at("z"));
            const Vector x = inst->solve_row_system(
                inst->Aop.apply(y) - lam * (inst->Aop.apply(st.at("z")) - inst->b), lam);
            const Vector s = inst->Aop.adjoint_apply(x);
            SolverState next("bpdn-dual", {}, st.k() + 1);
            next.set("y", y);
            next.set("x", x);
            next.set("s", s);
            next.set("z", st.at("z") + (s - y) / lam);
            return next;
          },
          [inst](const SolverState& st) { return inst->dual_objective(st.at("x")); },
          [](const SolverState& st) -> double {
            return st.has("y") ? (st.at("s") - st.at("y")).norm() : detail::quiet_nan();
          }};
}

inline SolverState make_bpdn_dual_state(const BpdnInstance& inst, const Vector& x0,
                                        const Vector& z0) {
  SolverState st("bpdn-dual", {});
  st.set("x", x0);
  st.set("s", inst.Aop.adjoint_apply(x0));
  st.set("z", z0);
  return st;
}

// Master form of the dual split.  General A spends two operator products per
// iteration; orthonormal A (A*A = I) specializes to
//   s <- (alpha lambda + 1)^-1 (t - lambda z + lambda A* b)
// with lambda A* b precalculated, i.e. no products at all in the loop.
inline SteppedAlgorithm bpdn_dual_memoized_stepper(std::shared_ptr<const BpdnInstance> inst) {
  return {"bpdn-dual-m",
          [inst](const SolverState& st, const SolverConfig& cfg) {
            const double lam = cfg.lambda;
            const Vector t = project_linf_ball(st.at("s") + lam * st.at("z"));
            Vector s;
            if (inst->orthonormal) {
              s = (t - lam * st.at("z") + lam * inst->atb) / (inst->alpha * lam + 1.0);
            } else {
              s = inst->Aop.adjoint_apply(inst->solve_row_system(
                  inst->Aop.apply(t - lam * st.at("z")) + lam * inst->b, lam));
            }
            SolverState next("bpdn-dual-m", {}, st.k() + 1);
            next.set("t", t);
            next.set("s", s);
            next.set("z", st.at("z") + (s - t) / lam);
            return next;
          },
          nullptr,
          [](const SolverState& st) -> double {
            return st.has("t") ? (st.at("s") - st.at("t")).norm() : detail::quiet_nan();
          }};
}

// ADM on the primal split:
//   v <- shrink(u + z/lambda, 1/lambda)
//   u <- (A*A + alpha lambda I)^-1 (A* b + alpha lambda v - alpha z)
//   z <- z + lambda (u - v)
inline SteppedAlgorithm bpdn_primal_stepper(std::shared_ptr<const BpdnInstance> inst) {
  return {"bpdn-primal",
          [inst](const SolverState& st, const SolverConfig& cfg) {
            const double lam = cfg.lambda;
            const Vector v = prox_l1(st.at("u") + st.at("z") / lam, 1.0 / lam);
            const Vector u = inst->solve_col_system(
                inst->atb + inst->alpha * lam * v - inst->alpha * st.at("z"), lam);
            SolverState next("bpdn-primal", {}, st.k() + 1);
            next.set("v", v);
            next.set("u", u);
            next.set("z", st.at("z") + lam * (u - v));
            return next;
          },
          [inst](const SolverState& st) { return inst->primal_objective(st.at("u")); },
          [](const SolverState& st) -> double {
            return st.has("v") ? (st.at("u") - st.at("v")).norm() : detail::quiet_nan();
          }};
}

}  // namespace admeq

#endif  // ADMEQ_INSTANCES_BPDN_HPP_
