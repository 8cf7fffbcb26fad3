#ifndef ADMEQ_INSTANCES_BP_HPP_
#define ADMEQ_INSTANCES_BP_HPP_

#include "admeq/formulations.hpp"
#include "admeq/rng.hpp"
#include "admeq/solvers.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <memory>
#include <utility>

namespace admeq {

// Basis pursuit:  min ||u||_1  s.t.  Au = b,  A full row rank, m < n.
// The ADM-ready split of its dual,
//   min -<b, x> + indicator_Binf(y)   s.t.  A* x - y = 0,
// is the two-block form the generic algorithms run on; the iterations
// below share one Cholesky factor of AA*.
struct BasisPursuitInstance {
  Matrix A;
  Vector b;
  LinearOperator Aop;
  std::shared_ptr<Eigen::LLT<Matrix>> aat_llt;

  BasisPursuitInstance(Matrix a, Vector rhs)
      : A(std::move(a)), b(std::move(rhs)), Aop(LinearOperator::dense(A)) {
    require_dims(A.rows() == b.size(), "BasisPursuitInstance: A/b mismatch");
    aat_llt = std::make_shared<Eigen::LLT<Matrix>>(Matrix(A * A.transpose()));
    if (aat_llt->info() != Eigen::Success || aat_llt->rcond() < 1e-12)
      throw RankDeficient("BasisPursuitInstance: AA* is numerically singular");
  }

  Index m() const { return A.rows(); }
  Index n() const { return A.cols(); }

  // min -<b,x> + i_Binf(y)  s.t.  A* x - y = 0.
  AdmProblem dual_split_problem() const {
    return AdmProblem(ProxFunction::linear(-b), ProxFunction::linf_ball_indicator(n()),
                      LinearOperator::dense(A.transpose()),
                      LinearOperator::scaled_identity(n(), -1.0), Vector::Zero(n()));
  }

  double l1_objective(const Vector& u) const { return norm_l1(u); }

  // u - A*(AA*)^-1 (Au - b)
  Vector project_feasible(const Vector& u) const {
    return u - A.transpose() * aat_llt->solve(Aop.apply(u) - b);
  }

  // Inverse map of the primal/dual correspondence: x = (AA*)^-1 A z.
  Vector x_from_z3(const Vector& z3) const { return aat_llt->solve(Aop.apply(z3)); }
};

// Seeded generator; resamples A until cond(AA*) <= 1e6, then takes b = A u0
// for a sparse u0 so the equality constraints are consistent.
inline BasisPursuitInstance make_bp(Index m, Index n, std::uint64_t seed) {
  require(m > 0 && n > m, "make_bp: need 0 < m < n");
  Rng rng(seed);
  for (int attempt = 0; attempt < 10; ++attempt) {
    Matrix a = rng.normal_matrix(m, n);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a * a.transpose());
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (lo <= 0.0 || hi / lo > 1e6) continue;
    const Vector u0 = rng.sparse_vector(n, std::max<Index>(1, m / 3));
    Vector rhs = a * u0;
    return BasisPursuitInstance(std::move(a), std::move(rhs));
  }
  throw Error("make_bp: could not draw a well-conditioned instance in 10 attempts");
}

// ADM on the primal split  min ||v||_1 + i_{Au=b}(u), u - v = 0:
//   v <- shrink(u + z/lambda, 1/lambda)
//   u <- (v - z/lambda) - A*(AA*)^-1 (A(v - z/lambda) - b)
//   z <- z + lambda (u - v)
inline SteppedAlgorithm bp_primal_stepper(std::shared_ptr<const BasisPursuitInstance> inst) {
  return {"bp-primal",
          [inst](const SolverState& st, const SolverConfig& cfg) {
            const double lam = cfg.lambda;
            const Vector v = prox_l1(st.at("u") + st.at("z") / lam, 1.0 / lam);
            const Vector u = inst->project_feasible(v - st.at("z") / lam);
            SolverState next("bp-primal", {}, st.k() + 1);
            next.set("v", v);
            next.set("u", u);
            next.set("z", st.at("z") + lam * (u - v));
            return next;
          },
          [inst](const SolverState& st) { return inst->l1_objective(st.at("u")); },
          [](const SolverState& st) -> double {
            return st.has("v") ? (st.at("u") - st.at("v")).norm() : detail::quiet_nan();
          }};
}

// ADM on the dual split (state keeps s = A* x so the product is reused):
//   y <- clamp(A* x + lambda z)
//   x <- (AA*)^-1 (A y - lambda (A z - b))
//   z <- z + (A* x - y)/lambda
inline SteppedAlgorithm bp_dual_stepper(std::shared_ptr<const BasisPursuitInstance> inst) {
  return {"bp-dual",
          [inst](const SolverState& st, const SolverConfig& cfg) {
            const double lam = cfg.lambda;
            const Vector y = project_linf_ball(st.at("s") + lam * st.at("z"));
            const Vector x = inst->aat_llt->solve(inst->Aop.apply(y) -
                                                  lam * (inst->Aop.apply(st.at("z")) - inst->b));
            const Vector s = inst->Aop.adjoint_apply(x);
            SolverState next("bp-dual", {}, st.k() + 1);
            next.set("y", y);
            next.set("x", x);
            next.set("s", s);
            next.set("z", st.at("z") + (s - y) / lam);
            return next;
          },
          [inst](const SolverState& st) { return inst->b.dot(st.at("x")); },
          [](const SolverState& st) -> double {
            return st.has("y") ? (st.at("s") - st.at("y")).norm() : detail::quiet_nan();
          }};
}

inline SolverState make_bp_dual_state(const BasisPursuitInstance& inst, const Vector& x0,
                                      const Vector& z0) {
  SolverState st("bp-dual", {});
  st.set("x", x0);
  st.set("s", inst.Aop.adjoint_apply(x0));
  st.set("z", z0);
  return st;
}

// Memoized master form of the dual split; one A* x per iteration is saved:
//   t <- clamp(s + lambda z)
//   s <- A*(AA*)^-1 (A (t - lambda z) + lambda b)
//   z <- z + (s - t)/lambda
inline SteppedAlgorithm bp_dual_memoized_stepper(std::shared_ptr<const BasisPursuitInstance> inst) {
  return {"bp-dual-m",
          [inst](const SolverState& st, const SolverConfig& cfg) {
            const double lam = cfg.lambda;
            const Vector t = project_linf_ball(st.at("s") + lam * st.at("z"));
            const Vector s = inst->Aop.adjoint_apply(
                inst->aat_llt->solve(inst->Aop.apply(t - lam * st.at("z")) + lam * inst->b));
            SolverState next("bp-dual-m", {}, st.k() + 1);
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

// Basis pursuit in the three-subproblem form  min ||s||_1 + i_{y=b}(y),
// Cx - y = 0, x - s = 0 with C = A; used as an independent reference route.
inline ThreeBlockProblem bp_three_block(const BasisPursuitInstance& inst) {
  return ThreeBlockProblem(ProxFunction::l1_norm(inst.n()), ProxFunction::point_indicator(inst.b),
                           LinearOperator::dense(inst.A));
}

}  // namespace admeq

#endif  // ADMEQ_INSTANCES_BP_HPP_
