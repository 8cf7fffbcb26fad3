#ifndef ADMEQ_INSTANCES_RPRS_HPP_
#define ADMEQ_INSTANCES_RPRS_HPP_

#include "admeq/formulations.hpp"
#include "admeq/rng.hpp"
#include "admeq/solvers.hpp"

#include <utility>

namespace admeq {

// Data for relaxed Peaceman-Rachford runs on  min f(x) + g(Ax)  and on the
// matching dual  min f*(u) + (gA)*(-u).  The composition g(A.) enters only
// through its prox oracle; the dual oracles are derived from the primal ones
// (Moreau plus negation), with the dual run using parameter 1/lambda.
struct RprsInstance {
  ProxFunction f;
  ProxFunction gA;
  ProxFunction f_conj;
  ProxFunction gA_conj_neg;
  LinearOperator A;

  RprsInstance(ProxFunction f_, ProxFunction gA_, LinearOperator a)
      : f(std::move(f_)),
        gA(std::move(gA_)),
        f_conj(conjugate_prox(f)),
        gA_conj_neg(conjugate_prox_negated(gA)),
        A(std::move(a)) {
    require_dims(f.dim() == gA.dim() && A.cols() == f.dim(),
                 "RprsInstance: dimension mismatch");
  }

  SteppedAlgorithm primal_algorithm() const { return make_rprs(f, gA, "rprs-primal"); }
  SteppedAlgorithm dual_algorithm() const {
    return make_rprs(f_conj, gA_conj_neg, "rprs-dual");
  }

  static SolverConfig dual_config(const SolverConfig& cfg) {
    SolverConfig dual = cfg;
    dual.lambda = 1.0 / cfg.lambda;
    return dual;
  }
};

// Lasso-type pair:  f = ||.||_1,  g = 1/2 ||. - c||^2,  so
// g(Ax) = 1/2 ||Ax - c||^2 has a quadratic prox in closed form.
inline RprsInstance make_rprs_lasso(Index m, Index n, std::uint64_t seed) {
  require(m > 0 && n > 0, "make_rprs_lasso: sizes must be positive");
  Rng rng(seed);
  Matrix a = rng.normal_matrix(m, n) / std::sqrt(static_cast<double>(m));
  Vector c = rng.normal_vector(m);
  QuadraticForm q(LinearOperator::dense(a.transpose() * a), -a.transpose() * c,
                  0.5 * c.squaredNorm());
  return RprsInstance(ProxFunction::l1_norm(n), ProxFunction::quadratic(std::move(q)),
                      LinearOperator::dense(std::move(a)));
}

}  // namespace admeq

#endif  // ADMEQ_INSTANCES_RPRS_HPP_
