#ifndef ADMEQ_INSTANCES_THREE_BLOCK_HPP_
#define ADMEQ_INSTANCES_THREE_BLOCK_HPP_

#include "admeq/formulations.hpp"
#include "admeq/rng.hpp"

namespace admeq {

// Canonical l1 + quadratic three-subproblem instance:
//   min ||s||_1 + 1/2 ||y - d||^2   s.t.  Cx - y = 0,  x - s = 0.
inline ThreeBlockProblem make_three_block_l1_quadratic(Index m, Index n, std::uint64_t seed,
                                                       double mu = 1.0) {
  require(m > 0 && n > 0, "make_three_block_l1_quadratic: sizes must be positive");
  Rng rng(seed);
  Matrix c = rng.normal_matrix(m, n) / std::sqrt(static_cast<double>(n));
  Vector d = rng.normal_vector(m);
  return ThreeBlockProblem(ProxFunction::l1_norm(n), ProxFunction::squared_l2(m, 1.0, d),
                           LinearOperator::dense(std::move(c)), mu);
}

}  // namespace admeq

#endif  // ADMEQ_INSTANCES_THREE_BLOCK_HPP_
