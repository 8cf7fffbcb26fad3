#ifndef ADMEQ_ADMEQ_HPP_
#define ADMEQ_ADMEQ_HPP_

#include "admeq/core.hpp"
#include "admeq/equivalence.hpp"
#include "admeq/formulations.hpp"
#include "admeq/grid.hpp"
#include "admeq/instances/bp.hpp"
#include "admeq/instances/bpdn.hpp"
#include "admeq/instances/rprs.hpp"
#include "admeq/instances/three_block.hpp"
#include "admeq/instances/tv.hpp"
#include "admeq/io.hpp"
#include "admeq/linear_operator.hpp"
#include "admeq/prox.hpp"
#include "admeq/quadratic.hpp"
#include "admeq/registry.hpp"
#include "admeq/rng.hpp"
#include "admeq/solvers.hpp"

#endif  // ADMEQ_ADMEQ_HPP_
