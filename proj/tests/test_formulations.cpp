#include "admeq/formulations.hpp"
#include "admeq/instances/bp.hpp"
#include "admeq/instances/bpdn.hpp"
#include "admeq/instances/three_block.hpp"
#include "admeq/rng.hpp"
#include "admeq/solvers.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace admeq;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

double max_abs_diff(const Vector& a, const Vector& b) {
  REQUIRE(a.size() == b.size());
  return (a - b).cwiseAbs().maxCoeff();
}

// Long dual-split reference run shared by several checks.
struct BpdnReference {
  std::shared_ptr<BpdnInstance> inst;
  std::shared_ptr<MasterProblem> mp;
  Vector x, y, z;
};

const BpdnReference& bpdn_reference() {
  static const BpdnReference ref = [] {
    BpdnReference r;
    r.inst = std::make_shared<BpdnInstance>(make_bpdn(10, 30, 7, 1.0));
    r.mp = std::make_shared<MasterProblem>(build_master(r.inst->dual_split_problem()));
    SolverConfig cfg;
    cfg.max_iter = 20000;
    cfg.stop_tol = 1e-13;
    cfg.record_trace = false;
    Trace tr = run(make_alg1(r.mp),
                   make_alg1_state(*r.mp, Vector::Zero(10), Vector::Zero(30)), cfg);
    r.x = tr.last().state.at("x");
    r.y = tr.last().state.at("y");
    r.z = tr.last().state.at("z");
    return r;
  }();
  return ref;
}

}  // namespace

TEST_CASE("master of an affine-set indicator collapses to a constant prox") {
  // f = i_{Au = b} postcomposed by A itself: F = i_{{b}}, so the prox
  // returns b no matter the input.
  Matrix a(1, 2);
  a << 1.0, 2.0;
  const Vector b = vec({2.0});
  MasterSide side(ProxFunction::affine_indicator(LinearOperator::dense(a), b),
                  LinearOperator::dense(a), Vector::Zero(1), "F");
  Rng rng(31);
  for (double lam : {0.3, 1.0, 5.0}) {
    const auto res = side.prox(rng.normal_vector(1), lam);
    CHECK(max_abs_diff(res.image, b) < 1e-10);
    CHECK(std::abs((a * res.witness - b)[0]) < 1e-10);
  }
}

TEST_CASE("master with identity operator collapses to the inner prox") {
  MasterSide side(ProxFunction::l1_norm(3), LinearOperator::identity(3), Vector::Zero(3), "F");
  Rng rng(32);
  for (int t = 0; t < 20; ++t) {
    const Vector r = rng.normal_vector(3);
    const double lam = 0.2 + rng.uniform();
    CHECK(max_abs_diff(side.prox(r, lam).image, prox_l1(r, lam)) == 0.0);
  }
}

TEST_CASE("master of a scaled quadratic has the scalar closed form") {
  // f = 1/2 ||x - b||^2 with A = I: prox_{lambda F}(r) = (lambda b + r)/(1 + lambda).
  MasterSide side(ProxFunction::squared_l2(1, 1.0, Vector::Zero(1)), LinearOperator::identity(1),
                  Vector::Zero(1), "F");
  CHECK(max_abs_diff(side.prox(vec({2.0}), 1.0).image, vec({1.0})) < 1e-14);
}

TEST_CASE("unregistered joint solver classes are rejected") {
  Matrix a(2, 3);
  a << 1, 0, 1, 0, 1, 0;
  CHECK_THROWS_AS(
      MasterSide(ProxFunction::l1_norm(3), LinearOperator::dense(a), Vector::Zero(2), "F"),
      NoSubproblemSolver);
}

TEST_CASE("dual prox of a point-indicator master is a shift") {
  // F = i_{{b}}: prox_{lambda F*(-.)}(r) = r + lambda b.
  AdmProblem p(ProxFunction::point_indicator(vec({1.0})), ProxFunction::zero(1),
               LinearOperator::identity(1), LinearOperator::identity(1), Vector::Zero(1));
  DualProblem dp = build_dual(p);
  CHECK(max_abs_diff(dp.Fstar_neg().prox(vec({0.0}), 2.0), vec({2.0})) < 1e-14);
}

TEST_CASE("dual prox of the basis pursuit split is the hand-coded clamp") {
  // On min ||v||_1 + i_{Au=b}(u), u - v = 0, the G side is the l1 block, so
  // prox of G*(-.) must coincide with the independent projection.
  auto bp = make_bp(4, 9, 5);
  AdmProblem p(ProxFunction::affine_indicator(LinearOperator::dense(bp.A), bp.b),
               ProxFunction::l1_norm(9), LinearOperator::identity(9),
               LinearOperator::scaled_identity(9, -1.0), Vector::Zero(9));
  DualProblem dp = build_dual(p);
  Rng rng(33);
  for (int t = 0; t < 20; ++t) {
    const Vector r = rng.normal_vector(9);
    const double tau = 0.2 + rng.uniform();
    CHECK(max_abs_diff(dp.Gstar_neg().prox(r, tau), project_linf_ball(r)) < 1e-12);
  }
}

TEST_CASE("dual proxes satisfy the Moreau decomposition on a BPDN instance") {
  const auto& ref = bpdn_reference();
  ProxFunction F = ref.mp->F();
  ProxFunction Fc = conjugate_prox(F);
  Rng rng(34);
  for (double lam : {0.1, 1.0, 10.0}) {
    for (int t = 0; t < 10; ++t) {
      const Vector x = rng.normal_vector(30);
      const Vector lhs = F.prox(x, lam) + lam * Fc.prox(x / lam, 1.0 / lam);
      CHECK(max_abs_diff(lhs, x) < 1e-10);
    }
  }
}

TEST_CASE("dual proxes agree with the conjugate transform of the masters") {
  // The dual sides must match conjugate_prox of F and G composed with
  // negation, computed through the independent ProxFunction transforms.
  const auto& ref = bpdn_reference();
  DualProblem dp = build_dual(*ref.mp);
  const ProxFunction f_route = negated_arg(conjugate_prox(ref.mp->F()));
  const ProxFunction g_route = negated_arg(conjugate_prox(ref.mp->G()));
  Rng rng(40);
  for (int t = 0; t < 15; ++t) {
    const Vector r = rng.normal_vector(30);
    const double tau = 0.2 + rng.uniform();
    CHECK(max_abs_diff(dp.Fstar_neg().prox(r, tau), f_route.prox(r, tau)) < 1e-10);
    CHECK(max_abs_diff(dp.Gstar_neg().prox(r, tau), g_route.prox(r, tau)) < 1e-10);
  }
}

TEST_CASE("prox of F survives the round trip through its conjugate") {
  const auto& ref = bpdn_reference();
  ProxFunction F = ref.mp->F();
  DualProblem dp = build_dual(*ref.mp);
  Rng rng(35);
  for (int t = 0; t < 15; ++t) {
    const Vector x = rng.normal_vector(30);
    const double lam = 0.3 + 2.0 * rng.uniform();
    // prox_{lambda F}(x) = x + lambda prox_{F*(-.)/lambda}(-x/lambda).
    const Vector reconstructed = x + lam * dp.Fstar_neg().prox(-x / lam, 1.0 / lam);
    CHECK(max_abs_diff(reconstructed, F.prox(x, lam)) < 1e-10);
  }
}

TEST_CASE("recovery maps land on the requested image") {
  const auto& ref = bpdn_reference();
  Rng rng(36);
  const AdmProblem& p = ref.mp->problem();
  for (int t = 0; t < 10; ++t) {
    const Vector s = p.A.apply(rng.normal_vector(p.f.dim()));
    const Vector x = ref.mp->recover_x(s);
    CHECK(max_abs_diff(p.A.apply(x), s) < 1e-9);
    const Vector t2 = p.B.apply(rng.normal_vector(p.g.dim())) - p.b;
    const Vector y = ref.mp->recover_y(t2);
    CHECK(max_abs_diff(p.B.apply(y) - p.b, t2) < 1e-9);
  }
}

TEST_CASE("strong duality on the reference BPDN instance") {
  const auto& ref = bpdn_reference();
  const AdmProblem& p = ref.mp->problem();
  const double primal = p.objective(ref.x, ref.y);
  DualProblem dp = build_dual(*ref.mp);
  const double dual = dp.Fstar_neg().value(ref.z) + dp.Gstar_neg().value(ref.z);
  CHECK(std::abs(primal + dual) < 1e-6);
}

TEST_CASE("three-block packaging") {
  Rng rng(37);
  Matrix c = rng.normal_matrix(4, 6);
  ThreeBlockProblem tb(ProxFunction::l1_norm(6),
                       ProxFunction::squared_l2(4, 1.0, vec({1, 2, 3, 4})),
                       LinearOperator::dense(c), 1.0);
  // The x-solve must satisfy (mu^2 I + C*C) x = rhs.
  const Vector rhs = rng.normal_vector(6);
  const Vector x = tb.solve_primal_x(rhs);
  CHECK(max_abs_diff(x + c.transpose() * (c * x), rhs) < 1e-10);
  const Vector rhs2 = rng.normal_vector(4);
  const Vector v = tb.solve_dual_v(rhs2);
  CHECK(max_abs_diff(v + c * (c.transpose() * v), rhs2) < 1e-10);
  CHECK_THROWS_AS(ThreeBlockProblem(ProxFunction::l1_norm(5),
                                    ProxFunction::squared_l2(4, 1.0, Vector::Zero(4)),
                                    LinearOperator::dense(c), 1.0),
                  DimensionMismatch);
}

TEST_CASE("redundant split with C = I matches the two-block solution") {
  // min ||s||_1 + 1/2 ||y - d||^2 with x = s = y collapses to the prox of
  // the l1 norm at d.
  Rng rng(38);
  const Vector d = 2.0 * rng.normal_vector(5);
  auto tb = std::make_shared<ThreeBlockProblem>(ProxFunction::l1_norm(5),
                                                ProxFunction::squared_l2(5, 1.0, d),
                                                LinearOperator::identity(5), 1.0);
  SolverConfig cfg;
  cfg.max_iter = 4000;
  cfg.stop_tol = 1e-13;
  cfg.record_trace = false;
  Trace tr = run(make_three_block_primal(tb),
                 make_three_block_primal_state(Vector::Zero(5), Vector::Zero(5), Vector::Zero(5),
                                               Vector::Zero(5)),
                 cfg);
  CHECK(max_abs_diff(tr.last().state.at("s"), prox_l1(d, 1.0)) < 1e-7);
}

TEST_CASE("three-block minimizer is invariant to the coupling scale") {
  SolverConfig cfg;
  cfg.max_iter = 6000;
  cfg.stop_tol = 1e-13;
  cfg.record_trace = false;
  double objectives[2];
  int i = 0;
  for (double mu : {1.0, 2.5}) {
    auto tb = std::make_shared<ThreeBlockProblem>(make_three_block_l1_quadratic(6, 10, 11, mu));
    Trace tr = run(make_three_block_primal(tb),
                   make_three_block_primal_state(Vector::Zero(10), Vector::Zero(6),
                                                 Vector::Zero(10), Vector::Zero(6)),
                   cfg);
    objectives[i++] = tr.last().objective;
  }
  CHECK(std::abs(objectives[0] - objectives[1]) < 1e-6);
}

TEST_CASE("saddle-point residual") {
  const auto& ref = bpdn_reference();
  const AdmProblem& p = ref.mp->problem();

  // At the converged triple the residual is tiny.
  CHECK(saddle_point_residual(p, ref.x, ref.y, ref.z) < 1e-8);

  // Nowhere near a saddle point.
  CHECK(saddle_point_residual(p, ref.x, Vector::Zero(30), Vector::Zero(30)) > 0.1);

  // Feasible primal pair with a wrong multiplier: only the inclusion parts
  // contribute.
  Rng rng(39);
  const Vector x = rng.normal_vector(10);
  const Vector y = p.A.apply(x);  // A* x - y = 0 by construction
  const Vector u = rng.normal_vector(30);
  const double rx = (x - p.f.prox(x - p.A.adjoint_apply(u), 1.0)).norm();
  const double ry = (y - p.g.prox(y - p.B.adjoint_apply(u), 1.0)).norm();
  CHECK(std::abs(saddle_point_residual(p, x, y, u) - std::sqrt(rx * rx + ry * ry)) < 1e-12);
}
