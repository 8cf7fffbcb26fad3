#include "admeq/instances/bp.hpp"
#include "admeq/instances/bpdn.hpp"
#include "admeq/instances/rprs.hpp"
#include "admeq/instances/three_block.hpp"
#include "admeq/instances/tv.hpp"
#include "admeq/io.hpp"
#include "admeq/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>

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

Trace run_quiet(const SteppedAlgorithm& alg, const SolverState& init, int iters,
                double lambda = 1.0) {
  SolverConfig cfg;
  cfg.max_iter = iters;
  cfg.lambda = lambda;
  cfg.stop_tol = 0.0;
  cfg.record_trace = false;
  return run(alg, init, cfg);
}

}  // namespace

// ---------------------------------------------------------------------------
// Basis pursuit
// ---------------------------------------------------------------------------

TEST_CASE("tiny basis pursuit instance solved by both splits") {
  // A = [1 2], b = [2].  The l1 problem has the two basic candidates
  // (2, 0) and (0, 1); enumerating them gives the optimum (0, 1), value 1.
  Matrix a(1, 2);
  a << 1.0, 2.0;
  const Vector b = vec({2.0});
  double best = kInfinity;
  Vector best_u;
  for (int j = 0; j < 2; ++j) {
    Vector cand = Vector::Zero(2);
    cand[j] = b[0] / a(0, j);
    if (norm_l1(cand) < best) {
      best = norm_l1(cand);
      best_u = cand;
    }
  }
  REQUIRE(best == 1.0);
  REQUIRE(max_abs_diff(best_u, vec({0.0, 1.0})) == 0.0);

  auto inst = std::make_shared<BasisPursuitInstance>(BasisPursuitInstance(a, b));
  SolverState pinit("bp-primal", {});
  pinit.set("u", Vector::Zero(2));
  pinit.set("z", Vector::Zero(2));
  Trace tp = run_quiet(bp_primal_stepper(inst), pinit, 3000);
  CHECK(std::abs(tp.last().objective - best) < 1e-6);
  CHECK(max_abs_diff(tp.last().state.at("u"), best_u) < 1e-5);

  Trace td = run_quiet(bp_dual_stepper(inst),
                       make_bp_dual_state(*inst, Vector::Zero(1), Vector::Zero(2)), 3000);
  // The multiplier of the dual split is the primal variable.
  CHECK(max_abs_diff(td.last().state.at("z"), best_u) < 1e-5);
}

TEST_CASE("square identity basis pursuit pins the solution") {
  auto inst = std::make_shared<BasisPursuitInstance>(
      BasisPursuitInstance(Matrix::Identity(3, 3), vec({1.0, -2.0, 0.5})));
  SolverState pinit("bp-primal", {});
  pinit.set("u", Vector::Zero(3));
  pinit.set("z", Vector::Zero(3));
  Trace tp = run_quiet(bp_primal_stepper(inst), pinit, 500);
  CHECK(max_abs_diff(tp.last().state.at("u"), inst->b) < 1e-6);
}

TEST_CASE("seeded basis pursuit agrees with the three-subproblem reference") {
  auto inst = std::make_shared<BasisPursuitInstance>(make_bp(5, 15, 3));

  // Reference objective from a long run of the independent three-block route.
  auto tb = std::make_shared<ThreeBlockProblem>(bp_three_block(*inst));
  Trace tref = run_quiet(make_three_block_primal(tb),
                         make_three_block_primal_state(Vector::Zero(15), Vector::Zero(5),
                                                       Vector::Zero(15), Vector::Zero(5)),
                         20000);
  const double ref_obj = tref.last().objective;

  SolverState pinit("bp-primal", {});
  pinit.set("u", Vector::Zero(15));
  pinit.set("z", Vector::Zero(15));
  Trace tp = run_quiet(bp_primal_stepper(inst), pinit, 8000);
  CHECK(std::abs(tp.last().objective - ref_obj) < 1e-6);

  Trace td = run_quiet(bp_dual_stepper(inst),
                       make_bp_dual_state(*inst, Vector::Zero(5), Vector::Zero(15)), 8000);
  const Vector u_rec = inst->project_feasible(td.last().state.at("z"));
  CHECK(std::abs(inst->l1_objective(u_rec) - ref_obj) < 1e-6);
}

TEST_CASE("dual-split first step is the literal clamp") {
  auto inst = std::make_shared<BasisPursuitInstance>(make_bp(4, 10, 6));
  Rng rng(51);
  const Vector x0 = rng.normal_vector(4);
  const Vector z0 = rng.normal_vector(10);
  SolverConfig cfg;
  cfg.lambda = 0.8;
  SolverState st = bp_dual_stepper(inst).step(make_bp_dual_state(*inst, x0, z0), cfg);
  CHECK(max_abs_diff(st.at("y"),
                     project_linf_ball(inst->A.transpose() * x0 + cfg.lambda * z0)) == 0.0);
}

TEST_CASE("memoized dual split matches the direct dual split") {
  auto inst = std::make_shared<BasisPursuitInstance>(make_bp(5, 15, 3));
  Rng rng(52);
  const Vector x0 = rng.normal_vector(5);
  const Vector z0 = rng.normal_vector(15);
  SolverConfig cfg;
  SolverState direct = make_bp_dual_state(*inst, x0, z0);
  SolverState memo("bp-dual-m", {});
  memo.set("s", direct.at("s"));
  memo.set("t", Vector::Zero(15));  // unused at k = 0
  memo.set("z", z0);
  auto dstep = bp_dual_stepper(inst);
  auto mstep = bp_dual_memoized_stepper(inst);
  for (int k = 0; k < 100; ++k) {
    direct = dstep.step(direct, cfg);
    memo = mstep.step(memo, cfg);
    CHECK(max_abs_diff(memo.at("s"), direct.at("s")) < 1e-10);
    CHECK(max_abs_diff(memo.at("t"), direct.at("y")) < 1e-10);
    CHECK(max_abs_diff(memo.at("z"), direct.at("z")) < 1e-10);
  }
}

// ---------------------------------------------------------------------------
// Basis pursuit denoising
// ---------------------------------------------------------------------------

TEST_CASE("identity-dictionary BPDN is a soft threshold") {
  auto inst = std::make_shared<BpdnInstance>(
      BpdnInstance(Matrix::Identity(2, 2), vec({2.0, 0.2}), 1.0));
  SolverState pinit("bpdn-primal", {});
  pinit.set("u", Vector::Zero(2));
  pinit.set("z", Vector::Zero(2));
  Trace tp = run_quiet(bpdn_primal_stepper(inst), pinit, 2000);
  CHECK(max_abs_diff(tp.last().state.at("u"), vec({1.0, 0.0})) < 1e-7);
}

TEST_CASE("one-dimensional BPDN dual-split step against hand arithmetic") {
  // A = [1], b = 2, alpha = lambda = 1, from x = z = 0:
  // y1 = clamp(0) = 0, x1 = (1 + 1)^-1 (0 - (0 - 2)) = 1, z1 = 1.
  auto inst = std::make_shared<BpdnInstance>(BpdnInstance(Matrix::Identity(1, 1), vec({2.0}), 1.0));
  SolverConfig cfg;
  SolverState st = bpdn_dual_stepper(inst).step(
      make_bpdn_dual_state(*inst, Vector::Zero(1), Vector::Zero(1)), cfg);
  CHECK(max_abs_diff(st.at("y"), vec({0.0})) == 0.0);
  CHECK(max_abs_diff(st.at("x"), vec({1.0})) < 1e-15);
  CHECK(max_abs_diff(st.at("z"), vec({1.0})) < 1e-15);
}

TEST_CASE("both BPDN splits converge to one objective") {
  auto inst = std::make_shared<BpdnInstance>(make_bpdn(10, 30, 7, 1.0));
  SolverState pinit("bpdn-primal", {});
  pinit.set("u", Vector::Zero(30));
  pinit.set("z", Vector::Zero(30));
  Trace tp = run_quiet(bpdn_primal_stepper(inst), pinit, 6000);
  Trace td = run_quiet(bpdn_dual_stepper(inst),
                       make_bpdn_dual_state(*inst, Vector::Zero(10), Vector::Zero(30)), 6000);
  // The dual split's multiplier is the primal variable.
  const double obj_primal = tp.last().objective;
  const double obj_from_dual = inst->primal_objective(td.last().state.at("z"));
  CHECK(std::abs(obj_primal - obj_from_dual) < 1e-6);
}

TEST_CASE("BPDN steppers are stationary at their solved states") {
  auto inst = std::make_shared<BpdnInstance>(make_bpdn(8, 20, 13, 1.0));
  SolverConfig cfg;
  for (auto make_pair : {0, 1}) {
    SteppedAlgorithm alg = make_pair == 0
                               ? bpdn_primal_stepper(inst)
                               : bpdn_dual_stepper(inst);
    SolverState init;
    if (make_pair == 0) {
      init = SolverState("bpdn-primal", {});
      init.set("u", Vector::Zero(20));
      init.set("z", Vector::Zero(20));
    } else {
      init = make_bpdn_dual_state(*inst, Vector::Zero(8), Vector::Zero(20));
    }
    Trace tr = run_quiet(alg, init, 30000);
    SolverState settled = tr.last().state;
    SolverState stepped = alg.step(settled, cfg);
    double worst = 0.0;
    for (const auto& [key, v] : settled.vars())
      if (stepped.has(key)) worst = std::max(worst, (v - stepped.at(key)).cwiseAbs().maxCoeff());
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("orthonormal shortcut spends no operator products in the loop") {
  auto inst = std::make_shared<BpdnInstance>(make_bpdn(12, 12, 17, 1.0, /*orthonormal=*/true));
  REQUIRE(inst->orthonormal);
  SolverConfig cfg;
  SolverState st("bpdn-dual-m", {});
  Rng rng(53);
  st.set("s", rng.normal_vector(12));
  st.set("z", rng.normal_vector(12));
  auto alg = bpdn_dual_memoized_stepper(inst);
  st = alg.step(st, cfg);  // warm anything lazy
  inst->Aop.reset_call_count();
  for (int k = 0; k < 50; ++k) st = alg.step(st, cfg);
  CHECK(inst->Aop.call_count() == 0);

  // General A: the master form costs two products per iteration and the
  // direct dual split three.
  auto gen = std::make_shared<BpdnInstance>(make_bpdn(10, 30, 7, 1.0));
  SolverState ms("bpdn-dual-m", {});
  ms.set("s", Vector::Zero(30));
  ms.set("z", Vector::Zero(30));
  auto malg = bpdn_dual_memoized_stepper(gen);
  ms = malg.step(ms, cfg);
  gen->Aop.reset_call_count();
  for (int k = 0; k < 50; ++k) ms = malg.step(ms, cfg);
  CHECK(gen->Aop.call_count() == 2 * 50);

  SolverState ds = make_bpdn_dual_state(*gen, Vector::Zero(10), Vector::Zero(30));
  auto dalg = bpdn_dual_stepper(gen);
  gen->Aop.reset_call_count();
  for (int k = 0; k < 50; ++k) ds = dalg.step(ds, cfg);
  CHECK(gen->Aop.call_count() == 3 * 50);

  // Orthonormal memoized iterates agree with the general-path iterates.
  SolverState a("bpdn-dual-m", {}), b("bpdn-dual-m", {});
  a.set("s", Vector::Zero(12));
  a.set("z", Vector::Zero(12));
  b = a;
  auto fast = bpdn_dual_memoized_stepper(inst);
  auto slow_inst = std::make_shared<BpdnInstance>(*inst);
  slow_inst->orthonormal = false;
  auto slow = bpdn_dual_memoized_stepper(slow_inst);
  for (int k = 0; k < 50; ++k) {
    a = fast.step(a, cfg);
    b = slow.step(b, cfg);
    CHECK(max_abs_diff(a.at("s"), b.at("s")) < 1e-10);
  }
}

// ---------------------------------------------------------------------------
// Structural agreement: specialized steppers versus the generic algorithms.
// ---------------------------------------------------------------------------

TEST_CASE("basis pursuit steppers are the generic algorithms in disguise") {
  auto inst = std::make_shared<BasisPursuitInstance>(make_bp(5, 15, 3));
  auto mp = std::make_shared<MasterProblem>(build_master(inst->dual_split_problem()));
  auto dp = std::make_shared<DualProblem>(build_dual(*mp));
  SolverConfig cfg;
  cfg.lambda = 1.4;
  Rng rng(54);
  const Vector x0 = rng.normal_vector(5);
  const Vector z0 = rng.normal_vector(15);

  SolverState g1 = make_alg1_state(*mp, x0, z0);
  SolverState i1 = make_bp_dual_state(*inst, x0, z0);
  auto i1step = bp_dual_stepper(inst);
  SolverState g3 = make_alg3_state(z0, inst->Aop.adjoint_apply(x0));
  SolverState i3("bp-primal", {});
  i3.set("u", z0);
  i3.set("z", inst->Aop.adjoint_apply(x0));
  auto i3step = bp_primal_stepper(inst);
  SolverState g2 = make_alg2_state(inst->Aop.adjoint_apply(x0), z0);
  SolverState i2("bp-dual-m", {});
  i2.set("s", inst->Aop.adjoint_apply(x0));
  i2.set("z", z0);
  auto i2step = bp_dual_memoized_stepper(inst);

  for (int k = 0; k < 60; ++k) {
    g1 = adm1_step(*mp, g1, cfg);
    i1 = i1step.step(i1, cfg);
    CHECK(max_abs_diff(g1.at("x"), i1.at("x")) < 1e-10);
    CHECK(max_abs_diff(g1.at("y"), i1.at("y")) < 1e-10);
    CHECK(max_abs_diff(g1.at("z"), i1.at("z")) < 1e-10);

    g3 = adm3_dual_step(*dp, g3, cfg);
    i3 = i3step.step(i3, cfg);
    CHECK(max_abs_diff(g3.at("v"), i3.at("v")) < 1e-10);
    CHECK(max_abs_diff(g3.at("u"), i3.at("u")) < 1e-10);
    CHECK(max_abs_diff(g3.at("z"), i3.at("z")) < 1e-10);

    g2 = adm2_master_step(*mp, g2, cfg);
    i2 = i2step.step(i2, cfg);
    // the memoized form stores t = y1 = -(generic t)
    CHECK(max_abs_diff(g2.at("s"), i2.at("s")) < 1e-10);
    CHECK(max_abs_diff(g2.at("t"), Vector(-i2.at("t"))) < 1e-10);
    CHECK(max_abs_diff(g2.at("z"), i2.at("z")) < 1e-10);
  }
}

TEST_CASE("BPDN steppers are the generic algorithms in disguise") {
  auto inst = std::make_shared<BpdnInstance>(make_bpdn(10, 30, 7, 1.0));
  auto mp = std::make_shared<MasterProblem>(build_master(inst->dual_split_problem()));
  auto dp = std::make_shared<DualProblem>(build_dual(*mp));
  SolverConfig cfg;
  cfg.lambda = 0.6;
  Rng rng(55);
  const Vector x0 = rng.normal_vector(10);
  const Vector z0 = rng.normal_vector(30);

  SolverState g1 = make_alg1_state(*mp, x0, z0);
  SolverState i1 = make_bpdn_dual_state(*inst, x0, z0);
  auto i1step = bpdn_dual_stepper(inst);
  SolverState g3 = make_alg3_state(z0, inst->Aop.adjoint_apply(x0));
  SolverState i3("bpdn-primal", {});
  i3.set("u", z0);
  i3.set("z", inst->Aop.adjoint_apply(x0));
  auto i3step = bpdn_primal_stepper(inst);

  for (int k = 0; k < 60; ++k) {
    g1 = adm1_step(*mp, g1, cfg);
    i1 = i1step.step(i1, cfg);
    CHECK(max_abs_diff(g1.at("x"), i1.at("x")) < 1e-10);
    CHECK(max_abs_diff(g1.at("z"), i1.at("z")) < 1e-10);

    g3 = adm3_dual_step(*dp, g3, cfg);
    i3 = i3step.step(i3, cfg);
    CHECK(max_abs_diff(g3.at("u"), i3.at("u")) < 1e-10);
    CHECK(max_abs_diff(g3.at("z"), i3.at("z")) < 1e-10);
  }
}

TEST_CASE("TV steppers are the generic algorithms in disguise") {
  auto inst = std::make_shared<TvInstance>(make_tv_synthetic(6, 7, 1.0, 21));
  auto mp = std::make_shared<MasterProblem>(build_master(inst->adm_problem()));
  auto dp = std::make_shared<DualProblem>(build_dual(*mp));
  SolverConfig cfg;
  cfg.lambda = 1.0;
  Rng rng(56);
  const Index np = inst->pixels();
  const Vector y0 = rng.normal_vector(2 * np);
  const Vector z0 = rng.normal_vector(2 * np);
  const Vector x0 = rng.normal_vector(np);

  // (y-variable of the TV model plays the generic x role, the image the
  //  generic y role.)
  SolverState g1 = make_alg1_state(*mp, y0, z0);
  SolverState i1 = make_tv_primal_state(y0, z0);
  auto i1step = tv_primal_stepper(inst);
  SolverState g3 = make_alg3_state(z0, Vector(-y0));
  SolverState i3 = make_tv_dual_state(z0, Vector(-y0));
  auto i3step = tv_dual_stepper(inst);
  SolverState g4 = make_alg4_state(*mp, x0, z0, Vector(z0 + rng.normal_vector(2 * np)));
  SolverState i4 = make_tv_primal_dual_state(*inst, x0, g4.at("u"), g4.at("u_prev"));
  auto i4step = tv_primal_dual_stepper(inst);
  SolverState g5 = make_alg5_state(*mp, x0, z0);
  SolverState i5 = make_tv_swapped_state(*inst, x0, z0);
  auto i5step = tv_swapped_stepper(inst);

  for (int k = 0; k < 40; ++k) {
    g1 = adm1_step(*mp, g1, cfg);
    i1 = i1step.step(i1, cfg);
    CHECK(max_abs_diff(g1.at("x"), i1.at("y")) < 1e-10);
    CHECK(max_abs_diff(g1.at("y"), i1.at("x")) < 1e-10);
    CHECK(max_abs_diff(g1.at("z"), i1.at("z")) < 1e-10);

    g3 = adm3_dual_step(*dp, g3, cfg);
    i3 = i3step.step(i3, cfg);
    CHECK(max_abs_diff(g3.at("v"), i3.at("u")) < 1e-10);
    CHECK(max_abs_diff(g3.at("u"), i3.at("v")) < 1e-10);
    CHECK(max_abs_diff(g3.at("z"), i3.at("z")) < 1e-10);

    g4 = adm4_primal_dual_step(*mp, g4, cfg);
    i4 = i4step.step(i4, cfg);
    CHECK(max_abs_diff(g4.at("y"), i4.at("x")) < 1e-10);
    CHECK(max_abs_diff(g4.at("u"), i4.at("v")) < 1e-10);

    g5 = adm5_swapped_step(*mp, g5, cfg);
    i5 = i5step.step(i5, cfg);
    CHECK(max_abs_diff(g5.at("x"), i5.at("y")) < 1e-10);
    CHECK(max_abs_diff(g5.at("y"), i5.at("x")) < 1e-10);
    CHECK(max_abs_diff(g5.at("z"), i5.at("z")) < 1e-10);
  }
}

// ---------------------------------------------------------------------------
// Total variation specifics
// ---------------------------------------------------------------------------

TEST_CASE("constant image is a fixed point of TV denoising") {
  auto inst = std::make_shared<TvInstance>(
      TvInstance(Vector::Constant(25, 0.4), 5, 5, 1.0));
  Trace tr = run_quiet(tv_primal_stepper(inst),
                       make_tv_primal_state(Vector::Zero(50), Vector::Zero(50)), 400);
  CHECK(max_abs_diff(tr.last().state.at("x"), inst->image) < 1e-8);
  CHECK(tr.last().state.at("y").norm() < 1e-8);
  // all four iterations settle
  SolverConfig cfg;
  Trace td = run_quiet(tv_dual_stepper(inst),
                       make_tv_dual_state(Vector::Zero(50), Vector::Zero(50)), 400);
  SolverState stepped = tv_dual_stepper(inst).step(td.last().state, cfg);
  CHECK(max_abs_diff(stepped.at("v"), td.last().state.at("v")) < 1e-8);
}

TEST_CASE("primal and dual TV runs meet at one objective") {
  auto inst = std::make_shared<TvInstance>(make_tv_synthetic(8, 8, 1.0, 21));
  Trace tp = run_quiet(tv_primal_stepper(inst),
                       make_tv_primal_state(Vector::Zero(128), Vector::Zero(128)), 6000);
  Trace td = run_quiet(tv_dual_stepper(inst),
                       make_tv_dual_state(Vector::Zero(128), Vector::Zero(128)), 6000);
  const Vector x_from_dual = inst->primal_from_dual(td.last().state.at("u"));
  CHECK(std::abs(tp.last().objective - inst->primal_objective_x(x_from_dual)) < 1e-6);
  // and the dual optimum complements the primal one:
  // primal value + dual value = (alpha/2) ||b||^2 at the saddle point.
  const double c = 0.5 * inst->alpha * inst->image.squaredNorm();
  CHECK(std::abs(tp.last().objective + td.last().objective - c) < 1e-6);
}

TEST_CASE("Fourier and direct solves agree") {
  auto inst = std::make_shared<TvInstance>(make_tv_synthetic(8, 8, 1.0, 21));
  Rng rng(57);
  for (double lam : {0.5, 1.0, 2.0}) {
    const Vector rhs = rng.normal_vector(64);
    CHECK(max_abs_diff(inst->solve_image_system(rhs, lam, TvSolvePath::Fft),
                       inst->solve_image_system(rhs, lam, TvSolvePath::Direct)) < 1e-11);
    const Vector rhs2 = rng.normal_vector(128);
    CHECK(max_abs_diff(inst->solve_field_system(rhs2, lam, TvSolvePath::Fft),
                       inst->solve_field_system(rhs2, lam, TvSolvePath::Direct)) < 1e-11);
  }
  // non-square grids as well
  auto rect = std::make_shared<TvInstance>(make_tv_synthetic(6, 9, 0.7, 22));
  const Vector rhs = rng.normal_vector(54);
  CHECK(max_abs_diff(rect->solve_image_system(rhs, 1.3, TvSolvePath::Fft),
                     rect->solve_image_system(rhs, 1.3, TvSolvePath::Direct)) < 1e-11);
}

TEST_CASE("the Fourier path requires a periodic boundary") {
  auto inst = std::make_shared<TvInstance>(
      make_tv_synthetic(6, 6, 1.0, 23, Boundary::Neumann));
  CHECK_THROWS_AS(inst->solve_image_system(Vector::Zero(36), 1.0, TvSolvePath::Fft),
                  InvalidArgument);
  // Neumann runs fine on the direct path.
  Trace tr = run_quiet(tv_primal_stepper(inst, TvSolvePath::Direct),
                       make_tv_primal_state(Vector::Zero(72), Vector::Zero(72)), 200);
  CHECK(std::isfinite(tr.last().objective));
}

TEST_CASE("objective decreases most of the gap to the reference") {
  auto inst = std::make_shared<TvInstance>(make_tv_synthetic(8, 8, 1.0, 21));
  const SolverState init = make_tv_primal_state(Vector::Zero(128), Vector::Zero(128));
  SolverConfig cfg;
  cfg.max_iter = 1;
  // Measure the genuine objective of the x iterate; the split objective at
  // an infeasible (x, y) pair can undershoot the optimum.
  Trace first = run(tv_primal_stepper(inst), init, cfg);
  const double obj0 = inst->primal_objective_x(first.last().state.at("x"));
  Trace ref = run_quiet(tv_primal_stepper(inst), init, 8000);
  const double obj_ref = inst->primal_objective_x(ref.last().state.at("x"));
  Trace budget = run_quiet(tv_primal_stepper(inst), init, 300);
  CHECK(inst->primal_objective_x(budget.last().state.at("x")) <=
        obj0 - 0.9 * (obj0 - obj_ref));

  auto bpdn = std::make_shared<BpdnInstance>(make_bpdn(10, 30, 7, 1.0));
  SolverState pinit("bpdn-primal", {});
  pinit.set("u", Vector::Zero(30));
  pinit.set("z", Vector::Zero(30));
  cfg.max_iter = 1;
  const double b0 = run(bpdn_primal_stepper(bpdn), pinit, cfg).last().objective;
  const double bref = run_quiet(bpdn_primal_stepper(bpdn), pinit, 8000).last().objective;
  const double b300 = run_quiet(bpdn_primal_stepper(bpdn), pinit, 300).last().objective;
  CHECK(b300 <= b0 - 0.9 * (b0 - bref));
}

// ---------------------------------------------------------------------------
// Image ingestion
// ---------------------------------------------------------------------------

TEST_CASE("PGM and CSV readers") {
  const std::string dir = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp");
  const std::string p2 = dir + "/admeq_test_p2.pgm";
  {
    std::ofstream f(p2);
    f << "P2\n# comment\n3 2\n255\n0 128 255\n64 32 16\n";
  }
  GridImage a = read_pgm(p2);
  CHECK(a.rows == 2);
  CHECK(a.cols == 3);
  CHECK(std::abs(a.pixels[1] - 128.0 / 255.0) < 1e-12);

  const std::string p5 = dir + "/admeq_test_p5.pgm";
  {
    std::ofstream f(p5, std::ios::binary);
    f << "P5\n2 2\n255\n";
    const unsigned char raw[4] = {0, 255, 128, 64};
    f.write(reinterpret_cast<const char*>(raw), 4);
  }
  GridImage b = read_pgm(p5);
  CHECK(b.rows == 2);
  CHECK(b.pixels[1] == 1.0);

  const std::string csv = dir + "/admeq_test_grid.csv";
  {
    std::ofstream f(csv);
    f << "0.0,0.5,1.0\n0.25,0.75,0.5\n";
  }
  GridImage c = read_csv_grid(csv);
  CHECK(c.rows == 2);
  CHECK(c.cols == 3);
  CHECK(c.pixels[4] == 0.75);

  // malformed input reports a parse error rather than aborting
  const std::string bad = dir + "/admeq_test_bad.pgm";
  {
    std::ofstream f(bad);
    f << "P2\n3 x\n";
  }
  CHECK_THROWS_AS(read_pgm(bad), ParseError);

  // a TV instance built from a read image runs
  auto inst = std::make_shared<TvInstance>(make_tv(c.pixels, c.rows, c.cols, 1.0));
  Trace tr = run_quiet(tv_primal_stepper(inst),
                       make_tv_primal_state(Vector::Zero(12), Vector::Zero(12)), 50);
  CHECK(std::isfinite(tr.last().objective));

  std::remove(p2.c_str());
  std::remove(p5.c_str());
  std::remove(csv.c_str());
  std::remove(bad.c_str());
}

TEST_CASE("strong duality closes on the remaining shipped instances") {
  // BP, BPDN and TV are checked elsewhere; here the three-block pair and the
  // reflector pair meet their duals.
  auto tb = std::make_shared<ThreeBlockProblem>(make_three_block_l1_quadratic(6, 10, 11));
  Trace tp = run_quiet(make_three_block_primal(tb),
                       make_three_block_primal_state(Vector::Zero(10), Vector::Zero(6),
                                                     Vector::Zero(10), Vector::Zero(6)),
                       20000);
  Trace td = run_quiet(make_three_block_dual(tb),
                       make_three_block_dual_state(Vector::Zero(10), Vector::Zero(6),
                                                   Vector::Zero(10), Vector::Zero(6)),
                       20000);
  const double primal = tp.last().objective;
  const double dual = tb->u_conjugate().value(td.last().state.at("u")) +
                      tb->v_conjugate().value(td.last().state.at("t"));
  CHECK(std::abs(primal + dual) < 1e-6);

  auto inst = std::make_shared<RprsInstance>(make_rprs_lasso(8, 6, 9));
  SolverConfig cfg;
  cfg.max_iter = 20000;
  cfg.lambda = 1.0;
  cfg.alpha = 0.5;
  cfg.record_trace = false;
  Trace rp = run(inst->primal_algorithm(), make_rprs_state(Vector::Zero(6)), cfg);
  SolverConfig dual_cfg = RprsInstance::dual_config(cfg);
  Trace rd = run(inst->dual_algorithm(), make_rprs_state(Vector::Zero(6)), dual_cfg);
  const Vector xp = rp.last().state.at("x");
  const Vector xd = rd.last().state.at("x");
  const double rprimal = inst->f.value(xp) + inst->gA.value(xp);
  const double rdual = inst->f_conj.value(xd) + inst->gA_conj_neg.value(xd);
  CHECK(std::abs(rprimal + rdual) < 1e-6);
}

TEST_CASE("instance generation is reproducible and well conditioned") {
  auto a = make_bp(5, 15, 3);
  auto b = make_bp(5, 15, 3);
  CHECK(a.A == b.A);
  CHECK(a.b == b.b);
  CHECK_THROWS_AS(make_bp(5, 5, 3), InvalidArgument);

  auto c = make_bpdn(10, 30, 7, 1.0);
  auto d = make_bpdn(10, 30, 7, 1.0);
  CHECK(c.A == d.A);
  // the orthonormal variant really is orthonormal
  auto e = make_bpdn(6, 6, 5, 1.0, true);
  CHECK(e.orthonormal);
  CHECK((e.A.transpose() * e.A - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-10);
}
