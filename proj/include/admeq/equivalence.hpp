#ifndef ADMEQ_EQUIVALENCE_HPP_
#define ADMEQ_EQUIVALENCE_HPP_

#include "admeq/formulations.hpp"
#include "admeq/instances/bp.hpp"
#include "admeq/instances/bpdn.hpp"
#include "admeq/instances/rprs.hpp"
#include "admeq/instances/three_block.hpp"
#include "admeq/instances/tv.hpp"
#include "admeq/rng.hpp"
#include "admeq/solvers.hpp"

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace admeq {

// One algorithm pair under the matched initialization its correspondence
// requires, together with the per-iteration map between their iterates.
//
// `forward` predicts run B's quantities at iteration k from run A's state
// sequence (which may extend lookahead_a steps past k); `backward`, when
// present, predicts run A's quantities from run B and is reported with an
// "inv:" prefix.  Quantities name state entries of the target run unless an
// extractor overrides the lookup.
struct IterateMap {
  struct Quantity {
    std::string key;
    int from_k = 0;
  };
  using StateSeq = std::vector<SolverState>;
  using ForwardFn = std::function<std::map<std::string, Vector>(const StateSeq&, int)>;
  using ExtractFn = std::function<Vector(const SolverState&)>;

  std::string name;
  SteppedAlgorithm run_a, run_b;
  SolverConfig cfg_a, cfg_b;
  SolverState init_a, init_b;
  int lookahead_a = 0;
  std::vector<Quantity> quantities;
  ForwardFn forward;
  std::vector<Quantity> backward_quantities;
  ForwardFn backward;
  std::map<std::string, ExtractFn> extract_b;  // overrides for derived quantities
  std::map<std::string, ExtractFn> extract_a;
};

struct EquivalenceReport {
  std::string pair;
  int iterations = 0;
  double tolerance = 0.0;
  double max_deviation = 0.0;
  std::map<std::string, double> per_quantity;
  bool pass = false;
};

namespace detail {

inline IterateMap::StateSeq roll(const SteppedAlgorithm& alg, const SolverState& init,
                                 const SolverConfig& cfg, int steps) {
  IterateMap::StateSeq seq;
  seq.reserve(steps + 1);
  seq.push_back(init);
  for (int k = 0; k < steps; ++k) seq.push_back(alg.step(seq.back(), cfg));
  return seq;
}

inline Vector lookup(const SolverState& st, const std::string& key,
                     const std::map<std::string, IterateMap::ExtractFn>& extract) {
  auto it = extract.find(key);
  if (it != extract.end()) return it->second(st);
  return st.at(key);
}

}  // namespace detail

// Runs both algorithms in lockstep for `iters` iterations and records the
// worst absolute deviation of every mapped quantity.
inline EquivalenceReport run_lockstep(const IterateMap& map, int iters, double tol) {
  require(iters >= 0, "run_lockstep: iteration count must be nonnegative");
  const auto states_a = detail::roll(map.run_a, map.init_a, map.cfg_a, iters + map.lookahead_a);
  const auto states_b = detail::roll(map.run_b, map.init_b, map.cfg_b, iters);

  EquivalenceReport report;
  report.pair = map.name;
  report.iterations = iters;
  report.tolerance = tol;
  for (const auto& q : map.quantities) report.per_quantity[q.key] = 0.0;
  for (const auto& q : map.backward_quantities) report.per_quantity["inv:" + q.key] = 0.0;

  for (int k = 0; k <= iters; ++k) {
    std::map<std::string, Vector> pred;
    if (map.forward) pred = map.forward(states_a, k);
    for (const auto& q : map.quantities) {
      if (k < q.from_k) continue;
      const Vector actual = detail::lookup(states_b[k], q.key, map.extract_b);
      const double dev = (pred.at(q.key) - actual).cwiseAbs().maxCoeff();
      report.per_quantity[q.key] = std::max(report.per_quantity[q.key], dev);
    }
    if (map.backward) {
      std::map<std::string, Vector> bpred = map.backward(states_b, k);
      for (const auto& q : map.backward_quantities) {
        if (k < q.from_k) continue;
        const Vector actual = detail::lookup(states_a[k], q.key, map.extract_a);
        const double dev = (bpred.at(q.key) - actual).cwiseAbs().maxCoeff();
        report.per_quantity["inv:" + q.key] =
            std::max(report.per_quantity["inv:" + q.key], dev);
      }
    }
  }
  for (const auto& [key, dev] : report.per_quantity)
    report.max_deviation = std::max(report.max_deviation, dev);
  report.pass = report.max_deviation <= tol;
  return report;
}

// Additive perturbation of one entry of run B's initial state; the negative
// control that shows the maps genuinely discriminate.
inline void perturb_init_b(IterateMap& map, double eps, const std::string& which = "") {
  require(!map.init_b.vars().empty(), "perturb_init_b: empty init");
  const std::string key = which.empty() ? map.init_b.vars().begin()->first : which;
  Vector v = map.init_b.at(key);
  v[0] += eps;
  map.init_b.set(key, v);
}

// ---------------------------------------------------------------------------
// Map factories, one per correspondence.
// ---------------------------------------------------------------------------

// s = Ax, t = By - b, z = z between the direct and the master iteration,
// given Ax^0 = s^0 and z^0 = z^0.  The scalar f-value of the recovered
// witness rides along as an extra mapped quantity.
inline IterateMap map_alg1_alg2(std::shared_ptr<const MasterProblem> mp, const SolverConfig& cfg,
                                const Vector& x0, const Vector& z0) {
  IterateMap map;
  map.name = "alg1-alg2";
  map.run_a = make_alg1(mp);
  map.run_b = make_alg2(mp);
  map.cfg_a = map.cfg_b = cfg;
  map.init_a = make_alg1_state(*mp, x0, z0);
  map.init_b = make_alg2_state(map.init_a.at("Ax"), z0);
  const Vector b = mp->problem().b;
  map.quantities = {{"s", 0}, {"t", 1}, {"z", 0}};
  const bool with_value = mp->problem().f.has_value();
  if (with_value) map.quantities.push_back({"fval", 1});
  map.forward = [mp, b, with_value](const IterateMap::StateSeq& a,
                                    int k) -> std::map<std::string, Vector> {
    std::map<std::string, Vector> out;
    out["s"] = a[k].at("Ax");
    out["z"] = a[k].at("z");
    if (k >= 1) {
      out["t"] = a[k].at("By") - b;
      if (with_value)
        out["fval"] = Vector::Constant(1, mp->problem().f.value(a[k].at("x")));
    }
    return out;
  };
  if (with_value) {
    map.extract_b["fval"] = [mp](const SolverState& st) {
      return Vector::Constant(1, mp->problem().f.value(mp->recover_x(st.at("s"))));
    };
  }
  return map;
}

// u = z2, z = s2 between the master and the dual iteration; the dual's v is
// reconstructed as (s2^{k-1} + t2^k + lambda z2^{k-1}) / lambda.
inline IterateMap map_alg2_alg3(std::shared_ptr<const MasterProblem> mp, const SolverConfig& cfg,
                                const Vector& s0, const Vector& z0) {
  IterateMap map;
  map.name = "alg2-alg3";
  map.run_a = make_alg2(mp);
  auto dp = std::make_shared<DualProblem>(build_dual(*mp));
  map.run_b = make_alg3(dp);
  map.cfg_a = map.cfg_b = cfg;
  map.init_a = make_alg2_state(s0, z0);
  map.init_b = make_alg3_state(z0, s0);
  const double lam = cfg.lambda;
  map.quantities = {{"u", 0}, {"z", 0}, {"v", 1}};
  map.forward = [lam](const IterateMap::StateSeq& a, int k) -> std::map<std::string, Vector> {
    std::map<std::string, Vector> out;
    out["u"] = a[k].at("z");
    out["z"] = a[k].at("s");
    if (k >= 1)
      out["v"] = (a[k - 1].at("s") + a[k].at("t") + lam * a[k - 1].at("z")) / lam;
    return out;
  };
  return map;
}

// Ax = lambda (u - u_prev) + b - By and z = u between the direct iteration
// and the saddle-point iteration.
inline IterateMap map_alg1_alg4(std::shared_ptr<const MasterProblem> mp, const SolverConfig& cfg,
                                const Vector& x0, const Vector& z0) {
  IterateMap map;
  map.name = "alg1-alg4";
  map.run_a = make_alg4(mp);
  map.run_b = make_alg1(mp);
  map.cfg_a = map.cfg_b = cfg;
  map.init_b = make_alg1_state(*mp, x0, z0);
  const Vector b = mp->problem().b;
  const double lam = cfg.lambda;
  // Any y0 works; u_prev is then pinned by the required identity
  // Ax^0 = lambda (u^0 - u^-1) + b - By^0.
  const Vector y0 = Vector::Zero(mp->problem().g.dim());
  const Vector by0 = mp->problem().B.apply(y0);
  const Vector u_prev = z0 - (map.init_b.at("Ax") - b + by0) / lam;
  map.init_a = make_alg4_state(*mp, y0, z0, u_prev);
  map.quantities = {{"z", 0}, {"Ax", 0}, {"By", 1}};
  map.forward = [b, lam](const IterateMap::StateSeq& a, int k) -> std::map<std::string, Vector> {
    std::map<std::string, Vector> out;
    out["z"] = a[k].at("u");
    out["Ax"] = lam * (a[k].at("u") - a[k].at("u_prev")) + b - a[k].at("By");
    if (k >= 1) out["By"] = a[k].at("By");
    return out;
  };
  return map;
}

namespace detail {

inline void require_affine_master_g(const MasterProblem& mp, std::uint64_t probe_seed) {
  if (!mp.G_side().prox_is_affine())
    throw NotAffineProx("map_alg5_alg1: prox of the master G is not affine");
  Rng rng(probe_seed);
  ProxFunction gfn = mp.G();
  if (midpoint_affinity_deviation(gfn, rng) > 1e-8)
    throw NotAffineProx("map_alg5_alg1: master G failed the midpoint affinity probe");
}

}  // namespace detail

// Update-order equivalence.  Non-offset form: requires -z5^0 to be a
// subgradient of G at By5^0 - b (checked through the prox fixed-point
// identity); then x1^k = x5^{k+1} on operator images and
// z1^k = z5^k + (A x5^{k+1} + B y5^k - b)/lambda.
inline IterateMap map_alg5_alg1(std::shared_ptr<const MasterProblem> mp, const SolverConfig& cfg,
                                const Vector& y5_0, const Vector& z5_0, bool offset,
                                std::uint64_t probe_seed = 0x5EEDu) {
  detail::require_affine_master_g(*mp, probe_seed);
  const Vector b = mp->problem().b;
  const double lam = cfg.lambda;

  IterateMap map;
  map.name = offset ? "alg5-alg1-offset" : "alg5-alg1";
  map.run_a = make_alg5(mp);
  map.run_b = make_alg1(mp);
  map.cfg_a = map.cfg_b = cfg;
  map.init_a = make_alg5_state(*mp, y5_0, z5_0);

  if (!offset) {
    // -z5^0 in dG(By5^0 - b)  <=>  t0 = prox_G(t0 - z5^0) at unit step.
    const Vector t0 = map.init_a.at("By") - b;
    const Vector probe = mp->G_side().prox(t0 - z5_0, 1.0).image;
    if ((probe - t0).cwiseAbs().maxCoeff() > 1e-10)
      throw InitUnsatisfiable(
          "map_alg5_alg1: init violates -z5^0 in dG(By5^0 - b); use the offset form");
  }

  const int shift = offset ? 2 : 1;
  const auto primed = detail::roll(map.run_a, map.init_a, cfg, shift);
  const SolverState& lead = primed[shift];
  const SolverState& trail = primed[shift - 1];
  const Vector by_trail = trail.has("By") ? trail.at("By") : map.init_a.at("By");
  const Vector z_trail = trail.has("z") ? trail.at("z") : map.init_a.at("z");
  const Vector z1_0 = z_trail + (lead.at("Ax") + by_trail - b) / lam;
  map.init_b = make_alg1_state(*mp, lead.at("x"), z1_0);

  map.lookahead_a = shift;
  map.quantities = {{"Ax", 0}, {"z", 0}};
  map.forward = [b, lam, shift](const IterateMap::StateSeq& a,
                                int k) -> std::map<std::string, Vector> {
    std::map<std::string, Vector> out;
    const SolverState& lead = a[k + shift];
    const SolverState& trail = a[k + shift - 1];
    out["Ax"] = lead.at("Ax");
    out["z"] = trail.at("z") + (lead.at("Ax") + trail.at("By") - b) / lam;
    return out;
  };
  return map;
}

// Seeded variant: draws a subgradient-consistent (y5^0, z5^0) pair from a
// unit prox step, so the non-offset precondition holds by construction.
inline IterateMap map_alg5_alg1_seeded(std::shared_ptr<const MasterProblem> mp,
                                       const SolverConfig& cfg, std::uint64_t seed, bool offset) {
  detail::require_affine_master_g(*mp, seed ^ 0x5EEDu);
  Rng rng(seed);
  const Vector probe = rng.normal_vector(mp->image_dim());
  auto res = mp->G_side().prox(probe, 1.0);
  const Vector z5_0 = res.image - probe;  // -z5^0 = probe - t0 in dG(t0)
  if (offset) {
    // The offset form has no precondition; start from a deliberately
    // inconsistent multiplier to exercise it.
    return map_alg5_alg1(mp, cfg, res.witness, z5_0 + rng.normal_vector(z5_0.size()), true, seed);
  }
  return map_alg5_alg1(mp, cfg, res.witness, z5_0, false, seed);
}

// Basis pursuit correspondence: u3 = z1 and z3 = A* x1, with the inverse
// x1 = (AA*)^-1 A z3, z1 = u3.
inline IterateMap map_bp(std::shared_ptr<const BasisPursuitInstance> inst, const SolverConfig& cfg,
                         const Vector& x0, const Vector& z0) {
  IterateMap map;
  map.name = "bp";
  map.run_a = bp_dual_stepper(inst);
  map.run_b = bp_primal_stepper(inst);
  map.cfg_a = map.cfg_b = cfg;
  map.init_a = make_bp_dual_state(*inst, x0, z0);
  SolverState pinit("bp-primal", {});
  pinit.set("u", z0);
  pinit.set("z", map.init_a.at("s"));
  map.init_b = pinit;
  map.quantities = {{"u", 0}, {"z", 0}};
  map.forward = [](const IterateMap::StateSeq& a, int k) -> std::map<std::string, Vector> {
    return {{"u", a[k].at("z")}, {"z", a[k].at("s")}};
  };
  map.backward_quantities = {{"x", 0}, {"z", 0}};
  map.backward = [inst](const IterateMap::StateSeq& b, int k) -> std::map<std::string, Vector> {
    return {{"x", inst->x_from_z3(b[k].at("z"))}, {"z", b[k].at("u")}};
  };
  return map;
}

// Basis pursuit denoising correspondence: u3 = z1, z3 = A* x1, and backwards
// x1 = -(A u3 - b)/alpha, z1 = u3.
inline IterateMap map_bpdn(std::shared_ptr<const BpdnInstance> inst, const SolverConfig& cfg,
                           const Vector& x0, const Vector& z0) {
  IterateMap map;
  map.name = "bpdn";
  map.run_a = bpdn_dual_stepper(inst);
  map.run_b = bpdn_primal_stepper(inst);
  map.cfg_a = map.cfg_b = cfg;
  map.init_a = make_bpdn_dual_state(*inst, x0, z0);
  SolverState pinit("bpdn-primal", {});
  pinit.set("u", z0);
  pinit.set("z", map.init_a.at("s"));
  map.init_b = pinit;
  map.quantities = {{"u", 0}, {"z", 0}};
  map.forward = [](const IterateMap::StateSeq& a, int k) -> std::map<std::string, Vector> {
    return {{"u", a[k].at("z")}, {"z", a[k].at("s")}};
  };
  // The x recovery is a statement about iterates, not the (arbitrary) init.
  map.backward_quantities = {{"x", 1}, {"z", 0}};
  map.backward = [inst](const IterateMap::StateSeq& b, int k) -> std::map<std::string, Vector> {
    return {{"x", -(inst->Aop.apply(b[k].at("u")) - inst->b) / inst->alpha},
            {"z", b[k].at("u")}};
  };
  return map;
}

// Three-block correspondence: zy = t, zs = u, s = -zu, y = zt.
inline IterateMap map_three_block(std::shared_ptr<const ThreeBlockProblem> tb,
                                  const SolverConfig& cfg, const Vector& s0, const Vector& y0,
                                  const Vector& zs0, const Vector& zy0) {
  require(std::abs(tb->mu() - 1.0) <= 0.0,
          "map_three_block: the dual correspondence is stated for mu = 1");
  IterateMap map;
  map.name = "three-block";
  map.run_a = make_three_block_primal(tb);
  map.run_b = make_three_block_dual(tb);
  map.cfg_a = map.cfg_b = cfg;
  map.init_a = make_three_block_primal_state(s0, y0, zs0, zy0);
  map.init_b = make_three_block_dual_state(zs0, zy0, -s0, y0);
  map.quantities = {{"t", 0}, {"u", 0}, {"zu", 0}, {"zt", 0}};
  map.forward = [](const IterateMap::StateSeq& a, int k) -> std::map<std::string, Vector> {
    return {{"t", a[k].at("zy")},
            {"u", a[k].at("zs")},
            {"zu", -a[k].at("s")},
            {"zt", a[k].at("y")}};
  };
  return map;
}

// RPRS primal-dual correspondence: w2 = w1/lambda (the dual run uses
// parameter 1/lambda) and x^{k+1} + lambda v^{k+1} = w1^k, checked as
// v^k = (w1^{k-1} - x1^k)/lambda.
inline IterateMap map_rprs(std::shared_ptr<const RprsInstance> inst, const SolverConfig& cfg,
                           const Vector& w0) {
  IterateMap map;
  map.name = "rprs";
  map.run_a = inst->primal_algorithm();
  map.run_b = inst->dual_algorithm();
  map.cfg_a = cfg;
  map.cfg_b = RprsInstance::dual_config(cfg);
  map.init_a = make_rprs_state(w0);
  map.init_b = make_rprs_state(w0 / cfg.lambda);
  map.init_b.set_k(0);
  const double lam = cfg.lambda;
  map.quantities = {{"w", 0}, {"x", 1}};
  map.forward = [lam](const IterateMap::StateSeq& a, int k) -> std::map<std::string, Vector> {
    std::map<std::string, Vector> out;
    out["w"] = a[k].at("w") / lam;
    if (k >= 1) out["x"] = (a[k - 1].at("w") - a[k].at("x")) / lam;
    return out;
  };
  return map;
}

// Solution transfer between  min f(x) + g(Ax)  and its image problem
// min (A . f)(y) + g(y):  y* = A x* must attain the image problem's optimal
// value.  The caller supplies the image objective and a reference optimum
// from an independent run; the record reports the gap.
struct SolutionMapRecord {
  double mapped_objective = 0.0;
  double reference_objective = 0.0;
  double gap = 0.0;
  bool pass = false;
};

inline SolutionMapRecord check_solution_maps(
    const Vector& x_star, const LinearOperator& a,
    const std::function<double(const Vector&)>& image_objective, double reference_optimum,
    double tol = 1e-6) {
  SolutionMapRecord rec;
  rec.mapped_objective = image_objective(a.apply(x_star));
  rec.reference_objective = reference_optimum;
  rec.gap = std::abs(rec.mapped_objective - rec.reference_objective);
  rec.pass = rec.gap <= tol;
  return rec;
}

// ---------------------------------------------------------------------------
// Total variation: the four-way correspondence and the solve-path cross-check.
// ---------------------------------------------------------------------------

// Joint initialization shared by the four TV iterations; built from a seeded
// multiplier z5^0 with x5^0 = b + div(z5^0)/alpha so the non-offset
// update-order relation holds.
struct TvJointInit {
  SolverState primal;   // (y1^0, z1^0)
  SolverState dual;     // (v3^0, z3^0)
  SolverState pd;       // (x4^0, v4^0, v4^-1)
  SolverState swapped;  // (x5^0, z5^0)
};

inline TvJointInit make_tv_joint_init(const TvInstance& inst, const SolverConfig& cfg,
                                      std::uint64_t seed) {
  Rng rng(seed);
  const double lam = cfg.lambda;
  const Vector z5 = 0.1 * rng.normal_vector(2 * inst.pixels());
  const Vector x5 = inst.image + inst.div.apply(z5) / inst.alpha;
  const Vector gx5 = inst.grad.apply(x5);
  const Vector y5_1 = prox_group_l21(gx5 + lam * z5, lam);
  const Vector y1 = y5_1;
  const Vector z1 = z5 + (gx5 - y5_1) / lam;

  TvJointInit init;
  init.primal = make_tv_primal_state(y1, z1);
  init.dual = make_tv_dual_state(z1, -y1);
  init.pd = make_tv_primal_dual_state(inst, x5, z1, z1 - (gx5 - y1) / lam);
  init.swapped = make_tv_swapped_state(inst, x5, z5);
  return init;
}

inline IterateMap map_tv_dual(std::shared_ptr<const TvInstance> inst, const SolverConfig& cfg,
                              const TvJointInit& init, TvSolvePath path = TvSolvePath::Direct) {
  IterateMap map;
  map.name = "tv-dual";
  map.run_a = tv_dual_stepper(inst, path);
  map.run_b = tv_primal_stepper(inst, path);
  map.cfg_a = map.cfg_b = cfg;
  map.init_a = init.dual;
  map.init_b = init.primal;
  map.quantities = {{"y", 0}, {"z", 0}};
  map.forward = [](const IterateMap::StateSeq& a, int k) -> std::map<std::string, Vector> {
    return {{"y", -a[k].at("z")}, {"z", a[k].at("v")}};
  };
  return map;
}

inline IterateMap map_tv_primal_dual(std::shared_ptr<const TvInstance> inst,
                                     const SolverConfig& cfg, const TvJointInit& init,
                                     TvSolvePath path = TvSolvePath::Direct) {
  IterateMap map;
  map.name = "tv-pd";
  map.run_a = tv_primal_dual_stepper(inst, path);
  map.run_b = tv_primal_stepper(inst, path);
  map.cfg_a = map.cfg_b = cfg;
  map.init_a = init.pd;
  map.init_b = init.primal;
  const double lam = cfg.lambda;
  map.quantities = {{"y", 0}, {"z", 0}};
  map.forward = [lam](const IterateMap::StateSeq& a, int k) -> std::map<std::string, Vector> {
    return {{"y", a[k].at("Gx") - lam * (a[k].at("v") - a[k].at("v_prev"))},
            {"z", a[k].at("v")}};
  };
  return map;
}

inline IterateMap map_tv_swapped(std::shared_ptr<const TvInstance> inst, const SolverConfig& cfg,
                                 const TvJointInit& init, TvSolvePath path = TvSolvePath::Direct) {
  IterateMap map;
  map.name = "tv-swap";
  map.run_a = tv_swapped_stepper(inst, path);
  map.run_b = tv_primal_stepper(inst, path);
  map.cfg_a = map.cfg_b = cfg;
  map.init_a = init.swapped;
  map.init_b = init.primal;
  map.lookahead_a = 1;
  const double lam = cfg.lambda;
  map.quantities = {{"y", 0}, {"z", 0}};
  map.forward = [lam](const IterateMap::StateSeq& a, int k) -> std::map<std::string, Vector> {
    return {{"y", a[k + 1].at("y")},
            {"z", a[k].at("z") + (a[k].at("Gx") - a[k + 1].at("y")) / lam}};
  };
  return map;
}

// Same algorithm, Fourier path against direct factorization.
inline IterateMap map_tv_fft_direct(std::shared_ptr<const TvInstance> inst,
                                    const SolverConfig& cfg, const TvJointInit& init) {
  IterateMap map;
  map.name = "tv-fft-direct";
  map.run_a = tv_primal_stepper(inst, TvSolvePath::Fft);
  map.run_b = tv_primal_stepper(inst, TvSolvePath::Direct);
  map.cfg_a = map.cfg_b = cfg;
  map.init_a = init.primal;
  map.init_b = init.primal;
  map.quantities = {{"x", 1}, {"y", 1}, {"z", 0}};
  map.forward = [](const IterateMap::StateSeq& a, int k) -> std::map<std::string, Vector> {
    std::map<std::string, Vector> out;
    out["z"] = a[k].at("z");
    if (k >= 1) {
      out["x"] = a[k].at("x");
      out["y"] = a[k].at("y");
    }
    return out;
  };
  return map;
}

}  // namespace admeq

#endif  // ADMEQ_EQUIVALENCE_HPP_
