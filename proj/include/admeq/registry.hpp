#ifndef ADMEQ_REGISTRY_HPP_
#define ADMEQ_REGISTRY_HPP_

#include "admeq/equivalence.hpp"
#include "admeq/io.hpp"

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

namespace admeq {

// Everything needed to rebuild a shipped problem instance deterministically.
struct InstanceSpec {
  std::string family = "bpdn";  // bp | bpdn | tv | three-block | rprs-lasso
  Index m = 10;
  Index n = 30;
  Index rows = 8;
  Index cols = 8;
  std::uint64_t seed = 7;
  double alpha = 1.0;      // data-fit weight for bpdn / tv
  bool orthonormal = false;
  std::string image_path;  // optional PGM/CSV image for tv
};

inline TvInstance tv_from_spec(const InstanceSpec& spec) {
  if (!spec.image_path.empty()) {
    GridImage img = read_image(spec.image_path);
    return make_tv(img.pixels, img.rows, img.cols, spec.alpha);
  }
  return make_tv_synthetic(spec.rows, spec.cols, spec.alpha, spec.seed);
}

inline std::shared_ptr<MasterProblem> master_from_spec(const InstanceSpec& spec,
                                                       bool order_swap_form = false) {
  if (spec.family == "bp") {
    auto inst = make_bp(spec.m, spec.n, spec.seed);
    return std::make_shared<MasterProblem>(build_master(inst.dual_split_problem()));
  }
  if (spec.family == "bpdn") {
    auto inst = make_bpdn(spec.m, spec.n, spec.seed, spec.alpha, spec.orthonormal);
    return std::make_shared<MasterProblem>(build_master(
        order_swap_form ? inst.primal_split_problem() : inst.dual_split_problem()));
  }
  if (spec.family == "tv") {
    auto inst = tv_from_spec(spec);
    return std::make_shared<MasterProblem>(build_master(inst.adm_problem()));
  }
  throw InvalidArgument("no two-block ADM form registered for instance family '" + spec.family +
                        "'");
}

// Registered equivalence pairs with their canonical instances and tolerances.
struct PairSpec {
  std::string name;
  std::string description;
  InstanceSpec canonical;
  double default_tol;
  std::vector<std::string> families;
};

inline const std::vector<PairSpec>& pair_registry() {
  static const std::vector<PairSpec> pairs = {
      {"alg1-alg2", "direct ADM vs master-form ADM", {"bpdn", 10, 30, 8, 8, 7, 1.0}, 1e-8,
       {"bp", "bpdn", "tv"}},
      {"alg2-alg3", "master-form ADM vs dual ADM", {"bpdn", 10, 30, 8, 8, 7, 1.0}, 1e-8,
       {"bp", "bpdn", "tv"}},
      {"alg1-alg4", "ADM vs saddle-point primal-dual iteration",
       {"bpdn", 10, 30, 8, 8, 7, 1.0}, 1e-8, {"bp", "bpdn", "tv"}},
      {"alg5-alg1", "order-swapped ADM vs ADM (quadratic block, strict init)",
       {"bpdn", 10, 30, 8, 8, 7, 1.0}, 1e-8, {"bp", "bpdn", "tv"}},
      {"alg5-alg1-offset", "order-swapped ADM vs ADM (one-iteration offset form)",
       {"bpdn", 10, 30, 8, 8, 7, 1.0}, 1e-8, {"bp", "bpdn", "tv"}},
      {"bp", "basis pursuit: dual-split ADM vs primal-split ADM",
       {"bp", 5, 15, 8, 8, 3, 1.0}, 1e-8, {"bp"}},
      {"bpdn", "basis pursuit denoising: dual-split ADM vs primal-split ADM",
       {"bpdn", 10, 30, 8, 8, 7, 1.0}, 1e-8, {"bpdn"}},
      {"three-block", "three-subproblem ADM: primal vs dual",
       {"three-block", 6, 10, 8, 8, 11, 1.0}, 1e-8, {"three-block"}},
      {"rprs", "relaxed Peaceman-Rachford: primal vs dual",
       {"rprs-lasso", 8, 6, 8, 8, 9, 1.0}, 1e-10, {"rprs-lasso"}},
      {"tv-dual", "TV denoising: dual ADM vs primal ADM", {"tv", 10, 30, 8, 8, 21, 1.0}, 1e-8,
       {"tv"}},
      {"tv-pd", "TV denoising: primal-dual iteration vs primal ADM",
       {"tv", 10, 30, 8, 8, 21, 1.0}, 1e-8, {"tv"}},
      {"tv-swap", "TV denoising: order-swapped ADM vs primal ADM",
       {"tv", 10, 30, 8, 8, 21, 1.0}, 1e-8, {"tv"}},
      {"tv-four", "TV denoising: all four iterations jointly",
       {"tv", 10, 30, 8, 8, 21, 1.0}, 1e-8, {"tv"}},
      {"tv-fft-direct", "TV denoising: Fourier path vs direct factorization",
       {"tv", 10, 30, 8, 8, 21, 1.0}, 1e-9, {"tv"}},
  };
  return pairs;
}

inline const PairSpec& find_pair(const std::string& name) {
  for (const auto& p : pair_registry())
    if (p.name == name) return p;
  throw InvalidArgument("unknown equivalence pair '" + name + "'");
}

// Builds the iterate maps of a registered pair on a concrete instance.
// Initial iterates are drawn from the instance seed offset by +1000, so runs
// are reproducible from the spec alone.
inline std::vector<IterateMap> build_pair_maps(const std::string& name, const InstanceSpec& spec,
                                               const SolverConfig& cfg) {
  const PairSpec& pair = find_pair(name);
  if (std::find(pair.families.begin(), pair.families.end(), spec.family) == pair.families.end())
    throw InvalidArgument("pair '" + name + "' does not run on instance family '" + spec.family +
                          "'");
  Rng rng(spec.seed + 1000);

  if (name == "alg1-alg2" || name == "alg2-alg3" || name == "alg1-alg4") {
    auto mp = master_from_spec(spec);
    const Vector x0 = rng.normal_vector(mp->problem().f.dim());
    const Vector z0 = rng.normal_vector(mp->image_dim());
    if (name == "alg1-alg2") return {map_alg1_alg2(mp, cfg, x0, z0)};
    if (name == "alg1-alg4") return {map_alg1_alg4(mp, cfg, x0, z0)};
    const Vector s0 = mp->problem().A.apply(x0);
    return {map_alg2_alg3(mp, cfg, s0, z0)};
  }
  if (name == "alg5-alg1" || name == "alg5-alg1-offset") {
    auto mp = master_from_spec(spec, /*order_swap_form=*/true);
    return {map_alg5_alg1_seeded(mp, cfg, spec.seed + 1000, name == "alg5-alg1-offset")};
  }
  if (name == "bp") {
    auto inst = std::make_shared<BasisPursuitInstance>(make_bp(spec.m, spec.n, spec.seed));
    const Vector x0 = rng.normal_vector(inst->m());
    const Vector z0 = rng.normal_vector(inst->n());
    return {map_bp(inst, cfg, x0, z0)};
  }
  if (name == "bpdn") {
    auto inst = std::make_shared<BpdnInstance>(
        make_bpdn(spec.m, spec.n, spec.seed, spec.alpha, spec.orthonormal));
    const Vector x0 = rng.normal_vector(inst->m());
    const Vector z0 = rng.normal_vector(inst->n());
    return {map_bpdn(inst, cfg, x0, z0)};
  }
  if (name == "three-block") {
    auto tb = std::make_shared<ThreeBlockProblem>(
        make_three_block_l1_quadratic(spec.m, spec.n, spec.seed));
    const Vector s0 = rng.normal_vector(spec.n);
    const Vector y0 = rng.normal_vector(spec.m);
    const Vector zs0 = rng.normal_vector(spec.n);
    const Vector zy0 = rng.normal_vector(spec.m);
    return {map_three_block(tb, cfg, s0, y0, zs0, zy0)};
  }
  if (name == "rprs") {
    auto inst = std::make_shared<RprsInstance>(make_rprs_lasso(spec.m, spec.n, spec.seed));
    return {map_rprs(inst, cfg, rng.normal_vector(inst->f.dim()))};
  }
  // TV pairs share one joint initialization.
  auto inst = std::make_shared<TvInstance>(tv_from_spec(spec));
  const TvJointInit init = make_tv_joint_init(*inst, cfg, spec.seed + 1000);
  if (name == "tv-dual") return {map_tv_dual(inst, cfg, init)};
  if (name == "tv-pd") return {map_tv_primal_dual(inst, cfg, init)};
  if (name == "tv-swap") return {map_tv_swapped(inst, cfg, init)};
  if (name == "tv-fft-direct") return {map_tv_fft_direct(inst, cfg, init)};
  if (name == "tv-four")
    return {map_tv_dual(inst, cfg, init), map_tv_primal_dual(inst, cfg, init),
            map_tv_swapped(inst, cfg, init)};
  throw InvalidArgument("unknown equivalence pair '" + name + "'");
}

// ---------------------------------------------------------------------------
// Solve-command plumbing: algorithm construction per instance family.
// ---------------------------------------------------------------------------

struct SolveSetup {
  SteppedAlgorithm algorithm;
  SolverState init;
};

// Alternates the two update orders between iterations.  Shipped as a demo
// only; nothing is asserted about its behavior.
inline SteppedAlgorithm make_order_mixing(std::shared_ptr<const MasterProblem> mp) {
  SteppedAlgorithm base = make_alg1(mp);
  return {"alg1-mixed",
          [mp](const SolverState& st, const SolverConfig& cfg) {
            if (st.k() % 2 == 1 && st.has("By")) return adm5_swapped_step(*mp, st, cfg);
            SolverState next = adm1_step(*mp, st, cfg);
            return next;
          },
          base.objective, base.residual};
}

inline SolveSetup build_solve(const InstanceSpec& spec, const std::string& algo,
                              bool mix_orders = false) {
  const auto zero_state = [](const MasterProblem& mp, const std::string& which) -> SolverState {
    const Index nf = mp.problem().f.dim();
    const Index ng = mp.problem().g.dim();
    const Index m = mp.image_dim();
    if (which == "alg1") return make_alg1_state(mp, Vector::Zero(nf), Vector::Zero(m));
    if (which == "alg2") return make_alg2_state(Vector::Zero(m), Vector::Zero(m));
    if (which == "alg3") return make_alg3_state(Vector::Zero(m), Vector::Zero(m));
    if (which == "alg4")
      return make_alg4_state(mp, Vector::Zero(ng), Vector::Zero(m), Vector::Zero(m));
    return make_alg5_state(mp, Vector::Zero(ng), Vector::Zero(m));
  };

  if (algo == "rprs") {
    std::shared_ptr<RprsInstance> inst;
    if (spec.family == "rprs-lasso") {
      inst = std::make_shared<RprsInstance>(make_rprs_lasso(spec.m, spec.n, spec.seed));
    } else if (spec.family == "bp") {
      auto bp = make_bp(spec.m, spec.n, spec.seed);
      inst = std::make_shared<RprsInstance>(
          ProxFunction::l1_norm(bp.n()),
          ProxFunction::affine_indicator(LinearOperator::dense(bp.A), bp.b),
          LinearOperator::dense(bp.A));
    } else {
      throw InvalidArgument("rprs runs on families rprs-lasso and bp");
    }
    return {inst->primal_algorithm(), make_rprs_state(Vector::Zero(inst->f.dim()))};
  }
  if (algo == "tb-primal" || algo == "tb-dual") {
    std::shared_ptr<ThreeBlockProblem> tb;
    if (spec.family == "three-block") {
      tb = std::make_shared<ThreeBlockProblem>(
          make_three_block_l1_quadratic(spec.m, spec.n, spec.seed));
    } else if (spec.family == "bp") {
      tb = std::make_shared<ThreeBlockProblem>(
          bp_three_block(make_bp(spec.m, spec.n, spec.seed)));
    } else {
      throw InvalidArgument("three-block algorithms run on families three-block and bp");
    }
    const Index n = tb->u().dim();
    const Index m = tb->v().dim();
    if (algo == "tb-primal")
      return {make_three_block_primal(tb),
              make_three_block_primal_state(Vector::Zero(n), Vector::Zero(m), Vector::Zero(n),
                                            Vector::Zero(m))};
    return {make_three_block_dual(tb),
            make_three_block_dual_state(Vector::Zero(n), Vector::Zero(m), Vector::Zero(n),
                                        Vector::Zero(m))};
  }
  if (algo == "alg1" || algo == "alg2" || algo == "alg3" || algo == "alg4" || algo == "alg5") {
    auto mp = master_from_spec(spec, /*order_swap_form=*/false);
    if (algo == "alg3") {
      auto dp = std::make_shared<DualProblem>(build_dual(*mp));
      return {make_alg3(dp), zero_state(*mp, "alg3")};
    }
    SolveSetup setup;
    setup.init = zero_state(*mp, algo);
    if (algo == "alg1")
      setup.algorithm = mix_orders ? make_order_mixing(mp) : make_alg1(mp);
    else if (algo == "alg2")
      setup.algorithm = make_alg2(mp);
    else if (algo == "alg4")
      setup.algorithm = make_alg4(mp);
    else
      setup.algorithm = make_alg5(mp);
    return setup;
  }
  throw InvalidArgument("unknown algorithm '" + algo + "'");
}

}  // namespace admeq

#endif  // ADMEQ_REGISTRY_HPP_
