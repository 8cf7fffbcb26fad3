#ifndef ADMEQ_SOLVERS_HPP_
#define ADMEQ_SOLVERS_HPP_

#include "admeq/core.hpp"
#include "admeq/formulations.hpp"

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace admeq {

struct SolverConfig {
  double lambda = 1.0;    // penalty parameter
  double alpha = 0.5;     // relaxation for RPRS (1/2 = DRS, 1 = PRS)
  int max_iter = 100;
  double stop_tol = 0.0;  // stop when primal residual <= stop_tol
  bool record_trace = true;

  void validate() const {
    require(lambda > 0.0, "SolverConfig: lambda must be positive");
    require(alpha > 0.0 && alpha <= 1.0, "SolverConfig: alpha must lie in (0, 1]");
    require(max_iter >= 0, "SolverConfig: max_iter must be nonnegative");
    require(stop_tol >= 0.0, "SolverConfig: stop_tol must be nonnegative");
  }
};

// Live iterates of one algorithm, keyed by name ("x", "z", "Ax", ...).
// Operator images are stored alongside the raw blocks so downstream
// consumers never recompute operator products.
class SolverState {
 public:
  SolverState() = default;
  SolverState(std::string algorithm, std::map<std::string, Vector> vars, int k = 0)
      : algorithm_(std::move(algorithm)), vars_(std::move(vars)), k_(k) {}

  const std::string& algorithm() const { return algorithm_; }
  int k() const { return k_; }
  void set_k(int k) { k_ = k; }

  bool has(const std::string& name) const { return vars_.count(name) > 0; }
  const Vector& at(const std::string& name) const {
    auto it = vars_.find(name);
    if (it == vars_.end())
      throw InvalidArgument("SolverState: missing iterate '" + name + "' in " + algorithm_);
    return it->second;
  }
  void set(const std::string& name, Vector v) {
    check_iterate(v, name.c_str());
    vars_[name] = std::move(v);
  }
  const std::map<std::string, Vector>& vars() const { return vars_; }

 private:
  std::string algorithm_;
  std::map<std::string, Vector> vars_;
  int k_ = 0;
};

struct TraceEntry {
  SolverState state;
  double objective;
  double primal_residual;
};

struct Trace {
  std::vector<TraceEntry> entries;
  bool truncated = false;  // set when a run died of numerical blowup

  const TraceEntry& last() const { return entries.back(); }
  int iterations() const { return entries.empty() ? 0 : entries.back().state.k(); }
};

// A step function bundled with its observers; `run` below drives it.
struct SteppedAlgorithm {
  std::string name;
  std::function<SolverState(const SolverState&, const SolverConfig&)> step;
  std::function<double(const SolverState&)> objective;  // optional
  std::function<double(const SolverState&)> residual;   // optional
};

namespace detail {
inline double quiet_nan() { return std::numeric_limits<double>::quiet_NaN(); }

inline double observe(const std::function<double(const SolverState&)>& fn, const SolverState& st) {
  if (!fn) return quiet_nan();
  try {
    return fn(st);
  } catch (const Error&) {
    return quiet_nan();
  }
}
}  // namespace detail

// Applies `alg.step` until k = max_iter or the primal residual drops to
// stop_tol.  On NumericalBlowup the trace is returned truncated instead of
// propagating; every other error propagates.
inline Trace run(const SteppedAlgorithm& alg, SolverState state, const SolverConfig& cfg) {
  cfg.validate();
  Trace trace;
  auto record = [&](const SolverState& st) {
    trace.entries.push_back(
        {st, detail::observe(alg.objective, st), detail::observe(alg.residual, st)});
  };
  record(state);
  for (int k = 1; k <= cfg.max_iter; ++k) {
    try {
      state = alg.step(state, cfg);
    } catch (const NumericalBlowup&) {
      trace.truncated = true;
      break;
    }
    record(state);
    // stop_tol = 0 disables the residual rule: a primal residual can hit
    // exactly zero at points that are not fixed points of the iteration.
    const double res = trace.entries.back().primal_residual;
    if (cfg.stop_tol > 0.0 && res <= cfg.stop_tol) break;
  }
  if (!cfg.record_trace && trace.entries.size() > 1)
    trace.entries.erase(trace.entries.begin(), trace.entries.end() - 1);
  return trace;
}

// ---------------------------------------------------------------------------
// Initial states.
// ---------------------------------------------------------------------------

inline SolverState make_alg1_state(const MasterProblem& mp, const Vector& x0, const Vector& z0) {
  SolverState st("alg1", {});
  st.set("x", x0);
  st.set("z", z0);
  st.set("Ax", mp.problem().A.apply(x0));
  return st;
}

inline SolverState make_alg2_state(const Vector& s0, const Vector& z0) {
  SolverState st("alg2", {});
  st.set("s", s0);
  st.set("z", z0);
  return st;
}

inline SolverState make_alg3_state(const Vector& u0, const Vector& z0) {
  SolverState st("alg3", {});
  st.set("u", u0);
  st.set("z", z0);
  return st;
}

inline SolverState make_alg4_state(const MasterProblem& mp, const Vector& y0, const Vector& u0,
                                   const Vector& u_prev) {
  SolverState st("alg4", {});
  st.set("y", y0);
  st.set("u", u0);
  st.set("u_prev", u_prev);
  st.set("By", mp.problem().B.apply(y0));
  return st;
}

inline SolverState make_alg5_state(const MasterProblem& mp, const Vector& y0, const Vector& z0) {
  SolverState st("alg5", {});
  st.set("y", y0);
  st.set("z", z0);
  st.set("By", mp.problem().B.apply(y0));
  return st;
}

inline SolverState make_rprs_state(const Vector& w0) {
  SolverState st("rprs", {});
  st.set("w", w0);
  return st;
}

inline SolverState make_three_block_primal_state(const Vector& s0, const Vector& y0,
                                                 const Vector& zs0, const Vector& zy0) {
  SolverState st("tb-primal", {});
  st.set("s", s0);
  st.set("y", y0);
  st.set("zs", zs0);
  st.set("zy", zy0);
  return st;
}

inline SolverState make_three_block_dual_state(const Vector& u0, const Vector& t0,
                                               const Vector& zu0, const Vector& zt0) {
  SolverState st("tb-dual", {});
  st.set("u", u0);
  st.set("t", t0);
  st.set("zu", zu0);
  st.set("zt", zt0);
  return st;
}

// ---------------------------------------------------------------------------
// Step functions.  Each is pure: state in, state out.
// ---------------------------------------------------------------------------

// y-update, x-update, multiplier update on  min f(x) + g(y), Ax + By = b.
inline SolverState adm1_step(const MasterProblem& mp, const SolverState& st,
                             const SolverConfig& cfg) {
  const double lam = cfg.lambda;
  const Vector& ax = st.at("Ax");
  const Vector& z = st.at("z");
  auto gres = mp.G_side().prox(-ax - lam * z, lam);
  const Vector by = gres.image + mp.problem().b;
  auto fres = mp.F_side().prox(mp.problem().b - by - lam * z, lam);
  SolverState next("alg1", {}, st.k() + 1);
  next.set("y", std::move(gres.witness));
  next.set("By", by);
  next.set("x", std::move(fres.witness));
  next.set("Ax", fres.image);
  next.set("r", fres.image + by - mp.problem().b);
  next.set("z", z + next.at("r") / lam);
  if (st.has("By")) {
    // combined primal+dual residual, exposed as a trace column through its norm
    const double dres = mp.problem().A.adjoint_apply(by - st.at("By")).norm() / lam;
    next.set("rc", (Vector(2) << next.at("r").norm(), dres).finished());
  }
  return next;
}

// Same iteration written on the master problem: s + t = 0 in the image space.
// Witnesses of the joint solves ride along for objective reporting.
inline SolverState adm2_master_step(const MasterProblem& mp, const SolverState& st,
                                    const SolverConfig& cfg) {
  const double lam = cfg.lambda;
  const Vector& s = st.at("s");
  const Vector& z = st.at("z");
  auto gres = mp.G_side().prox(-s - lam * z, lam);
  auto fres = mp.F_side().prox(-gres.image - lam * z, lam);
  SolverState next("alg2", {}, st.k() + 1);
  next.set("t", std::move(gres.image));
  next.set("yw", std::move(gres.witness));
  next.set("s", std::move(fres.image));
  next.set("xw", std::move(fres.witness));
  next.set("r", next.at("s") + next.at("t"));
  next.set("z", z + next.at("r") / lam);
  if (st.has("t")) {
    const double dres = (next.at("t") - st.at("t")).norm() / lam;
    next.set("rc", (Vector(2) << next.at("r").norm(), dres).finished());
  }
  return next;
}

// ADM on the dual pair: note the reciprocal placement of lambda.
inline SolverState adm3_dual_step(const DualProblem& dp, const SolverState& st,
                                  const SolverConfig& cfg) {
  const double lam = cfg.lambda;
  const Vector& u = st.at("u");
  const Vector& z = st.at("z");
  const Vector v = dp.Gstar_neg().prox(u + z / lam, 1.0 / lam);
  const Vector un = dp.Fstar_neg().prox(v - z / lam, 1.0 / lam);
  SolverState next("alg3", {}, st.k() + 1);
  next.set("v", v);
  next.set("u", un);
  next.set("z", z + lam * (un - v));
  if (st.has("v")) {
    const double dres = lam * (v - st.at("v")).norm();
    next.set("rc", (Vector(2) << (un - v).norm(), dres).finished());
  }
  return next;
}

// Primal-dual iteration on the saddle-point form: extrapolate the dual
// variable, y-update in the metric ||By - By^k + lambda ubar||, then a
// proximal dual ascent step.
inline SolverState adm4_primal_dual_step(const MasterProblem& mp, const SolverState& st,
                                         const SolverConfig& cfg) {
  const double lam = cfg.lambda;
  const Vector& u = st.at("u");
  const Vector& u_prev = st.at("u_prev");
  const Vector& by = st.at("By");
  const Vector ubar = 2.0 * u - u_prev;
  auto gres = mp.G_side().prox(by - mp.problem().b - lam * ubar, lam);
  const Vector by_next = gres.image + mp.problem().b;
  // u-update: argmin F*(-u) - <u, By - b> + lambda/2 ||u - u^k||^2, realized
  // from prox_{lambda F} through the generalized Moreau decomposition.
  const Vector r = u + (by_next - mp.problem().b) / lam;
  const Vector u_next = r + mp.F_side().prox(-lam * r, lam).image / lam;
  SolverState next("alg4", {}, st.k() + 1);
  next.set("y", std::move(gres.witness));
  next.set("By", by_next);
  next.set("u", u_next);
  next.set("u_prev", u);
  return next;
}

// Order-swapped ADM: x before y, multiplier update unchanged in form.
inline SolverState adm5_swapped_step(const MasterProblem& mp, const SolverState& st,
                                     const SolverConfig& cfg) {
  const double lam = cfg.lambda;
  const Vector& by = st.at("By");
  const Vector& z = st.at("z");
  auto fres = mp.F_side().prox(mp.problem().b - by - lam * z, lam);
  auto gres = mp.G_side().prox(-fres.image - lam * z, lam);
  const Vector by_next = gres.image + mp.problem().b;
  SolverState next("alg5", {}, st.k() + 1);
  next.set("x", std::move(fres.witness));
  next.set("Ax", fres.image);
  next.set("y", std::move(gres.witness));
  next.set("By", by_next);
  next.set("r", fres.image + by_next - mp.problem().b);
  next.set("z", z + next.at("r") / lam);
  if (st.has("Ax")) {
    const double dres = mp.problem().B.adjoint_apply(next.at("Ax") - st.at("Ax")).norm() / lam;
    next.set("rc", (Vector(2) << next.at("r").norm(), dres).finished());
  }
  return next;
}

// Relaxed Peaceman-Rachford on min f(x) + g(Ax), driven by the prox oracles
// of f and of the composition g(A.):
//   x^{k+1} = prox_{lambda f}(w^k)
//   w^{k+1} = (1 - alpha) w^k + alpha (2 prox_{lambda gA} - I)(2 x^{k+1} - w^k)
// alpha = 1/2 is Douglas-Rachford, alpha = 1 is Peaceman-Rachford.
inline SolverState rprs_step(const ProxFunction& f, const ProxFunction& gA, const SolverState& st,
                             const SolverConfig& cfg) {
  const double lam = cfg.lambda;
  const double alpha = cfg.alpha;
  const Vector& w = st.at("w");
  const Vector x = f.prox(w, lam);
  const Vector reflected = 2.0 * x - w;
  const Vector w_next = (1.0 - alpha) * w + alpha * (2.0 * gA.prox(reflected, lam) - reflected);
  SolverState next(st.algorithm().empty() ? "rprs" : st.algorithm(), {}, st.k() + 1);
  next.set("x", x);
  next.set("w", w_next);
  next.set("w_prev", w);
  return next;
}

// Three-block ADM, x versus the decoupled pair (s, y):
//   x:  (mu^2 I + C*C) x = mu (mu s^k - lambda zs^k) + C*(y^k - lambda zy^k)
//   s:  prox of u at x^{k+1} + lambda zs^k / mu
//   y:  prox of v at C x^{k+1} + lambda zy^k
inline SolverState three_block_primal_step(const ThreeBlockProblem& tb, const SolverState& st,
                                           const SolverConfig& cfg) {
  const double lam = cfg.lambda;
  const double mu = tb.mu();
  const Vector& s = st.at("s");
  const Vector& y = st.at("y");
  const Vector& zs = st.at("zs");
  const Vector& zy = st.at("zy");
  const Vector x = tb.solve_primal_x(mu * (mu * s - lam * zs) +
                                     tb.C().adjoint_apply(y - lam * zy));
  const Vector cx = tb.C().apply(x);
  const Vector s_next = tb.u().prox(x + (lam / mu) * zs, lam / (mu * mu));
  const Vector y_next = tb.v().prox(cx + lam * zy, lam);
  SolverState next("tb-primal", {}, st.k() + 1);
  next.set("x", x);
  next.set("Cx", cx);
  next.set("s", s_next);
  next.set("y", y_next);
  next.set("zs", zs + mu * (x - s_next) / lam);
  next.set("zy", zy + (cx - y_next) / lam);
  return next;
}

// Dual three-block ADM on min u*(u) + v*(t), C*v + u = 0, v - t = 0.
inline SolverState three_block_dual_step(const ThreeBlockProblem& tb, const SolverState& st,
                                         const SolverConfig& cfg) {
  const double lam = cfg.lambda;
  const Vector& u = st.at("u");
  const Vector& t = st.at("t");
  const Vector& zu = st.at("zu");
  const Vector& zt = st.at("zt");
  const Vector v = tb.solve_dual_v(-tb.C().apply(u + zu / lam) + (t - zt / lam));
  const Vector cv = tb.C().adjoint_apply(v);
  const Vector u_next = tb.u_conjugate().prox(-cv - zu / lam, 1.0 / lam);
  const Vector t_next = tb.v_conjugate().prox(v + zt / lam, 1.0 / lam);
  SolverState next("tb-dual", {}, st.k() + 1);
  next.set("v", v);
  next.set("Cv", cv);
  next.set("u", u_next);
  next.set("t", t_next);
  next.set("zu", zu + lam * (cv + u_next));
  next.set("zt", zt + lam * (v - t_next));
  return next;
}

// ---------------------------------------------------------------------------
// Bundled algorithms (step + observers) for the shared driver.
// ---------------------------------------------------------------------------

namespace detail {

inline std::function<double(const SolverState&)> primal_objective(
    std::shared_ptr<const MasterProblem> mp, const char* xkey, const char* ykey) {
  return [mp, xkey, ykey](const SolverState& st) -> double {
    if (!st.has(xkey) || !st.has(ykey)) return quiet_nan();
    return mp->problem().objective(st.at(xkey), st.at(ykey));
  };
}

}  // namespace detail

inline SteppedAlgorithm make_alg1(std::shared_ptr<const MasterProblem> mp) {
  return {"alg1",
          [mp](const SolverState& st, const SolverConfig& cfg) { return adm1_step(*mp, st, cfg); },
          detail::primal_objective(mp, "x", "y"),
          [mp](const SolverState& st) -> double {
            if (!st.has("r")) return detail::quiet_nan();
            return st.at("r").norm();
          }};
}

inline SteppedAlgorithm make_alg2(std::shared_ptr<const MasterProblem> mp) {
  return {"alg2",
          [mp](const SolverState& st, const SolverConfig& cfg) {
            return adm2_master_step(*mp, st, cfg);
          },
          detail::primal_objective(mp, "xw", "yw"),
          [](const SolverState& st) -> double {
            if (!st.has("r")) return detail::quiet_nan();
            return st.at("r").norm();
          }};
}

inline SteppedAlgorithm make_alg3(std::shared_ptr<const DualProblem> dp) {
  return {"alg3",
          [dp](const SolverState& st, const SolverConfig& cfg) {
            return adm3_dual_step(*dp, st, cfg);
          },
          [dp](const SolverState& st) -> double {
            if (!st.has("v") || !dp->Fstar_neg().has_value() || !dp->Gstar_neg().has_value())
              return detail::quiet_nan();
            return dp->Fstar_neg().value(st.at("u")) + dp->Gstar_neg().value(st.at("v"));
          },
          [](const SolverState& st) -> double {
            if (!st.has("v")) return detail::quiet_nan();
            return (st.at("u") - st.at("v")).norm();
          }};
}

inline SteppedAlgorithm make_alg4(std::shared_ptr<const MasterProblem> mp) {
  return {"alg4",
          [mp](const SolverState& st, const SolverConfig& cfg) {
            return adm4_primal_dual_step(*mp, st, cfg);
          },
          [mp](const SolverState& st) -> double {
            if (!st.has("y") || !mp->problem().g.has_value()) return detail::quiet_nan();
            return mp->problem().g.value(st.at("y"));
          },
          // ||Ax + By - b|| implied by the iterate map: lambda ||u - u_prev||.
          [](const SolverState& st) -> double {
            return st.has("u") && st.has("u_prev") ? (st.at("u") - st.at("u_prev")).norm()
                                                   : detail::quiet_nan();
          }};
}

inline SteppedAlgorithm make_alg5(std::shared_ptr<const MasterProblem> mp) {
  return {"alg5",
          [mp](const SolverState& st, const SolverConfig& cfg) { return adm5_swapped_step(*mp, st, cfg); },
          detail::primal_objective(mp, "x", "y"),
          [](const SolverState& st) -> double {
            if (!st.has("r")) return detail::quiet_nan();
            return st.at("r").norm();
          }};
}

inline SteppedAlgorithm make_rprs(ProxFunction f, ProxFunction gA, std::string name = "rprs") {
  auto fp = std::make_shared<ProxFunction>(std::move(f));
  auto gp = std::make_shared<ProxFunction>(std::move(gA));
  return {std::move(name),
          [fp, gp](const SolverState& st, const SolverConfig& cfg) {
            return rprs_step(*fp, *gp, st, cfg);
          },
          [fp, gp](const SolverState& st) -> double {
            if (!st.has("x") || !fp->has_value() || !gp->has_value()) return detail::quiet_nan();
            return fp->value(st.at("x")) + gp->value(st.at("x"));
          },
          [](const SolverState& st) -> double {
            return st.has("w_prev") ? (st.at("w") - st.at("w_prev")).norm() : detail::quiet_nan();
          }};
}

inline SteppedAlgorithm make_three_block_primal(std::shared_ptr<const ThreeBlockProblem> tb) {
  return {"tb-primal",
          [tb](const SolverState& st, const SolverConfig& cfg) {
            return three_block_primal_step(*tb, st, cfg);
          },
          [tb](const SolverState& st) -> double {
            if (!st.has("s") || !st.has("y")) return detail::quiet_nan();
            return tb->objective(st.at("s"), st.at("y"));
          },
          [tb](const SolverState& st) -> double {
            if (!st.has("x")) return detail::quiet_nan();
            const Vector rs = tb->mu() * (st.at("x") - st.at("s"));
            const Vector ry = st.at("Cx") - st.at("y");
            return std::sqrt(rs.squaredNorm() + ry.squaredNorm());
          }};
}

inline SteppedAlgorithm make_three_block_dual(std::shared_ptr<const ThreeBlockProblem> tb) {
  return {"tb-dual",
          [tb](const SolverState& st, const SolverConfig& cfg) {
            return three_block_dual_step(*tb, st, cfg);
          },
          nullptr,
          [](const SolverState& st) -> double {
            if (!st.has("v")) return detail::quiet_nan();
            const Vector ru = st.at("Cv") + st.at("u");
            const Vector rt = st.at("v") - st.at("t");
            return std::sqrt(ru.squaredNorm() + rt.squaredNorm());
          }};
}

}  // namespace admeq

#endif  // ADMEQ_SOLVERS_HPP_
