// Command-line front end: generate instances, run solvers, verify the
// iterate correspondences between algorithm pairs, and emit traces/reports.

#include "admeq/admeq.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <thread>

namespace {

using json = nlohmann::json;
using namespace admeq;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitFail = 3;

struct CommonFlags {
  InstanceSpec spec;
  SolverConfig cfg;
};

void add_instance_flags(CLI::App* cmd, InstanceSpec& spec) {
  cmd->add_option("--instance", spec.family,
                  "instance family: bp | bpdn | tv | three-block | rprs-lasso");
  cmd->add_option("--m", spec.m, "row count of the instance matrix");
  cmd->add_option("--n", spec.n, "column count of the instance matrix");
  cmd->add_option("--rows", spec.rows, "image rows (tv)");
  cmd->add_option("--cols", spec.cols, "image columns (tv)");
  cmd->add_option("--seed", spec.seed, "64-bit instance seed");
  cmd->add_option("--alpha", spec.alpha, "data-fit weight alpha (bpdn / tv)");
  cmd->add_flag("--orthonormal", spec.orthonormal, "draw an orthonormal A (bpdn, m == n)");
  cmd->add_option("--image", spec.image_path, "PGM (P2/P5) or CSV grid image (tv)");
}

void add_config_flags(CLI::App* cmd, SolverConfig& cfg) {
  cmd->add_option("--lambda", cfg.lambda, "penalty parameter lambda");
  cmd->add_option("--relax", cfg.alpha, "RPRS relaxation alpha in (0, 1]");
  cmd->add_option("--iters", cfg.max_iter, "iteration budget");
}

json spec_to_json(const InstanceSpec& spec) {
  json j{{"family", spec.family}, {"seed", spec.seed}, {"alpha", spec.alpha}};
  if (spec.family == "tv") {
    j["rows"] = spec.rows;
    j["cols"] = spec.cols;
    if (!spec.image_path.empty()) j["image"] = spec.image_path;
  } else {
    j["m"] = spec.m;
    j["n"] = spec.n;
  }
  return j;
}

void write_trace_csv(const Trace& trace, const std::string& path) {
  std::set<std::string> keys;
  for (const auto& e : trace.entries)
    for (const auto& [k, v] : e.state.vars()) keys.insert(k);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "k,objective,primal_residual";
  for (const auto& k : keys) out << ",norm_" << k;
  out << "\n";
  for (const auto& e : trace.entries) {
    out << e.state.k() << "," << fmt17(e.objective) << "," << fmt17(e.primal_residual);
    for (const auto& k : keys)
      out << "," << (e.state.has(k) ? fmt17(e.state.at(k).norm()) : "nan");
    out << "\n";
  }
}

int run_solve(const CommonFlags& flags, const std::string& algo, bool mix_orders,
              const std::string& out_path) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveSetup setup = build_solve(flags.spec, algo, mix_orders);
  Trace trace = run(setup.algorithm, setup.init, flags.cfg);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!out_path.empty()) write_trace_csv(trace, out_path);

  const auto& last = trace.last();
  const bool converged =
      std::isfinite(last.primal_residual) && last.primal_residual <= flags.cfg.stop_tol;
  json summary{{"algorithm", setup.algorithm.name},
               {"instance", spec_to_json(flags.spec)},
               {"lambda", flags.cfg.lambda},
               {"relaxation", flags.cfg.alpha},
               {"iterations", trace.iterations()},
               {"final_objective", last.objective},
               {"final_residual", last.primal_residual},
               {"converged", converged},
               {"truncated", trace.truncated},
               {"wall_time_s", wall}};
  if (!out_path.empty()) {
    std::ofstream sj(out_path + ".json", std::ios::binary);
    sj << summary.dump(2) << "\n";
  }
  std::cout << summary.dump(2) << std::endl;
  if (trace.truncated) {
    std::cerr << "error: run diverged (numerical blowup); trace truncated" << std::endl;
    return kExitError;
  }
  return converged ? kExitOk : kExitNoConvergence;
}

json report_to_json(const EquivalenceReport& rep) {
  json jq = json::object();
  for (const auto& [k, v] : rep.per_quantity) jq[k] = v;
  return json{{"pair", rep.pair},         {"iterations", rep.iterations},
              {"tolerance", rep.tolerance}, {"max_deviation", rep.max_deviation},
              {"per_quantity", jq},         {"pass", rep.pass}};
}

// Merges the reports of a multi-map pair (tv-four) into one.
EquivalenceReport merge_reports(const std::string& name, const std::vector<EquivalenceReport>& reps) {
  if (reps.size() == 1) return reps.front();
  EquivalenceReport merged;
  merged.pair = name;
  merged.pass = true;
  for (const auto& r : reps) {
    merged.iterations = r.iterations;
    merged.tolerance = r.tolerance;
    for (const auto& [k, v] : r.per_quantity) merged.per_quantity[r.pair + ":" + k] = v;
    merged.max_deviation = std::max(merged.max_deviation, r.max_deviation);
    merged.pass = merged.pass && r.pass;
  }
  return merged;
}

EquivalenceReport verify_pair(const std::string& pair_name, const InstanceSpec& spec,
                              const SolverConfig& cfg, double tol, double perturb) {
  std::vector<IterateMap> maps = build_pair_maps(pair_name, spec, cfg);
  std::vector<EquivalenceReport> reps;
  for (auto& map : maps) {
    if (perturb != 0.0) perturb_init_b(map, perturb);
    reps.push_back(run_lockstep(map, cfg.max_iter, tol));
  }
  return merge_reports(pair_name, reps);
}

int run_verify(const std::string& pair_name, InstanceSpec spec, const SolverConfig& cfg,
               double tol, double perturb, const std::string& out_path) {
  EquivalenceReport rep = verify_pair(pair_name, spec, cfg, tol, perturb);
  json j = report_to_json(rep);
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error("cannot write '" + out_path + "'");
    out << j.dump(2) << "\n";
  }
  std::cout << j.dump(2) << std::endl;
  return rep.pass ? kExitOk : kExitFail;
}

int suite_threads() {
  if (const char* env = std::getenv("ADMEQ_THREADS")) {
    const int t = std::atoi(env);
    if (t >= 1) return t;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

int run_suite(const SolverConfig& cfg, bool have_iters) {
  struct Row {
    std::string name;
    EquivalenceReport report;
    std::string error;
  };
  const auto& pairs = pair_registry();
  std::vector<Row> rows(pairs.size());

  const int max_threads = suite_threads();
  std::vector<std::future<void>> inflight;
  auto drain = [&]() {
    for (auto& f : inflight) f.get();
    inflight.clear();
  };
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (static_cast<int>(inflight.size()) >= max_threads) drain();
    inflight.push_back(std::async(std::launch::async, [&pairs, &rows, &cfg, have_iters, i]() {
      const PairSpec& p = pairs[i];
      rows[i].name = p.name;
      SolverConfig run_cfg = cfg;
      if (!have_iters) run_cfg.max_iter = 100;
      try {
        rows[i].report = verify_pair(p.name, p.canonical, run_cfg, p.default_tol, 0.0);
      } catch (const std::exception& e) {
        rows[i].error = e.what();
      }
    }));
  }
  drain();

  bool all_pass = true;
  std::printf("%-18s %-12s %-14s %s\n", "pair", "instance", "max deviation", "result");
  for (const auto& row : rows) {
    const PairSpec& p = find_pair(row.name);
    if (!row.error.empty()) {
      all_pass = false;
      std::printf("%-18s %-12s %-14s ERROR %s\n", row.name.c_str(), p.canonical.family.c_str(),
                  "-", row.error.c_str());
      continue;
    }
    all_pass = all_pass && row.report.pass;
    std::printf("%-18s %-12s %-14.3e %s\n", row.name.c_str(), p.canonical.family.c_str(),
                row.report.max_deviation, row.report.pass ? "pass" : "FAIL");
  }
  return all_pass ? kExitOk : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"operator-splitting solvers and iterate-correspondence checks"};
  app.require_subcommand(1);

  CommonFlags solve_flags;
  std::string solve_algo = "alg1";
  std::string solve_out;
  bool mix_orders = false;
  CLI::App* solve = app.add_subcommand("solve", "run one algorithm and emit a trace");
  add_instance_flags(solve, solve_flags.spec);
  add_config_flags(solve, solve_flags.cfg);
  solve->add_option("--algo", solve_algo,
                    "alg1 | alg2 | alg3 | alg4 | alg5 | rprs | tb-primal | tb-dual");
  solve->add_option("--tol", solve_flags.cfg.stop_tol,
                    "stopping tolerance on the primal residual");
  solve->add_option("--out", solve_out, "trace CSV path (summary lands beside it as .json)");
  solve->add_flag("--mix-orders", mix_orders,
                  "demo: alternate the two update orders between iterations (alg1 only)");

  CommonFlags verify_flags;
  std::string verify_pair_name;
  std::string verify_out;
  double verify_tol = -1.0;
  double verify_perturb = 0.0;
  CLI::App* verify = app.add_subcommand("verify", "lockstep-check one algorithm pair");
  verify->add_option("--pair", verify_pair_name, "registered pair name")->required();
  add_instance_flags(verify, verify_flags.spec);
  add_config_flags(verify, verify_flags.cfg);
  verify->add_option("--tol", verify_tol, "deviation tolerance (default: pair-specific)");
  verify->add_option("--perturb", verify_perturb,
                     "negative control: offset one entry of run B's initial state");
  verify->add_option("--out", verify_out, "report JSON path");

  SolverConfig suite_cfg;
  CLI::App* suite = app.add_subcommand("suite", "run every registered pair on its canonical instance");
  suite->add_option("--lambda", suite_cfg.lambda, "penalty parameter lambda");
  CLI::Option* suite_iters = suite->add_option("--iters", suite_cfg.max_iter, "iteration budget");

  try {
    app.parse(argc, argv);

    if (solve->parsed()) {
      solve_flags.cfg.validate();
      return run_solve(solve_flags, solve_algo, mix_orders, solve_out);
    }
    if (verify->parsed()) {
      // Flags override the pair's canonical instance field by field.
      const PairSpec& pair = find_pair(verify_pair_name);
      InstanceSpec spec = pair.canonical;
      if (verify->count("--instance")) spec.family = verify_flags.spec.family;
      if (verify->count("--m")) spec.m = verify_flags.spec.m;
      if (verify->count("--n")) spec.n = verify_flags.spec.n;
      if (verify->count("--rows")) spec.rows = verify_flags.spec.rows;
      if (verify->count("--cols")) spec.cols = verify_flags.spec.cols;
      if (verify->count("--seed")) spec.seed = verify_flags.spec.seed;
      if (verify->count("--alpha")) spec.alpha = verify_flags.spec.alpha;
      if (verify->count("--orthonormal")) spec.orthonormal = verify_flags.spec.orthonormal;
      if (verify->count("--image")) spec.image_path = verify_flags.spec.image_path;
      verify_flags.cfg.validate();
      const double tol = verify_tol > 0 ? verify_tol : pair.default_tol;
      return run_verify(verify_pair_name, spec, verify_flags.cfg, tol, verify_perturb,
                        verify_out);
    }
    if (suite->parsed()) {
      suite_cfg.validate();
      return run_suite(suite_cfg, suite_iters->count() > 0);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const admeq::Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitError;
  }
  return kExitError;
}
