// proxswitch command-line front end.
//
// Subcommands: ssm-verify, run-spr, sweep-p, stats.
// Exit status: 0 success, 1 failed check or run error, 2 input error.

#include "proxswitch/harness.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace ps = proxswitch;
using nlohmann::json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;

struct Shared {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string config;
  std::optional<int> workers;
};

// Flags that overlay a SprRunSpec; unset ones leave the config value alone.
struct SpecFlags {
  std::optional<long> n, m, nnz;
  std::optional<double> p, epsilon, rho, rho_hat, tau, sigma;
  std::optional<long long> outer_k, inner_t;
  std::optional<std::string> mode;
  bool continue_past_stop = false;
};

void add_shared(CLI::App* cmd, Shared& s) {
  cmd->add_option("--seed", s.seed, "Base seed");
  cmd->add_option("--out", s.out, "Output CSV path (stdout when omitted)");
  cmd->add_option("--config", s.config, "JSON run spec; flags override it");
  cmd->add_option("--workers", s.workers, "Worker threads")
      ->check(CLI::PositiveNumber);
}

void add_spec_flags(CLI::App* cmd, SpecFlags& f) {
  cmd->add_option("--n", f.n, "Dimension");
  cmd->add_option("--m", f.m, "Number of measurements");
  cmd->add_option("--nnz", f.nnz, "Nonzeros in the planted signal");
  cmd->add_option("--p", f.p, "SCAD budget");
  cmd->add_option("--epsilon", f.epsilon, "Target stationarity");
  cmd->add_option("--rho", f.rho, "Weak-convexity modulus");
  cmd->add_option("--rho-hat", f.rho_hat, "Proximal parameter");
  cmd->add_option("--outer-k", f.outer_k, "Outer iteration budget");
  cmd->add_option("--inner-t", f.inner_t, "Inner iterations per subproblem");
  cmd->add_option("--tau", f.tau, "Inner feasibility tolerance override");
  cmd->add_option("--mode", f.mode, "fj or kkt")
      ->check(CLI::IsMember({"fj", "kkt"}));
  cmd->add_option("--sigma", f.sigma, "Strong MFCQ constant (kkt mode)");
  cmd->add_flag("--continue", f.continue_past_stop,
                "Keep iterating after the stopping rule fires");
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ps::InputError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ps::InputError("config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ps::InputError("config " + path + ": not an object");
  return j;
}

void reject_unknown(const json& j, const std::set<std::string>& known) {
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) {
      throw ps::InputError("config: unknown key '" + item.key() + "'");
    }
  }
}

template <class T>
void take(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ps::InputError(std::string("config: bad value for '") + key + "'");
  }
}

ps::Mode parse_mode(const std::string& s) {
  if (s == "fj") return ps::Mode::FJ;
  if (s == "kkt") return ps::Mode::KKT;
  throw ps::InputError("mode must be fj or kkt");
}

const std::set<std::string> kSpecKeys = {
    "n",     "m",    "nnz",   "p",    "epsilon", "rho",  "rho_hat",
    "outer_k", "inner_t", "tau", "mode", "sigma", "seed", "continue",
    "workers"};

ps::SprRunSpec build_spec(const json& cfg, const Shared& sh,
                          const SpecFlags& f) {
  ps::SprRunSpec spec;
  long n = spec.n, m = spec.m, nnz = spec.nnz;
  long long outer_k = spec.outer_k, inner_t = spec.inner_t;
  std::string mode = "fj";
  take(cfg, "n", n);
  take(cfg, "m", m);
  take(cfg, "nnz", nnz);
  take(cfg, "p", spec.p);
  take(cfg, "epsilon", spec.epsilon);
  take(cfg, "rho", spec.rho);
  take(cfg, "rho_hat", spec.rho_hat);
  take(cfg, "outer_k", outer_k);
  take(cfg, "inner_t", inner_t);
  take(cfg, "mode", mode);
  take(cfg, "seed", spec.seed);
  if (cfg.contains("tau")) {
    double t = 0.0;
    take(cfg, "tau", t);
    spec.tau = t;
  }
  if (cfg.contains("sigma")) {
    double s = 0.0;
    take(cfg, "sigma", s);
    spec.sigma = s;
  }
  bool cont = false;
  take(cfg, "continue", cont);

  if (f.n) n = *f.n;
  if (f.m) m = *f.m;
  if (f.nnz) nnz = *f.nnz;
  if (f.p) spec.p = *f.p;
  if (f.epsilon) spec.epsilon = *f.epsilon;
  if (f.rho) spec.rho = *f.rho;
  if (f.rho_hat) spec.rho_hat = *f.rho_hat;
  if (f.outer_k) outer_k = *f.outer_k;
  if (f.inner_t) inner_t = *f.inner_t;
  if (f.tau) spec.tau = *f.tau;
  if (f.sigma) spec.sigma = *f.sigma;
  if (f.mode) mode = *f.mode;
  if (sh.seed) spec.seed = *sh.seed;
  if (f.continue_past_stop) cont = true;

  spec.n = n;
  spec.m = m;
  spec.nnz = nnz;
  spec.outer_k = outer_k;
  spec.inner_t = inner_t;
  spec.mode = parse_mode(mode);
  spec.halt_on_non_decrease = !cont;
  spec.validate();
  return spec;
}

int resolve_workers(const json& cfg, const Shared& sh) {
  int workers = 1;
  take(cfg, "workers", workers);
  if (sh.workers) workers = *sh.workers;
  if (workers < 1) throw ps::InputError("workers must be positive");
  return workers;
}

// Writes via `emit` to --out, or to stdout when no path was given.
template <class Emit>
void write_output(const std::string& path, Emit emit) {
  if (path.empty()) {
    emit(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw ps::InputError("cannot write " + path);
  emit(out);
  if (!out) throw ps::RunError("write failed: " + path);
}

int run_ssm_verify(const Shared& sh, const std::vector<std::string>& names,
                   std::vector<double> taus) {
  const json cfg = load_config(sh.config);
  reject_unknown(cfg, {"instance", "tau", "seed", "workers"});
  std::vector<std::string> chosen = names;
  if (chosen.empty()) take(cfg, "instance", chosen);
  if (taus.empty()) take(cfg, "tau", taus);
  if (taus.empty()) taus = {1e-1, 1e-2, 1e-3};
  if (chosen.empty() || (chosen.size() == 1 && chosen[0] == "all")) {
    chosen = {"quad1d", "quad2d", "unbounded"};
  }
  std::vector<ps::CatalogId> ids;
  for (const auto& name : chosen) ids.push_back(ps::parse_catalog_id(name));

  const auto cells = ps::cmd_ssm_verify(ids, taus);
  write_output(sh.out, [&](std::ostream& os) { ps::write_verify_csv(os, cells); });
  int status = 0;
  for (const auto& c : cells) {
    if (!c.pass) {
      std::cerr << "FAIL " << c.instance << " tau=" << c.tau
                << " gap=" << c.objective_gap << " g=" << c.infeasibility
                << '\n';
      status = kExitFailure;
    }
  }
  return status;
}

int run_run_spr(const Shared& sh, const SpecFlags& f) {
  const json cfg = load_config(sh.config);
  reject_unknown(cfg, kSpecKeys);
  const ps::SprRunSpec spec = build_spec(cfg, sh, f);
  const ps::SprRunResult result = ps::cmd_run_spr(spec);

  write_output(sh.out, [&](std::ostream& os) {
    ps::write_trajectory_csv(os, result.trajectory);
  });
  std::ostream& report = sh.out.empty() ? std::cerr : std::cout;
  ps::write_run_summary(report, result);
  if (!sh.out.empty()) {
    write_output(sh.out + ".json", [&](std::ostream& os) {
      os << ps::run_metadata_json(spec, result) << '\n';
    });
  }
  return 0;
}

int run_sweep_p(const Shared& sh, const SpecFlags& f, std::vector<double> grid,
                std::optional<long long> replicates) {
  json cfg = load_config(sh.config);
  auto keys = kSpecKeys;
  keys.insert({"p_grid", "replicates"});
  reject_unknown(cfg, keys);
  if (grid.empty()) take(cfg, "p_grid", grid);
  if (grid.empty()) {
    for (int p = 21; p <= 33; ++p) grid.push_back(p);
  }
  long long reps = 30;
  take(cfg, "replicates", reps);
  if (replicates) reps = *replicates;
  const ps::SprRunSpec spec = build_spec(cfg, sh, f);
  const auto rows =
      ps::cmd_sweep_p(spec, grid, reps, resolve_workers(cfg, sh));
  write_output(sh.out, [&](std::ostream& os) { ps::write_sweep_csv(os, rows); });
  return 0;
}

int run_stats(const Shared& sh, const std::vector<std::string>& inputs,
              std::vector<long long> checkpoints) {
  const json cfg = load_config(sh.config);
  reject_unknown(cfg, {"inputs", "checkpoints", "seed", "workers"});
  std::vector<std::string> paths = inputs;
  if (paths.empty()) take(cfg, "inputs", paths);
  if (paths.empty()) throw ps::InputError("stats: no input files");
  if (checkpoints.empty()) take(cfg, "checkpoints", checkpoints);
  std::vector<std::int64_t> ks(checkpoints.begin(), checkpoints.end());
  if (ks.empty()) ks = ps::kDefaultCheckpoints;

  std::vector<ps::TrajectoryFile> files;
  for (const auto& path : paths) files.push_back(ps::load_trajectory(path));
  const auto rows = ps::cmd_stats(files, ks);
  write_output(sh.out, [&](std::ostream& os) { ps::write_stats_csv(os, rows); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proximally guided switching subgradient experiments"};
  app.require_subcommand(1);

  Shared verify_shared, spr_shared, sweep_shared, stats_shared;
  SpecFlags spr_flags, sweep_flags;

  auto* verify = app.add_subcommand(
      "ssm-verify", "Check the inner-solver rate certificate on test instances");
  add_shared(verify, verify_shared);
  std::vector<std::string> instances;
  std::vector<double> taus;
  verify->add_option("--instance", instances,
                     "quad1d, quad2d, unbounded or all");
  verify->add_option("--tau", taus, "Tolerances (default 0.1 0.01 0.001)");

  auto* spr = app.add_subcommand("run-spr", "Run one sparse phase retrieval trajectory");
  add_shared(spr, spr_shared);
  add_spec_flags(spr, spr_flags);

  auto* sweep = app.add_subcommand("sweep-p", "Multiplier sweep over the SCAD budget");
  add_shared(sweep, sweep_shared);
  add_spec_flags(sweep, sweep_flags);
  std::vector<double> p_grid;
  std::optional<long long> replicates;
  sweep->add_option("--p-grid", p_grid, "Budgets to sweep (default 21..33)");
  sweep->add_option("--replicates", replicates, "Replicates per budget");

  auto* stats = app.add_subcommand("stats", "Replicate statistics from trajectory CSVs");
  add_shared(stats, stats_shared);
  std::vector<std::string> inputs;
  std::vector<long long> checkpoints;
  stats->add_option("inputs", inputs, "Trajectory CSV files");
  stats->add_option("--checkpoints", checkpoints,
                    "Outer-iteration checkpoints (default 50 100 200)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*verify) return run_ssm_verify(verify_shared, instances, taus);
    if (*spr) return run_run_spr(spr_shared, spr_flags);
    if (*sweep) return run_sweep_p(sweep_shared, sweep_flags, p_grid, replicates);
    if (*stats) return run_stats(stats_shared, inputs, checkpoints);
  } catch (const ps::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ps::PreconditionError& e) {
    std::cerr << "precondition failed: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
