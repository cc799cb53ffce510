#include "proxswitch/harness.hpp"

#include "proxswitch/kernels.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace proxswitch {

namespace {

// Restores stream precision on scope exit.
class PrecisionGuard {
 public:
  explicit PrecisionGuard(std::ostream& out) : out_(out), old_(out.precision()) {
    out_ << std::setprecision(17);
  }
  ~PrecisionGuard() { out_.precision(old_); }

 private:
  std::ostream& out_;
  std::streamsize old_;
};

}  // namespace

// ---------------------------------------------------------------- ssm-verify

VerifyCell verify_catalog_instance(CatalogId id, double tau) {
  if (!(tau > 0.0)) throw InputError("ssm-verify: tau must be positive");
  if (tau > kCatalogMaxTau) {
    throw InputError("ssm-verify: catalog constants are certified for tau <= 0.1");
  }
  const ConvexTestInstance inst = convex_test_instance(id);
  SsmConfig cfg;
  cfg.tau = tau;
  cfg.mu = inst.mu;
  cfg.L1 = inst.L1;
  cfg.T = theorem2_min_T(inst.L0sq, inst.L1, inst.mu, tau,
                         (inst.z0 - inst.z_star).norm());
  const SsmResult res = ssm_solve(inst.F, inst.G, inst.domain, inst.z0, cfg);

  VerifyCell cell;
  cell.instance = std::string(catalog_name(id));
  cell.tau = tau;
  cell.T = cfg.T;
  cell.objective_gap = inst.F.value(res.z_bar) - inst.F_star;
  cell.infeasibility = inst.G.value(res.z_bar);
  cell.pass = !res.degenerate && cell.objective_gap <= tau &&
              cell.infeasibility <= tau;
  return cell;
}

std::vector<VerifyCell> cmd_ssm_verify(const std::vector<CatalogId>& ids,
                                       const std::vector<double>& taus) {
  if (taus.empty()) throw InputError("ssm-verify: no tau values");
  std::vector<VerifyCell> cells;
  for (CatalogId id : ids) {
    for (double tau : taus) cells.push_back(verify_catalog_instance(id, tau));
  }
  return cells;
}

void write_verify_csv(std::ostream& out, const std::vector<VerifyCell>& cells) {
  PrecisionGuard guard(out);
  out << "instance,tau,T,objective_gap,infeasibility,result\n";
  for (const auto& c : cells) {
    out << c.instance << ',' << c.tau << ',' << c.T << ',' << c.objective_gap
        << ',' << c.infeasibility << ',' << (c.pass ? "pass" : "fail") << '\n';
  }
}

// ---------------------------------------------------------------- run-spr

void SprRunSpec::validate() const {
  if (n < 1 || m < 1) throw InputError("run-spr: n and m must be positive");
  if (nnz < 0 || nnz > n) throw InputError("run-spr: need 0 <= nnz <= n");
  if (!(p >= 0.0)) throw InputError("run-spr: p must be nonnegative");
  if (!(epsilon > 0.0)) throw InputError("run-spr: epsilon must be positive");
  if (!(rho >= 0.0)) throw InputError("run-spr: rho must be nonnegative");
  if (!(rho_hat > std::max(rho, 1.0))) {
    throw InputError("run-spr: rho-hat must exceed max(rho, 1)");
  }
  if (outer_k < 1) throw InputError("run-spr: outer-k must be positive");
  if (inner_t < 1) throw InputError("run-spr: inner-t must be positive");
  if (tau && !(*tau > 0.0)) throw InputError("run-spr: tau must be positive");
  if (mode == Mode::KKT && !(sigma && *sigma > 0.0)) {
    throw InputError("run-spr: --mode kkt requires a positive --sigma");
  }
}

ProxConfig SprRunSpec::prox_config() const {
  ProxConfig cfg;
  cfg.rho_hat = rho_hat;
  cfg.epsilon = epsilon;
  cfg.mode = mode;
  cfg.sigma = sigma;
  cfg.K_max = outer_k;
  cfg.T_override = inner_t;
  cfg.tau_override = tau;
  cfg.halt_on_non_decrease = halt_on_non_decrease;
  return cfg;
}

Vector sample_feasible_x0(const ConstrainedProblem& problem,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, kInitialStdDev);
  const FunctionOracle g = problem.constraint();
  Vector x(problem.dim());
  for (int attempt = 0; attempt < kMaxInitialResamples; ++attempt) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = normal(rng);
    x = project(problem.domain, x);
    if (g.value(x) <= 0.0) return x;
  }
  throw RunError("no feasible initial point after " +
                 std::to_string(kMaxInitialResamples) + " samples");
}

SprInstance make_spr_instance(const SprRunSpec& spec) {
  spec.validate();
  SprInstance inst = spr_generate(spec.n, spec.m, spec.nnz, spec.p,
                                  kernels::derive_seed(spec.seed, 0));
  inst.rho = spec.rho;
  inst.rho_hat = spec.rho_hat;
  return inst;
}

SprRunResult run_spr_on(const SprInstance& instance, const SprRunSpec& spec) {
  spec.validate();
  SprRunResult result;
  result.instance = instance;
  result.instance.rho = spec.rho;
  result.instance.rho_hat = spec.rho_hat;
  const ConstrainedProblem problem = to_problem(result.instance);
  const ProxConfig cfg = spec.prox_config();
  const Vector x0 =
      sample_feasible_x0(problem, kernels::derive_seed(spec.seed, 1));
  result.trajectory = run(problem, cfg, x0);
  result.refined = refine(problem, cfg, result.trajectory.last_feasible().x);
  return result;
}

SprRunResult cmd_run_spr(const SprRunSpec& spec) {
  return run_spr_on(make_spr_instance(spec), spec);
}

void write_run_summary(std::ostream& out, const SprRunResult& result) {
  PrecisionGuard guard(out);
  const Trajectory& t = result.trajectory;
  out << "stop_reason: " << to_string(t.stop_reason) << '\n'
      << "outer_iterations: " << t.completed_outer() << '\n'
      << "tau: " << t.inner.tau << '\n'
      << "inner_T: " << t.inner.T << '\n'
      << "final_f: " << t.records.back().f << '\n'
      << "final_g: " << t.records.back().g << '\n'
      << "x_lo_fj_residual: " << result.refined.fj.residual << '\n'
      << "x_lo_kkt_residual: " << result.refined.kkt.residual << '\n'
      << "lambda_hat: " << result.refined.kkt.lambda << '\n'
      << "gamma0_hat: " << result.refined.fj.gamma0 << '\n'
      << "subgradient_evaluations: " << t.subgradient_evaluations << '\n'
      << "oracle_calls: " << t.oracle_calls << '\n';
}

std::string run_metadata_json(const SprRunSpec& spec,
                              const SprRunResult& result) {
  nlohmann::json j;
  j["n"] = spec.n;
  j["m"] = spec.m;
  j["nnz"] = spec.nnz;
  j["p"] = spec.p;
  j["seed"] = spec.seed;
  j["epsilon"] = spec.epsilon;
  j["rho"] = spec.rho;
  j["rho_hat"] = spec.rho_hat;
  j["outer_k"] = spec.outer_k;
  j["inner_t"] = spec.inner_t;
  j["tau"] = result.trajectory.inner.tau;
  j["mode"] = spec.mode == Mode::FJ ? "fj" : "kkt";
  j["M_estimate"] = result.instance.M_estimate;
  j["halt_on_non_decrease"] = spec.halt_on_non_decrease;
  j["stop_reason"] = std::string(to_string(result.trajectory.stop_reason));
  if (result.trajectory.first_stop_k) {
    j["first_stop_k"] = *result.trajectory.first_stop_k;
    j["first_stop_reason"] =
        std::string(to_string(result.trajectory.first_stop_reason));
  }
  j["subgradient_evaluations"] = result.trajectory.subgradient_evaluations;
  j["oracle_calls"] = result.trajectory.oracle_calls;
  return j.dump(2);
}

// ---------------------------------------------------------------- sweep-p

std::vector<SweepRow> cmd_sweep_p(const SprRunSpec& base,
                                  const std::vector<double>& p_grid,
                                  std::int64_t replicates, int workers) {
  if (p_grid.empty()) throw InputError("sweep-p: empty p grid");
  if (replicates < 1) throw InputError("sweep-p: replicates must be positive");
  base.validate();
  for (double p : p_grid) {
    if (!(p >= 0.0)) throw InputError("sweep-p: p must be nonnegative");
  }

  auto replicate_spec = [&](std::int64_t r) {
    SprRunSpec spec = base;
    spec.seed = kernels::derive_seed(base.seed, static_cast<std::uint64_t>(r));
    return spec;
  };
  const auto instances = kernels::parallel_map<SprInstance>(
      replicates, workers,
      [&](std::int64_t r) { return make_spr_instance(replicate_spec(r)); });

  const auto cells = static_cast<std::int64_t>(p_grid.size()) * replicates;
  struct Outcome {
    double lambda = 0.0;
    bool diverged = false;
  };
  const auto outcomes = kernels::parallel_map<Outcome>(
      cells, workers, [&](std::int64_t cell) {
        const auto pi = static_cast<std::size_t>(cell / replicates);
        const std::int64_t r = cell % replicates;
        SprRunSpec spec = replicate_spec(r);
        spec.p = p_grid[pi];
        const SprInstance inst =
            with_budget(instances[static_cast<std::size_t>(r)], spec.p);
        const SprRunResult res = run_spr_on(inst, spec);
        return Outcome{res.refined.kkt.lambda, res.refined.kkt.lambda_at_cap};
      });

  std::vector<SweepRow> rows;
  for (std::size_t pi = 0; pi < p_grid.size(); ++pi) {
    SweepRow row;
    row.p = p_grid[pi];
    row.replicates = replicates;
    row.lambda_min = std::numeric_limits<double>::infinity();
    row.lambda_max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::int64_t r = 0; r < replicates; ++r) {
      const Outcome& o =
          outcomes[pi * static_cast<std::size_t>(replicates) +
                   static_cast<std::size_t>(r)];
      sum += o.lambda;
      row.lambda_min = std::min(row.lambda_min, o.lambda);
      row.lambda_max = std::max(row.lambda_max, o.lambda);
      row.diverged += o.diverged ? 1 : 0;
    }
    row.lambda_mean = sum / static_cast<double>(replicates);
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  PrecisionGuard guard(out);
  out << "p,lambda_mean,lambda_min,lambda_max,diverged,replicates\n";
  for (const auto& r : rows) {
    out << r.p << ',' << r.lambda_mean << ',' << r.lambda_min << ','
        << r.lambda_max << ',' << r.diverged << ',' << r.replicates << '\n';
  }
}

// ---------------------------------------------------------------- stats

SummaryStats summarize(std::vector<double> values) {
  if (values.empty()) throw InputError("summarize: no values");
  SummaryStats s;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  s.median = n % 2 == 1 ? values[n / 2]
                        : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.variance = ss / static_cast<double>(n - 1);
  }
  return s;
}

namespace {

const char* const kTrajectoryHeader =
    "k,f,g,step_norm,fj_residual,kkt_residual,lambda_hat,gamma0_hat,"
    "comp_slack,inner_T,stop_reason";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text, const std::string& where) {
  if (text.empty()) throw ParseError(where + ": empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) {
    throw ParseError(where + ": not a number: '" + text + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& text, const std::string& where) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(where + ": not an integer: '" + text + "'");
  }
  return v;
}

}  // namespace

TrajectoryFile read_trajectory_csv(std::istream& in, const std::string& name) {
  TrajectoryFile file;
  file.path = name;
  std::string line;
  std::size_t line_no = 0;
  auto where = [&] { return name + ":" + std::to_string(line_no); };
  if (!std::getline(in, line)) throw ParseError(name + ":1: missing header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrajectoryHeader) throw ParseError(where() + ": unexpected header");
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 11) {
      throw ParseError(where() + ": expected 11 fields, got " +
                       std::to_string(f.size()));
    }
    TrajectoryRow row;
    row.k = parse_int(f[0], where());
    row.f = parse_double(f[1], where());
    row.g = parse_double(f[2], where());
    if (!f[3].empty()) row.step_norm = parse_double(f[3], where());
    row.fj_residual = parse_double(f[4], where());
    row.kkt_residual = parse_double(f[5], where());
    row.lambda_hat = parse_double(f[6], where());
    row.gamma0_hat = parse_double(f[7], where());
    row.comp_slack = parse_double(f[8], where());
    row.inner_T = parse_int(f[9], where());
    row.stop_reason = f[10];
    if (!file.rows.empty() && row.k <= file.rows.back().k) {
      throw ParseError(where() + ": k is not increasing");
    }
    file.rows.push_back(std::move(row));
  }
  if (file.rows.empty()) throw ParseError(name + ": no data rows");
  return file;
}

TrajectoryFile load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  TrajectoryFile file = read_trajectory_csv(in, path);
  const std::string meta_path = path + ".json";
  if (std::filesystem::exists(meta_path)) {
    std::ifstream meta(meta_path);
    try {
      const auto j = nlohmann::json::parse(meta);
      if (j.contains("p")) file.p = j.at("p").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(meta_path + ": " + e.what());
    }
  }
  return file;
}

std::vector<StatsRow> cmd_stats(const std::vector<TrajectoryFile>& files,
                                const std::vector<std::int64_t>& checkpoints) {
  if (files.empty()) throw InputError("stats: no input files");
  if (checkpoints.empty()) throw InputError("stats: no checkpoints");
  for (auto k : checkpoints) {
    if (k < 0) throw InputError("stats: checkpoints must be nonnegative");
  }
  // NaN sorts badly in a map key, so "no p" gets its own flag.
  using Key = std::tuple<bool, double, std::int64_t>;
  std::map<Key, std::vector<const TrajectoryFile*>> groups;
  for (const auto& file : files) {
    std::int64_t T = 0;
    for (const auto& row : file.rows) {
      if (row.inner_T > 0) {
        T = row.inner_T;
        break;
      }
    }
    groups[{file.p.has_value(), file.p.value_or(0.0), T}].push_back(&file);
  }

  std::vector<StatsRow> out;
  for (const auto& [key, members] : groups) {
    for (std::int64_t K : checkpoints) {
      std::vector<double> fj, kkt;
      std::int64_t diverged = 0;
      for (const TrajectoryFile* file : members) {
        const TrajectoryRow* pick = &file->rows.front();
        for (const auto& row : file->rows) {
          if (row.k > K) break;
          pick = &row;
        }
        fj.push_back(pick->fj_residual);
        kkt.push_back(pick->kkt_residual);
        if (pick->lambda_hat >= kLambdaCapFloor) ++diverged;
      }
      StatsRow row;
      if (std::get<0>(key)) row.p = std::get<1>(key);
      row.T = std::get<2>(key);
      row.KT = K * row.T;
      row.fj = summarize(fj);
      row.kkt = summarize(kkt);
      row.diverged = diverged;
      row.replicates = static_cast<std::int64_t>(members.size());
      out.push_back(row);
    }
  }
  return out;
}

void write_stats_csv(std::ostream& out, const std::vector<StatsRow>& rows) {
  PrecisionGuard guard(out);
  out << "p,T,KT,fj_median,fj_mean,fj_var,kkt_median,kkt_mean,kkt_var,"
         "diverged,replicates\n";
  for (const auto& r : rows) {
    if (r.p) out << *r.p;
    out << ',' << r.T << ',' << r.KT << ',' << r.fj.median << ',' << r.fj.mean
        << ',' << r.fj.variance << ',' << r.kkt.median << ',' << r.kkt.mean
        << ',' << r.kkt.variance << ',' << r.diverged << ',' << r.replicates
        << '\n';
  }
}

}  // namespace proxswitch
