#pragma once

#include "proxswitch/instances.hpp"
#include "proxswitch/prox.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace proxswitch {

/// A run could not be carried out (e.g. no feasible start was found).
class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; the message names the file and line.
class ParseError : public InputError {
 public:
  using InputError::InputError;
};

// ---------------------------------------------------------------- ssm-verify

struct VerifyCell {
  std::string instance;
  double tau = 0.0;
  std::int64_t T = 0;
  double objective_gap = 0.0;  // F(z_bar) - F(z*)
  double infeasibility = 0.0;  // G(z_bar)
  bool pass = false;
};

/// Runs the switching subgradient method for theorem2_min_T iterations on a
/// catalog instance and checks (tau, tau)-optimality.
VerifyCell verify_catalog_instance(CatalogId id, double tau);

std::vector<VerifyCell> cmd_ssm_verify(const std::vector<CatalogId>& ids,
                                       const std::vector<double>& taus);

void write_verify_csv(std::ostream& out, const std::vector<VerifyCell>& cells);

// ---------------------------------------------------------------- run-spr

struct SprRunSpec {
  Eigen::Index n = 30;
  Eigen::Index m = 30;
  Eigen::Index nnz = 8;
  double p = 24.0;
  double epsilon = 1e-2;
  double rho = 3.0;
  double rho_hat = 6.0;
  std::int64_t outer_k = 200;
  std::int64_t inner_t = 2000;
  std::optional<double> tau;
  Mode mode = Mode::FJ;
  std::optional<double> sigma;
  std::uint64_t seed = 1;
  /// When false the outer loop keeps going after the stopping rule fires
  /// (the first firing is still recorded).
  bool halt_on_non_decrease = true;

  void validate() const;
  ProxConfig prox_config() const;
};

/// Standard deviation of the x0 entries (variance 0.01).
inline constexpr double kInitialStdDev = 0.1;
inline constexpr int kMaxInitialResamples = 100;

/// x0 with i.i.d. N(0, 0.01) entries, resampled until g(x0) <= 0.
Vector sample_feasible_x0(const ConstrainedProblem& problem, std::uint64_t seed);

struct SprRunResult {
  SprInstance instance;
  Trajectory trajectory;
  /// Refinement of the last feasible iterate.
  RefinedPoint refined;
};

SprInstance make_spr_instance(const SprRunSpec& spec);
SprRunResult run_spr_on(const SprInstance& instance, const SprRunSpec& spec);
SprRunResult cmd_run_spr(const SprRunSpec& spec);

void write_run_summary(std::ostream& out, const SprRunResult& result);
/// Sidecar metadata consumed by `stats`.
std::string run_metadata_json(const SprRunSpec& spec, const SprRunResult& result);

// ---------------------------------------------------------------- sweep-p

struct SweepRow {
  double p = 0.0;
  double lambda_mean = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  std::int64_t diverged = 0;
  std::int64_t replicates = 0;
};

/// Replicate r uses the same instance (seed derived from (seed, r)) for every
/// p; only the SCAD budget changes.
std::vector<SweepRow> cmd_sweep_p(const SprRunSpec& base,
                                  const std::vector<double>& p_grid,
                                  std::int64_t replicates, int workers);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

// ---------------------------------------------------------------- stats

struct SummaryStats {
  double median = 0.0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased, 0 for a single sample
};

SummaryStats summarize(std::vector<double> values);

struct TrajectoryRow {
  std::int64_t k = 0;
  double f = 0.0;
  double g = 0.0;
  std::optional<double> step_norm;
  double fj_residual = 0.0;
  double kkt_residual = 0.0;
  double lambda_hat = 0.0;
  double gamma0_hat = 0.0;
  double comp_slack = 0.0;
  std::int64_t inner_T = 0;
  std::string stop_reason;
};

struct TrajectoryFile {
  std::string path;
  std::optional<double> p;  // from the sidecar metadata when present
  std::vector<TrajectoryRow> rows;
};

TrajectoryFile read_trajectory_csv(std::istream& in, const std::string& name);
TrajectoryFile load_trajectory(const std::string& path);

struct StatsRow {
  std::optional<double> p;
  std::int64_t T = 0;
  std::int64_t KT = 0;
  SummaryStats fj;
  SummaryStats kkt;
  std::int64_t diverged = 0;
  std::int64_t replicates = 0;
};

inline const std::vector<std::int64_t> kDefaultCheckpoints = {50, 100, 200};

/// Groups by (p, T) and reports residual statistics at each checkpoint
/// K in `checkpoints` (KT = K * T). Runs that stopped before a checkpoint
/// contribute their final row.
std::vector<StatsRow> cmd_stats(const std::vector<TrajectoryFile>& files,
                                const std::vector<std::int64_t>& checkpoints);

void write_stats_csv(std::ostream& out, const std::vector<StatsRow>& rows);

}  // namespace proxswitch
