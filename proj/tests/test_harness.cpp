#include "proxswitch/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

using namespace proxswitch;

namespace {

std::string small_trajectory_csv() {
  return "k,f,g,step_norm,fj_residual,kkt_residual,lambda_hat,gamma0_hat,comp_slack,inner_T,stop_reason\n"
         "0,10,-1,0.5,2,3,0.1,0.9,0.1,0,\n"
         "1,8,-0.5,0.4,1,2,0.2,0.8,0.1,100,\n"
         "2,7,-0.2,0.3,0.5,1,0.3,0.7,0.06,100,\n"
         "3,7.5,-0.1,,0.25,0.5,2000000,0.1,0.2,100,non_decrease\n";
}

TrajectoryFile parse(const std::string& text, const std::string& name = "t.csv") {
  std::istringstream in(text);
  return read_trajectory_csv(in, name);
}

std::string parse_error_message(const std::string& text) {
  try {
    parse(text, "bad.csv");
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("summary statistics") {
  auto s = summarize({4.0});
  CHECK(s.median == 4.0);
  CHECK(s.mean == 4.0);
  CHECK(s.variance == 0.0);
  s = summarize({1.0, 3.0});
  CHECK(s.median == 2.0);
  CHECK(s.mean == 2.0);
  CHECK(s.variance == 2.0);
  s = summarize({5.0, 1.0, 3.0});
  CHECK(s.median == 3.0);
  CHECK(s.variance == doctest::Approx(4.0));
  CHECK_THROWS_AS(summarize({}), InputError);
}

TEST_CASE("trajectory CSV parsing") {
  const auto file = parse(small_trajectory_csv());
  REQUIRE(file.rows.size() == 4);
  CHECK(file.rows[1].f == 8.0);
  CHECK_FALSE(file.rows[3].step_norm.has_value());
  CHECK(file.rows[3].stop_reason == "non_decrease");
  CHECK(file.rows[2].inner_T == 100);
}

TEST_CASE("parse errors name the file and line") {
  std::string text = small_trajectory_csv();
  text.replace(text.find("1,8,"), 4, "1,x,");
  CHECK(parse_error_message(text).rfind("bad.csv:3", 0) == 0);

  CHECK(parse_error_message("k,f\n").rfind("bad.csv:1", 0) == 0);
  CHECK(parse_error_message("").rfind("bad.csv:1", 0) == 0);

  text = small_trajectory_csv() + "4,1,2\n";
  CHECK(parse_error_message(text).rfind("bad.csv:6", 0) == 0);

  text = small_trajectory_csv() + "2,1,-1,,0,0,0,1,0,100,\n";
  CHECK(parse_error_message(text).find("bad.csv:6") != std::string::npos);
}

TEST_CASE("stats at checkpoints") {
  auto a = parse(small_trajectory_csv(), "a.csv");
  auto b = parse(small_trajectory_csv(), "b.csv");
  for (auto& r : b.rows) r.fj_residual *= 3.0;
  a.p = 24.0;
  b.p = 24.0;
  const auto rows = cmd_stats({a, b}, {1, 2, 10});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].T == 100);
  CHECK(rows[0].KT == 100);
  CHECK(rows[0].fj.median == 2.0);  // 1 and 3
  CHECK(rows[0].fj.variance == 2.0);
  CHECK(rows[0].replicates == 2);
  CHECK(rows[0].diverged == 0);
  // a stopped run contributes its final row to later checkpoints
  CHECK(rows[2].KT == 1000);
  CHECK(rows[2].fj.mean == doctest::Approx(0.5));
  CHECK(rows[2].diverged == 2);

  auto c = a;
  c.p = 30.0;
  CHECK(cmd_stats({a, b, c}, {2}).size() == 2);
  CHECK_THROWS_AS(cmd_stats({}, {1}), InputError);
  CHECK_THROWS_AS(cmd_stats({a}, {}), InputError);
}

TEST_CASE("stats CSV layout") {
  const auto rows = cmd_stats({parse(small_trajectory_csv())}, {50});
  std::ostringstream out;
  write_stats_csv(out, rows);
  const std::string text = out.str();
  CHECK(text.rfind("p,T,KT,fj_median,fj_mean,fj_var,kkt_median,kkt_mean,kkt_var,diverged,replicates\n", 0) == 0);
  CHECK(text.find("\n,100,5000,0.25,0.25,0,") != std::string::npos);
}

TEST_CASE("catalog verification") {
  auto cell = verify_catalog_instance(CatalogId::Quad1d, 1e-2);
  CHECK(cell.pass);
  CHECK(cell.objective_gap <= 1e-2);
  cell = verify_catalog_instance(CatalogId::Unbounded, 1e-2);
  CHECK(cell.pass);
  CHECK_THROWS_AS(verify_catalog_instance(CatalogId::Quad1d, 0.0), InputError);
  CHECK_THROWS_AS(verify_catalog_instance(CatalogId::Quad1d, 0.5), InputError);

  const auto cells = cmd_ssm_verify({CatalogId::Quad2d}, {1e-1, 1e-2});
  std::ostringstream out;
  write_verify_csv(out, cells);
  CHECK(out.str().rfind("instance,tau,T,objective_gap,infeasibility,result\nquad2d,", 0) == 0);
}

TEST_CASE("run specification checks") {
  SprRunSpec spec;
  CHECK_NOTHROW(spec.validate());
  spec.mode = Mode::KKT;
  CHECK_THROWS_AS(spec.validate(), InputError);
  spec.sigma = 1.0;
  CHECK_NOTHROW(spec.validate());
  spec = SprRunSpec{};
  spec.rho_hat = 2.0;
  CHECK_THROWS_AS(spec.validate(), InputError);
  spec = SprRunSpec{};
  spec.nnz = 31;
  CHECK_THROWS_AS(spec.validate(), InputError);
  spec = SprRunSpec{};
  spec.tau = -1.0;
  CHECK_THROWS_AS(spec.validate(), InputError);
}

TEST_CASE("desk-scale run") {
  SprRunSpec spec;  // n = m = 30, K = 200, T = 2000, p = 24
  const SprRunResult res = cmd_run_spr(spec);
  const Trajectory& t = res.trajectory;
  std::ostringstream csv;
  write_trajectory_csv(csv, t);
  std::istringstream in(csv.str());
  const auto file = read_trajectory_csv(in, "run.csv");
  REQUIRE(file.rows.size() == t.records.size());
  const std::size_t pre = t.pre_stop_count();
  for (std::size_t k = 0; k < pre; ++k) CHECK(file.rows[k].g <= 0.0);
  CHECK(t.subgradient_evaluations == t.completed_outer() * spec.inner_t);
  CHECK(t.oracle_calls == 2 * t.subgradient_evaluations);

  std::ostringstream summary;
  write_run_summary(summary, res);
  CHECK(summary.str().find("subgradient_evaluations: " +
                           std::to_string(t.subgradient_evaluations)) != std::string::npos);
  CHECK(summary.str().find("stop_reason: ") == 0);
}

TEST_CASE("evaluation count at the published budget") {
  // 10^3 outer steps of 10^4 inner steps each on a cheap 1-D problem that
  // never triggers the stopping rule.
  ConstrainedProblem p;
  p.domain = BoxDomain::uniform(1, -1, 1);
  p.f = FunctionOracle(1, [](const Vector& x) {
    return Evaluation{x[0] * x[0], Vector::Constant(1, 2 * x[0])};
  });
  p.g_components = {FunctionOracle(1, [](const Vector&) {
    return Evaluation{-1.0, Vector::Zero(1)};
  })};
  p.M = 2.0;
  p.g_lb = -1.0;
  ProxConfig cfg;
  cfg.rho_hat = 2.0;
  cfg.K_max = 1000;
  cfg.T_override = 10000;
  cfg.halt_on_non_decrease = false;
  const Trajectory t = run(p, cfg, Vector::Constant(1, 0.5));
  CHECK(t.completed_outer() == 1000);
  CHECK(t.subgradient_evaluations == 10000000);
}

TEST_CASE("sweep shape and determinism") {
  SprRunSpec base;
  base.outer_k = 30;
  base.inner_t = 300;
  const auto rows = cmd_sweep_p(base, {24.0}, 1, 1);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].replicates == 1);
  CHECK((rows[0].diverged == 0 || rows[0].diverged == 1));
  CHECK(rows[0].lambda_min == rows[0].lambda_max);

  const auto a = cmd_sweep_p(base, {21.0, 24.0}, 3, 1);
  const auto b = cmd_sweep_p(base, {21.0, 24.0}, 3, 3);
  std::ostringstream sa, sb;
  write_sweep_csv(sa, a);
  write_sweep_csv(sb, b);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().rfind("p,lambda_mean,lambda_min,lambda_max,diverged,replicates\n", 0) == 0);

  CHECK_THROWS_AS(cmd_sweep_p(base, {}, 1, 1), InputError);
  CHECK_THROWS_AS(cmd_sweep_p(base, {24.0}, 0, 1), InputError);
}

TEST_CASE("initial point sampling") {
  SprRunSpec spec;
  const SprInstance inst = make_spr_instance(spec);
  const ConstrainedProblem p = to_problem(inst);
  const Vector x0 = sample_feasible_x0(p, 5);
  CHECK(p.constraint().value(x0) <= 0.0);
  CHECK(x0 == sample_feasible_x0(p, 5));
  // a zero budget cannot be met by a random Gaussian point
  const ConstrainedProblem tight = to_problem(with_budget(inst, 0.0));
  CHECK_THROWS_AS(sample_feasible_x0(tight, 5), RunError);
}

TEST_CASE("multiplier divergence only at budgets divisible by three") {
  SprRunSpec base;
  std::vector<double> grid;
  for (int p = 21; p <= 33; ++p) grid.push_back(p);
  const auto rows = cmd_sweep_p(base, grid, 30, 0);
  REQUIRE(rows.size() == grid.size());
  for (const auto& row : rows) {
    CAPTURE(row.p);
    CHECK(row.replicates == 30);
    if (static_cast<int>(row.p) % 3 != 0) CHECK(row.diverged == 0);
  }
}
