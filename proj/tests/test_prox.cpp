#include "oracles.hpp"

#include "proxswitch/harness.hpp"
#include "proxswitch/instances.hpp"
#include "proxswitch/prox.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace proxswitch;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

// f = |x|^2 on [-1, 1]^2 with a constraint that never binds.
ConstrainedProblem inactive_quadratic() {
  ConstrainedProblem p;
  p.domain = BoxDomain::uniform(2, -1, 1);
  p.f = FunctionOracle(2, [](const Vector& x) {
    return Evaluation{x.squaredNorm(), 2.0 * x};
  });
  p.g_components = {FunctionOracle(2, [](const Vector& x) {
    return Evaluation{-1.0, Vector::Zero(x.size())};
  })};
  p.rho = 0.0;
  p.M = 2.0 * std::sqrt(2.0);
  p.f_lb = 0.0;
  p.g_lb = -1.0;
  return p;
}

std::int64_t explicit_T_fj(double rho, double rho_hat, double eps, double M,
                           double g_lb, double D) {
  const double mu2 = (rho_hat - rho) * (rho_hat - rho);
  const double first = 96.0 * rho_hat * (2 * rho_hat - rho) *
                       (3 * M * M - 2 * rho_hat * g_lb) / (mu2 * eps * eps);
  const double second = std::sqrt(288.0 * std::pow(rho_hat, 3) *
                                  (2 * rho_hat - rho) * D * D / (mu2 * eps * eps));
  return static_cast<std::int64_t>(std::ceil(std::max(first, second)));
}

struct SprRun {
  ConstrainedProblem problem;
  Trajectory trajectory;
};

SprRun spr_run(std::uint64_t seed, double p, std::int64_t K, std::int64_t T) {
  SprRunSpec spec;
  spec.seed = seed;
  spec.p = p;
  spec.outer_k = K;
  spec.inner_t = T;
  const SprInstance inst = make_spr_instance(spec);
  SprRun out{to_problem(inst), {}};
  out.trajectory = run(out.problem, spec.prox_config(),
                       sample_feasible_x0(out.problem, 1000 + seed));
  return out;
}

}  // namespace

TEST_CASE("subproblem construction") {
  ConstrainedProblem p;
  p.domain = BoxDomain::free(1);
  p.f = FunctionOracle(1, [](const Vector& x) {
    return Evaluation{std::abs(x[0]), Vector::Constant(1, x[0] > 0 ? 1.0 : (x[0] < 0 ? -1.0 : 0.0))};
  });
  p.g_components = {p.f};
  const auto [F, G] = build_subproblem(p, Vector::Zero(1), 2.0);
  CHECK(F.value(Vector::Constant(1, 3.0)) == doctest::Approx(12.0));
  CHECK(F(Vector::Constant(1, 3.0)).subgradient[0] == doctest::Approx(1.0 + 2.0 * 3.0));

  const Vector c = Vector::Constant(1, -0.7);
  const auto [Fc, Gc] = build_subproblem(p, c, 5.0);
  CHECK(Fc.value(c) == p.f.value(c));
  CHECK(Fc(c).subgradient == p.f(c).subgradient);

  auto bounded = p;
  bounded.domain = BoxDomain::uniform(1, -1, 1);
  CHECK_THROWS_AS(build_subproblem(bounded, Vector::Constant(1, 2.0), 2.0), InputError);
}

TEST_CASE("subproblems are strongly convex on sparse phase retrieval") {
  const SprInstance inst = spr_generate(30, 30, 8, 24, 5);
  const ConstrainedProblem problem = to_problem(inst);
  std::mt19937_64 rng(8);
  const Vector center = oracle::uniform_in_box(rng, 30, -1, 1);
  const double rho_hat = 6.0;
  const auto [F, G] = build_subproblem(problem, center, rho_hat);
  const double mu = rho_hat - problem.rho;
  int violations = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const Vector a = oracle::uniform_in_box(rng, 30, -10, 10);
    const Vector b = oracle::uniform_in_box(rng, 30, -10, 10);
    const Vector mid = 0.5 * (a + b);
    const double gap = 0.125 * mu * (a - b).squaredNorm();
    if (F.value(mid) > 0.5 * (F.value(a) + F.value(b)) - gap + 1e-9) ++violations;
    if (G.value(mid) > 0.5 * (G.value(a) + G.value(b)) - gap + 1e-9) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("non-Lipschitz constants") {
  auto c = nonlipschitz_constants(1.0, 0.0, 6.0);
  CHECK(c.L0sq == 9.0);
  CHECK(c.L1 == 36.0);
  c = nonlipschitz_constants(7.0, -90.0, 6.0);
  CHECK(c.L0sq == doctest::Approx(9 * 49.0 + 3240.0));
  CHECK(c.L1 == 36.0);
  CHECK(nonlipschitz_constants(7.0, -90.0, 12.0).L1 == 2.0 * c.L1);
  CHECK_THROWS_AS(nonlipschitz_constants(0.0, -1.0, 6.0), InputError);
  CHECK_THROWS_AS(nonlipschitz_constants(1.0, 1.0, 6.0), InputError);
}

TEST_CASE("diameter bound") {
  CHECK(diameter_D(-90.0, 3.0, 6.0) == doctest::Approx(std::sqrt(240.0)));
  CHECK(diameter_D(-90.0, 3.0, 6.0) == doctest::Approx(15.4919).epsilon(1e-5));
  CHECK(diameter_D(0.0, 3.0, 6.0) == 0.0);
  CHECK(diameter_D(-360.0, 3.0, 6.0) == doctest::Approx(2.0 * diameter_D(-90.0, 3.0, 6.0)));
  CHECK_THROWS_AS(diameter_D(-1.0, 6.0, 6.0), InputError);
}

TEST_CASE("dual bound") {
  CHECK(dual_bound_B(1.0, 1.0, 0.0, 1.0) == 1.0);
  CHECK(dual_bound_B(10.0, 6.0, 15.4919, 2.0) == doctest::Approx(51.476).epsilon(1e-4));
  CHECK(dual_bound_B(10.0, 6.0, 15.4919, 1e9) < 1e-6);
  CHECK_THROWS_AS(dual_bound_B(1.0, 1.0, 1.0, 0.0), InputError);
  CHECK_THROWS_AS(dual_bound_B(1.0, 1.0, 1.0, -2.0), InputError);
}

TEST_CASE("Fritz-John inner parameters") {
  const double M = 200.0, g_lb = -24.0, rho = 3.0, rho_hat = 6.0, eps = 0.01;
  const auto L = nonlipschitz_constants(M, g_lb, rho_hat);
  const double D = diameter_D(g_lb, rho, rho_hat);
  const auto fj = params_fj(rho, rho_hat, eps, L.L0sq, L.L1, D);
  CHECK(fj.tau == doctest::Approx(0.0003 / 216.0));
  CHECK(fj.tau == doctest::Approx(1.3889e-6).epsilon(1e-4));
  // Same T through the explicit M / g_lb formula.
  CHECK(std::abs(fj.T - explicit_T_fj(rho, rho_hat, eps, M, g_lb, D)) <= 1);

  const auto doubled = params_fj(rho, rho_hat, 2 * eps, L.L0sq, L.L1, D);
  CHECK(doubled.tau == doctest::Approx(4 * fj.tau));
  CHECK(std::abs(doubled.T - explicit_T_fj(rho, rho_hat, 2 * eps, M, g_lb, D)) <= 1);
  CHECK(static_cast<double>(doubled.T) == doctest::Approx(fj.T / 4.0).epsilon(1e-6));

  const auto no_diam = params_fj(rho, rho_hat, eps, L.L0sq, L.L1, 0.0);
  const double first = 96.0 * rho_hat * (2 * rho_hat - rho) * (3 * M * M - 2 * rho_hat * g_lb) /
                       (9.0 * eps * eps);
  CHECK(std::abs(static_cast<double>(no_diam.T) - std::ceil(first)) <= 1.0);

  CHECK_THROWS_AS(params_fj(3.0, 3.0, eps, 1, 1, 1), InputError);
  CHECK_THROWS_AS(params_fj(0.5, 1.0, eps, 1, 1, 1), InputError);
  CHECK_THROWS_AS(params_fj(3.0, 6.0, 0.0, 1, 1, 1), InputError);
}

TEST_CASE("KKT inner parameters") {
  const double M = 10.0, g_lb = -90.0, rho = 3.0, rho_hat = 6.0, eps = 0.01;
  const auto L = nonlipschitz_constants(M, g_lb, rho_hat);
  const double D = diameter_D(g_lb, rho, rho_hat);
  const auto fj = params_fj(rho, rho_hat, eps, L.L0sq, L.L1, D);
  const auto same = params_kkt(rho, rho_hat, eps, L.L0sq, L.L1, D, 0.0);
  CHECK(same.tau == fj.tau);
  CHECK(same.T == fj.T);
  CHECK(params_kkt(rho, rho_hat, eps, L.L0sq, L.L1, D, 1.0).tau == doctest::Approx(fj.tau / 4));

  const double B = dual_bound_B(M, rho_hat, D, 2.0);
  const auto kkt = params_kkt(rho, rho_hat, eps, L.L0sq, L.L1, D, B);
  CHECK(kkt.tau == doctest::Approx(5.044e-10).epsilon(1e-3));
  const double mu2 = 9.0;
  const double first = 96.0 * rho_hat * (2 * rho_hat - rho) * (3 * M * M - 2 * rho_hat * g_lb) *
                       (1 + B) * (1 + B) / (mu2 * eps * eps);
  const double second = (1 + B) * std::sqrt(288.0 * std::pow(rho_hat, 3) * (2 * rho_hat - rho) *
                                            D * D / (mu2 * eps * eps));
  CHECK(std::abs(static_cast<double>(kkt.T) - std::ceil(std::max(first, second))) <= 1.0);
  CHECK_THROWS_AS(params_kkt(rho, rho_hat, eps, L.L0sq, L.L1, D, -1.0), InputError);
}

TEST_CASE("configuration checks") {
  const auto p = inactive_quadratic();
  ProxConfig cfg;
  cfg.rho_hat = 1.0;
  CHECK_THROWS_AS(cfg.validate(p), InputError);
  cfg = ProxConfig{};
  cfg.mode = Mode::KKT;
  CHECK_THROWS_AS(cfg.validate(p), InputError);
  cfg.sigma = 0.5;
  CHECK_NOTHROW(cfg.validate(p));
  cfg = ProxConfig{};
  cfg.T_override = 0;
  CHECK_THROWS_AS(cfg.validate(p), InputError);
  cfg = ProxConfig{};
  cfg.tau_override = 0.0;
  CHECK_THROWS_AS(cfg.validate(p), InputError);
  cfg = ProxConfig{};
  cfg.K_max = 0;
  CHECK_THROWS_AS(cfg.validate(p), InputError);
}

TEST_CASE("inner schedule follows the outer constants") {
  const auto p = inactive_quadratic();
  const SsmConfig c = inner_config(p, 6.0, InnerParams{1e-3, 77});
  CHECK(c.mu == 6.0);
  CHECK(c.L1 == 36.0);
  CHECK(c.T == 77);
  CHECK(c.tau == 1e-3);
  CHECK(step_size(0, c.mu, c.L1) == doctest::Approx(2.0 / (12.0 + 36.0 * 36.0 / 6.0)));

  ProxConfig cfg;
  cfg.rho_hat = 2.0;
  cfg.T_override = 123;
  const InnerParams ip = resolve_inner_params(p, cfg);
  CHECK(ip.T == 123);
  CHECK(ip.tau == doctest::Approx(2.0 * 1e-4 / (4.0 * 2.0 * 4.0)));
  cfg.tau_override = 0.5;
  CHECK(resolve_inner_params(p, cfg).tau == 0.5);
}

TEST_CASE("unconstrained-like run approaches the origin") {
  const auto p = inactive_quadratic();
  ProxConfig cfg;
  cfg.rho_hat = 2.0;
  cfg.epsilon = 1e-2;
  cfg.K_max = 60;
  cfg.T_override = 5000;
  const Trajectory t = run(p, cfg, vec({0.9, -0.6}));
  REQUIRE(t.records.size() >= 3);
  const auto& last = t.records[static_cast<std::size_t>(t.completed_outer())];
  CHECK(last.x.norm() < 0.05);
  CHECK(last.fj.residual <= cfg.epsilon);
  CHECK(last.kkt.residual <= 2.0 * last.x.norm() + 1e-2);
  for (std::size_t k = 1; k < t.pre_stop_count(); ++k) {
    CHECK(t.records[k].f < t.records[k - 1].f);
  }
}

TEST_CASE("an eps-stationary point appears within the outer bound") {
  auto p = inactive_quadratic();
  ProxConfig cfg;
  cfg.rho_hat = 2.0;
  cfg.epsilon = 0.5;
  cfg.K_max = 200;
  cfg.halt_on_non_decrease = false;
  const Vector x0 = vec({0.7, 0.7});
  const Trajectory t = run(p, cfg, x0);  // theoretical (tau, T)
  const double bound = 4 * cfg.rho_hat * cfg.rho_hat * (p.f.value(x0) - p.f_lb) /
                       ((cfg.rho_hat - p.rho) * cfg.epsilon * cfg.epsilon);
  std::optional<std::int64_t> first;
  for (const auto& r : t.records) {
    // gamma0 = 1 certificate: the constraint is inactive with zero slack.
    if (r.g <= 0 && dist_neg_normal_cone(p.domain, r.x, p.f(r.x).subgradient) <= cfg.epsilon) {
      first = r.k;
      break;
    }
  }
  REQUIRE(first.has_value());
  CHECK(static_cast<double>(*first) <= bound);
}

TEST_CASE("run preconditions") {
  auto p = inactive_quadratic();
  ProxConfig cfg;
  cfg.T_override = 10;
  CHECK_THROWS_AS(run(p, cfg, vec({2, 0})), InputError);
  p.g_components = {FunctionOracle(2, [](const Vector& x) {
    return Evaluation{x[0], (Vector(2) << 1.0, 0.0).finished()};
  })};
  CHECK_THROWS_AS(run(p, cfg, vec({0.5, 0})), PreconditionError);
}

TEST_CASE("an infeasible iterate stops the run even when continuing") {
  // Maximize x subject to x <= 0.5: a loose inner tolerance lets the output
  // cross the boundary.
  ConstrainedProblem p;
  p.domain = BoxDomain::uniform(1, -1, 1);
  p.f = FunctionOracle(1, [](const Vector& x) {
    return Evaluation{-x[0], Vector::Constant(1, -1.0)};
  });
  p.g_components = {FunctionOracle(1, [](const Vector& x) {
    return Evaluation{x[0] - 0.5, Vector::Constant(1, 1.0)};
  })};
  p.M = 1.0;
  p.f_lb = -1.0;
  p.g_lb = -1.5;
  ProxConfig cfg;
  cfg.rho_hat = 2.0;
  cfg.T_override = 200;
  cfg.tau_override = 0.2;
  cfg.K_max = 50;
  cfg.halt_on_non_decrease = false;
  const Trajectory t = run(p, cfg, Vector::Zero(1));
  CHECK(t.stop_reason == StopReason::Infeasible);
  CHECK(t.records.back().g > 0.0);
  CHECK(t.first_stop_k.has_value());
  for (std::size_t k = 0; k + 1 < t.records.size(); ++k) CHECK(t.records[k].g <= 0.0);
}

TEST_CASE("sparse phase retrieval runs keep feasibility and descend") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const SprRun r = spr_run(seed, 24.0, 200, 2000);
    const Trajectory& t = r.trajectory;
    CAPTURE(seed);
    CHECK(t.stop_reason != StopReason::None);
    const std::size_t pre = t.pre_stop_count();
    for (std::size_t k = 0; k < pre; ++k) {
      // recompute from the oracles rather than trusting the record
      const double g = r.problem.constraint().value(t.records[k].x);
      CHECK(g == t.records[k].g);
      CHECK(g <= 0.0);
      if (k > 0) CHECK(r.problem.f.value(t.records[k].x) < r.problem.f.value(t.records[k - 1].x));
    }
    // Inner outputs satisfy G_k <= tau, hence the safety bound on g.
    for (std::size_t k = 0; k + 1 < t.records.size(); ++k) {
      const double step = (t.records[k + 1].x - t.records[k].x).norm();
      CHECK(t.records[k + 1].g <= t.inner.tau - 0.5 * t.rho_hat * step * step + 1e-9);
      REQUIRE(t.records[k].step_norm.has_value());
      CHECK(*t.records[k].step_norm == doctest::Approx(step));
    }
    CHECK_FALSE(t.records.back().step_norm.has_value());
    CHECK(t.subgradient_evaluations == t.completed_outer() * 2000);
    CHECK(t.oracle_calls == 2 * t.subgradient_evaluations);
    for (std::size_t k = 0; k < t.records.size(); ++k) {
      CHECK(t.records[k].k == static_cast<std::int64_t>(k));
    }
  }
}

TEST_CASE("the stop rule matches the recorded values") {
  const SprRun r = spr_run(4, 24.0, 200, 2000);
  const Trajectory& t = r.trajectory;
  const auto& last = t.records.back();
  switch (t.stop_reason) {
    case StopReason::NonDecrease:
      CHECK(last.f >= t.records[t.records.size() - 2].f);
      break;
    case StopReason::Infeasible:
      CHECK(last.g > 0.0);
      break;
    case StopReason::Budget:
      CHECK(t.completed_outer() == 200);
      break;
    case StopReason::None:
      FAIL("no stop reason recorded");
  }
  if (t.stop_reason != StopReason::Budget) {
    CHECK(t.first_stop_k == std::optional<std::int64_t>(t.completed_outer()));
    CHECK(t.first_stop_reason == t.stop_reason);
  }
}

TEST_CASE("refined point stays near a converged iterate") {
  SprRunSpec spec;
  spec.seed = 3;
  spec.tau = 1e-2;
  const SprRunResult res = cmd_run_spr(spec);
  const Vector& x_final = res.trajectory.last_feasible().x;
  const double bound = std::sqrt(2 * *spec.tau / (spec.rho_hat - spec.rho)) +
                       spec.epsilon / spec.rho_hat;
  CHECK((res.refined.x_lo - x_final).norm() <= bound);
}

TEST_CASE("trajectory CSV layout") {
  const SprRun r = spr_run(2, 24.0, 20, 500);
  std::ostringstream out;
  write_trajectory_csv(out, r.trajectory);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "k,f,g,step_norm,fj_residual,kkt_residual,lambda_hat,gamma0_hat,comp_slack,inner_T,stop_reason");
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  REQUIRE(rows.size() == r.trajectory.records.size());
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    CHECK(rows[i].back() == ',');  // empty stop_reason
  }
  const std::string reason(to_string(r.trajectory.stop_reason));
  CHECK(rows.back().substr(rows.back().size() - reason.size()) == reason);
  // f on the first row round-trips exactly
  const double f0 = std::stod(rows[0].substr(rows[0].find(',') + 1));
  CHECK(f0 == r.trajectory.records[0].f);
}
