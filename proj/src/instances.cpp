#include "proxswitch/instances.hpp"

#include "proxswitch/kernels.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>

namespace proxswitch {

double scad(double u) {
  const double a = std::abs(u);
  if (a <= 1.0) return 2.0 * a;
  if (a <= 2.0) return -a * a + 4.0 * a - 1.0;
  return 3.0;
}

double scad_grad(double u) {
  const double a = std::abs(u);
  double d = 0.0;
  if (a == 0.0) {
    return 0.0;
  } else if (a <= 1.0) {
    d = 2.0;
  } else if (a <= 2.0) {
    d = -2.0 * a + 4.0;
  }
  return u > 0.0 ? d : -d;
}

Evaluation scad_constraint_eval(const Vector& x, double p) {
  Evaluation e;
  e.subgradient.resize(x.size());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sum += scad(x[i]);
    e.subgradient[i] = scad_grad(x[i]);
  }
  e.value = sum - p;
  return e;
}

Evaluation spr_f_eval(const SprInstance& instance, const Vector& x) {
  if (x.size() != instance.n()) {
    throw InputError("spr_f_eval: dimension mismatch");
  }
  const Vector r = instance.A * x;
  const double inv_m = 1.0 / static_cast<double>(instance.m());
  Vector weights(r.size());
  double value = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double resid = r[i] * r[i] - instance.b_sq[i];
    value += std::abs(resid);
    const double s = resid > 0.0 ? 1.0 : (resid < 0.0 ? -1.0 : 0.0);
    weights[i] = 2.0 * s * r[i];
  }
  return {value * inv_m, inv_m * (instance.A.transpose() * weights)};
}

namespace {

ConstrainedProblem spr_problem(std::shared_ptr<const SprInstance> inst) {
  ConstrainedProblem problem;
  const auto n = inst->n();
  const double p = inst->p;
  problem.f = FunctionOracle(
      n, [inst](const Vector& x) { return spr_f_eval(*inst, x); });
  problem.g_components.emplace_back(
      n, [p](const Vector& x) { return scad_constraint_eval(x, p); });
  problem.domain = inst->box;
  problem.rho = inst->rho;
  problem.M = inst->M_estimate > 0.0 ? inst->M_estimate : 1.0;
  problem.f_lb = 0.0;
  problem.g_lb = -p;
  return problem;
}

}  // namespace

ConstrainedProblem to_problem(const SprInstance& instance) {
  return spr_problem(std::make_shared<const SprInstance>(instance));
}

double estimate_M(const SprInstance& instance, std::uint64_t seed,
                  int samples) {
  if (!instance.box.bounded()) {
    throw InputError("estimate_M: requires a bounded box");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto n = instance.n();
  Matrix points(n, samples);
  for (int j = 0; j < samples; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double lo = instance.box.lower()[i];
      const double hi = instance.box.upper()[i];
      points(i, j) = lo + (hi - lo) * unit(rng);
    }
  }
  const ConstrainedProblem problem = to_problem(instance);
  const double f_norm =
      kernels::max_subgradient_norm_parallel(problem.f, points);
  const double g_norm =
      kernels::max_subgradient_norm_parallel(problem.g_components[0], points);
  return kMEstimateInflation * std::max(f_norm, g_norm);
}

SprInstance spr_generate(Eigen::Index n, Eigen::Index m, Eigen::Index nnz,
                         double p, std::uint64_t seed) {
  if (n < 1 || m < 1) throw InputError("spr_generate: n and m must be >= 1");
  if (nnz < 0 || nnz > n) throw InputError("spr_generate: need 0 <= nnz <= n");
  if (!(p >= 0.0) || !std::isfinite(p)) {
    throw InputError("spr_generate: p must be finite and nonnegative");
  }
  SprInstance inst;
  inst.seed = seed;
  inst.p = p;
  inst.nnz = nnz;
  inst.box = BoxDomain::uniform(n, -10.0, 10.0);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> magnitude(5.0, 10.0);
  std::bernoulli_distribution coin(0.5);

  inst.A.resize(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) inst.A(i, j) = normal(rng);
  }
  std::vector<Eigen::Index> positions(static_cast<std::size_t>(n));
  std::iota(positions.begin(), positions.end(), Eigen::Index{0});
  std::shuffle(positions.begin(), positions.end(), rng);
  inst.x_star = Vector::Zero(n);
  for (Eigen::Index k = 0; k < nnz; ++k) {
    const double v = magnitude(rng);
    inst.x_star[positions[static_cast<std::size_t>(k)]] = coin(rng) ? v : -v;
  }
  inst.eta.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) inst.eta[i] = normal(rng);
  inst.b_sq = (inst.A * inst.x_star).array().square().matrix() + inst.eta;
  inst.M_estimate = estimate_M(inst, kernels::derive_seed(seed, 0x4d));
  return inst;
}

SprInstance with_budget(const SprInstance& instance, double p) {
  if (!(p >= 0.0) || !std::isfinite(p)) {
    throw InputError("with_budget: p must be finite and nonnegative");
  }
  SprInstance out = instance;
  out.p = p;
  return out;
}

std::string to_json(const SprInstance& instance) {
  nlohmann::json j;
  j["n"] = instance.n();
  j["m"] = instance.m();
  j["p"] = instance.p;
  j["seed"] = instance.seed;
  j["rho"] = instance.rho;
  j["rho_hat"] = instance.rho_hat;
  j["M_estimate"] = instance.M_estimate;
  std::vector<double> a;
  a.reserve(static_cast<std::size_t>(instance.A.size()));
  for (Eigen::Index i = 0; i < instance.m(); ++i) {
    for (Eigen::Index k = 0; k < instance.n(); ++k) a.push_back(instance.A(i, k));
  }
  j["A"] = a;
  j["b_sq"] = std::vector<double>(instance.b_sq.begin(), instance.b_sq.end());
  j["x_star"] =
      std::vector<double>(instance.x_star.begin(), instance.x_star.end());
  return j.dump();
}

SprInstance spr_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("instance json: ") + e.what());
  }
  try {
    SprInstance inst;
    const auto n = j.at("n").get<Eigen::Index>();
    const auto m = j.at("m").get<Eigen::Index>();
    const auto a = j.at("A").get<std::vector<double>>();
    const auto b = j.at("b_sq").get<std::vector<double>>();
    const auto xs = j.at("x_star").get<std::vector<double>>();
    if (n < 1 || m < 1 || a.size() != static_cast<std::size_t>(n * m) ||
        b.size() != static_cast<std::size_t>(m) ||
        xs.size() != static_cast<std::size_t>(n)) {
      throw InputError("instance json: inconsistent shapes");
    }
    inst.A.resize(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index k = 0; k < n; ++k) {
        inst.A(i, k) = a[static_cast<std::size_t>(i * n + k)];
      }
    }
    inst.b_sq = Eigen::Map<const Vector>(b.data(), m);
    inst.x_star = Eigen::Map<const Vector>(xs.data(), n);
    inst.eta = inst.b_sq - (inst.A * inst.x_star).array().square().matrix();
    inst.nnz = (inst.x_star.array() != 0.0).count();
    inst.p = j.at("p").get<double>();
    inst.seed = j.at("seed").get<std::uint64_t>();
    inst.rho = j.at("rho").get<double>();
    inst.rho_hat = j.at("rho_hat").get<double>();
    inst.M_estimate = j.at("M_estimate").get<double>();
    inst.box = BoxDomain::uniform(n, -10.0, 10.0);
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("instance json: ") + e.what());
  }
}

ConvexTestInstance convex_test_instance(CatalogId id) {
  ConvexTestInstance c;
  switch (id) {
    case CatalogId::Quad1d: {
      // F = z^2, G = (z-1)^2 - 1 on [-1, 3]; feasible set [0, 2].
      c.name = "quad1d";
      c.F = FunctionOracle(1, [](const Vector& z) {
        return Evaluation{z[0] * z[0], Vector::Constant(1, 2.0 * z[0])};
      });
      c.G = FunctionOracle(1, [](const Vector& z) {
        const double d = z[0] - 1.0;
        return Evaluation{d * d - 1.0, Vector::Constant(1, 2.0 * d)};
      });
      c.domain = BoxDomain::uniform(1, -1.0, 3.0);
      c.z0 = Vector::Constant(1, 1.5);
      c.z_star = Vector::Zero(1);
      c.F_star = 0.0;
      c.mu = 2.0;
      // F-steps happen where G <= tau, i.e. |z - 1| <= sqrt(1 + tau), so
      // |F'| <= 2 (1 + sqrt(1.1)); G-steps are bounded by |G'| <= 4 on the box.
      const double bound = 2.0 * (1.0 + std::sqrt(1.0 + kCatalogMaxTau));
      c.L0sq = bound * bound;
      c.L1 = 0.0;
      break;
    }
    case CatalogId::Quad2d: {
      // F = |z - a|^2, G = |z|^2 + z_1 - 1 (disk centered (-1/2, 0), radius
      // sqrt(5/4)) on [-2, 2]^2 with a = (2, 1) outside the disk.
      c.name = "quad2d";
      const Vector a = (Vector(2) << 2.0, 1.0).finished();
      c.F = FunctionOracle(2, [a](const Vector& z) {
        return Evaluation{(z - a).squaredNorm(), 2.0 * (z - a)};
      });
      c.G = FunctionOracle(2, [](const Vector& z) {
        Vector grad = 2.0 * z;
        grad[0] += 1.0;
        return Evaluation{z.squaredNorm() + z[0] - 1.0, grad};
      });
      c.domain = BoxDomain::uniform(2, -2.0, 2.0);
      c.z0 = (Vector(2) << -0.5, 0.5).finished();
      const Vector center = (Vector(2) << -0.5, 0.0).finished();
      const double radius = std::sqrt(1.25);
      const Vector offset = a - center;
      c.z_star = center + radius * offset / offset.norm();
      c.F_star = std::pow(offset.norm() - radius, 2);
      c.mu = 2.0;
      // max over the box of |2(z - a)|^2 is at z = (-2, -2): 4 * 25; the
      // constraint gradient satisfies |2z + e_1|^2 <= 41 there.
      c.L0sq = 100.0;
      c.L1 = 0.0;
      break;
    }
    case CatalogId::Unbounded: {
      // F = |z - a|^2 / 2, G = (|z|^2 - 1) / 2 on R^2. Neither is Lipschitz,
      // but |grad F|^2 = 2 (F - F*) + 2 F* and |grad G|^2 = 2 (G - G*) + 1
      // with G* = 0, so (L0^2, L1) = (max(2 F*, 1), 2).
      c.name = "unbounded";
      const Vector a = (Vector(2) << 3.0, 4.0).finished();
      c.F = FunctionOracle(2, [a](const Vector& z) {
        return Evaluation{0.5 * (z - a).squaredNorm(), z - a};
      });
      c.G = FunctionOracle(2, [](const Vector& z) {
        return Evaluation{0.5 * (z.squaredNorm() - 1.0), z};
      });
      c.domain = BoxDomain::free(2);
      c.z0 = (Vector(2) << -0.5, 0.0).finished();
      c.z_star = a / a.norm();
      c.F_star = 0.5 * std::pow(a.norm() - 1.0, 2);
      c.mu = 1.0;
      c.L0sq = std::max(2.0 * c.F_star, 1.0);
      c.L1 = 2.0;
      break;
    }
  }
  return c;
}

CatalogId parse_catalog_id(std::string_view name) {
  if (name == "quad1d") return CatalogId::Quad1d;
  if (name == "quad2d") return CatalogId::Quad2d;
  if (name == "unbounded") return CatalogId::Unbounded;
  throw InputError("unknown catalog instance: " + std::string(name));
}

std::string_view catalog_name(CatalogId id) {
  switch (id) {
    case CatalogId::Quad1d:
      return "quad1d";
    case CatalogId::Quad2d:
      return "quad2d";
    case CatalogId::Unbounded:
      return "unbounded";
  }
  return "unknown";
}

}  // namespace proxswitch
