#include "switchsde/em.hpp"

#include <cmath>

#include "switchsde/rng.hpp"

namespace switchsde {

void SimulationConfig::check(const RegimeModel& model) const {
  if (!(delta > 0.0 && delta < 1.0))
    raise(errc::invalid_argument, "stepsize must lie in (0, 1)");
  if (steps < 1) raise(errc::invalid_argument, "need at least one step");
  if (x0.size() != model.dim) raise(errc::invalid_argument, "x0 has wrong dimension");
  if (i0 < 0 || i0 >= model.n_regimes) raise(errc::invalid_argument, "initial regime out of range");
  if (record_stride < 1) raise(errc::invalid_argument, "record stride must be positive");
}

Eigen::VectorXd em_step(const RegimeModel& model, const Eigen::VectorXd& x, int regime,
                        double delta, const Eigen::VectorXd& brownian_increment) {
  Eigen::VectorXd next =
      x + model.drift(x, regime) * delta + model.diffusion(x, regime) * brownian_increment;
  if (!next.allFinite()) raise(errc::non_finite_state, "state became non-finite");
  return next;
}

Eigen::VectorXd brownian_increment(std::uint64_t seed, std::uint64_t trajectory, long step,
                                   int wiener_dim, double delta) {
  Eigen::VectorXd dw(wiener_dim);
  const double scale = std::sqrt(delta);
  for (int c = 0; c < wiener_dim; ++c)
    dw(c) = scale * rng::normal_at(seed, rng::kPurposeBrownian, trajectory,
                                   static_cast<std::uint64_t>(step), static_cast<std::uint32_t>(c));
  return dw;
}

void run_scheme(const RegimeModel& model, const GeneratorMatrix& generator,
                const SimulationConfig& cfg,
                const std::function<void(long, int, const Eigen::VectorXd&)>& on_grid) {
  cfg.check(model);
  // The chain is realized first, from its own stream: the noise driving the
  // motion never influences the switching and vice versa.
  const double horizon = cfg.delta * static_cast<double>(cfg.steps);
  const ChainPath path = simulate_chain(generator, cfg.i0, horizon, cfg.seed, cfg.stream);
  const std::vector<int> regimes = chain_at_grid(path, cfg.delta, cfg.steps);

  Eigen::VectorXd x = cfg.x0;
  on_grid(0, regimes[0], x);
  for (long k = 0; k < cfg.steps; ++k) {
    const Eigen::VectorXd dw =
        brownian_increment(cfg.seed, cfg.stream, k, model.wiener_dim, cfg.delta);
    try {
      x = em_step(model, x, regimes[static_cast<std::size_t>(k)], cfg.delta, dw);
    } catch (const Error& e) {
      if (e.code() == errc::non_finite_state)
        raise(errc::non_finite_state, "diverged at step " + std::to_string(k + 1), k + 1);
      throw;
    }
    on_grid(k + 1, regimes[static_cast<std::size_t>(k + 1)], x);
  }
}

Trajectory simulate(const RegimeModel& model, const GeneratorMatrix& generator,
                    const SimulationConfig& cfg) {
  Trajectory out;
  const long records = cfg.steps / cfg.record_stride + 1;
  out.time.reserve(static_cast<std::size_t>(records));
  out.state.reserve(static_cast<std::size_t>(records));
  out.values.resize(records, model.dim);
  long row = 0;
  run_scheme(model, generator, cfg, [&](long k, int regime, const Eigen::VectorXd& x) {
    if (k % cfg.record_stride != 0) return;
    out.time.push_back(static_cast<double>(k) * cfg.delta);
    out.state.push_back(regime);
    out.values.row(row++) = x.transpose();
  });
  out.values.conservativeResize(row, model.dim);
  return out;
}

std::pair<Trajectory, Trajectory> simulate_coupled(const RegimeModel& model,
                                                   const GeneratorMatrix& generator,
                                                   const SimulationConfig& cfg,
                                                   const Eigen::VectorXd& x0_second) {
  cfg.check(model);
  if (x0_second.size() != model.dim)
    raise(errc::invalid_argument, "second starting point has wrong dimension");

  const double horizon = cfg.delta * static_cast<double>(cfg.steps);
  const ChainPath path = simulate_chain(generator, cfg.i0, horizon, cfg.seed, cfg.stream);
  const std::vector<int> regimes = chain_at_grid(path, cfg.delta, cfg.steps);

  const long records = cfg.steps / cfg.record_stride + 1;
  Trajectory first, second;
  first.values.resize(records, model.dim);
  second.values.resize(records, model.dim);

  Eigen::VectorXd xa = cfg.x0;
  Eigen::VectorXd xb = x0_second;
  long row = 0;
  auto record = [&](long k) {
    if (k % cfg.record_stride != 0) return;
    const double t = static_cast<double>(k) * cfg.delta;
    first.time.push_back(t);
    first.state.push_back(regimes[static_cast<std::size_t>(k)]);
    first.values.row(row) = xa.transpose();
    second.time.push_back(t);
    second.state.push_back(regimes[static_cast<std::size_t>(k)]);
    second.values.row(row) = xb.transpose();
    ++row;
  };
  record(0);
  for (long k = 0; k < cfg.steps; ++k) {
    const int regime = regimes[static_cast<std::size_t>(k)];
    const Eigen::VectorXd dw =
        brownian_increment(cfg.seed, cfg.stream, k, model.wiener_dim, cfg.delta);
    xa = em_step(model, xa, regime, cfg.delta, dw);
    xb = em_step(model, xb, regime, cfg.delta, dw);
    record(k + 1);
  }
  first.values.conservativeResize(row, model.dim);
  second.values.conservativeResize(row, model.dim);
  return {std::move(first), std::move(second)};
}

double BoundsReport::worst() const {
  return std::max({dissipativity_violation.maxCoeff(), pair_dissipativity_violation.maxCoeff(),
                   lipschitz_violation.maxCoeff()});
}

BoundsReport verify_bounds(const RegimeModel& model, int sample_count, double radius,
                           std::uint64_t seed) {
  if (sample_count < 1) raise(errc::invalid_argument, "need at least one sample");
  BoundsReport report;
  report.dissipativity_violation = Eigen::VectorXd::Zero(model.n_regimes);
  report.pair_dissipativity_violation = Eigen::VectorXd::Zero(model.n_regimes);
  report.lipschitz_violation = Eigen::VectorXd::Zero(model.n_regimes);

  rng::Stream draws(seed, rng::kPurposeGeneric);
  auto sample_point = [&]() {
    Eigen::VectorXd x(model.dim);
    for (int c = 0; c < model.dim; ++c) x(c) = (2.0 * draws.next_unit() - 1.0) * radius;
    return x;
  };

  for (int i = 0; i < model.n_regimes; ++i) {
    for (int s = 0; s < sample_count; ++s) {
      const Eigen::VectorXd x = sample_point();
      const Eigen::VectorXd y = sample_point();
      const Eigen::VectorXd bx = model.drift(x, i);
      const Eigen::VectorXd by = model.drift(y, i);
      const Eigen::MatrixXd sx = model.diffusion(x, i);
      const Eigen::MatrixXd sy = model.diffusion(y, i);

      const double one_sided = 2.0 * x.dot(bx) + sx.squaredNorm() -
                               (model.bounds.c0 + model.bounds.beta(i) * x.squaredNorm());
      const double pair = 2.0 * (x - y).dot(bx - by) + (sx - sy).squaredNorm() -
                          model.bounds.beta(i) * (x - y).squaredNorm();
      const double lip =
          (bx - by).norm() + (sx - sy).norm() - model.bounds.L * (x - y).norm();

      report.dissipativity_violation(i) = std::max(report.dissipativity_violation(i), one_sided);
      report.pair_dissipativity_violation(i) =
          std::max(report.pair_dissipativity_violation(i), pair);
      report.lipschitz_violation(i) = std::max(report.lipschitz_violation(i), lip);
    }
  }
  return report;
}

RegimeModel make_scalar_linear(std::string name, const Eigen::VectorXd& alpha,
                               const Eigen::VectorXd& sigma, NoiseKind kind) {
  RegimeModel model;
  model.name = std::move(name);
  model.dim = 1;
  model.wiener_dim = 1;
  model.n_regimes = static_cast<int>(alpha.size());
  model.kind = kind;
  model.drift = [alpha](const Eigen::VectorXd& x, int i) {
    return Eigen::VectorXd::Constant(1, alpha(i) * x(0));
  };
  if (kind == NoiseKind::additive) {
    model.diffusion = [sigma](const Eigen::VectorXd&, int i) {
      return Eigen::MatrixXd::Constant(1, 1, sigma(i));
    };
    model.bounds.beta = 2.0 * alpha;
    model.bounds.c0 = sigma.cwiseAbs2().maxCoeff();
    model.bounds.L = alpha.cwiseAbs().maxCoeff();
    model.bounds.L0 = sigma.cwiseAbs().maxCoeff();
  } else {
    model.diffusion = [sigma](const Eigen::VectorXd& x, int i) {
      return Eigen::MatrixXd::Constant(1, 1, sigma(i) * x(0));
    };
    model.bounds.beta = 2.0 * alpha + sigma.cwiseAbs2();
    model.bounds.c0 = 0.0;
    model.bounds.L = (alpha.cwiseAbs() + sigma.cwiseAbs()).maxCoeff();
    model.bounds.L0 = 0.0;
  }
  return model;
}

BuiltinModel make_switching_ou(double gamma, double sigma0, double sigma1) {
  if (!(gamma > 0.0)) raise(errc::parameter_out_of_range, "gamma must be positive");
  Eigen::VectorXd alpha(2), sigma(2);
  alpha << 1.0, -0.5;
  sigma << sigma0, sigma1;
  Eigen::MatrixXd rates(2, 2);
  rates << -4.0, 4.0, gamma, -gamma;
  return {make_scalar_linear("switching_ou", alpha, sigma, NoiseKind::additive),
          GeneratorMatrix::validate(rates)};
}

BuiltinModel make_switching_linear3(double nu) {
  if (nu < 0.0) raise(errc::parameter_out_of_range, "nu must be nonnegative");
  Eigen::VectorXd alpha(3), sigma(3);
  alpha << 0.5, -2.0, -3.0;
  sigma << 1.0 / 3.0, 2.0, 1.0;
  Eigen::MatrixXd rates(3, 3);
  rates << -(3.0 + nu), nu, 3.0, 1.0, -3.0, 2.0, 1.0, 2.0, -3.0;
  return {make_scalar_linear("switching_linear3", alpha, sigma, NoiseKind::multiplicative),
          GeneratorMatrix::validate(rates)};
}

BuiltinModel make_birth_death_linear(double a, double b, const Eigen::Vector3d& alpha,
                                     const Eigen::Vector3d& sigma) {
  if (!(a > 0.0 && b > 0.0)) raise(errc::parameter_out_of_range, "a and b must be positive");
  const Eigen::Vector3d c = 2.0 * alpha + sigma.cwiseAbs2();
  if (!(c(0) < 0.0)) raise(errc::parameter_out_of_range, "2 alpha_0 + sigma_0^2 must be negative");
  if (!(b + c(0) < 0.0)) raise(errc::parameter_out_of_range, "b + c0 must be negative");
  if (!(a - b - c(1) > 0.0)) raise(errc::parameter_out_of_range, "a - b - c1 must be positive");
  if (!(a - c(2) > 0.0)) raise(errc::parameter_out_of_range, "a - c2 must be positive");
  Eigen::MatrixXd rates(3, 3);
  rates << -b, b, 0.0, 2.0 * a, -2.0 * (a + b), 2.0 * b, 0.0, 3.0 * a, -3.0 * a;
  return {make_scalar_linear("birth_death_linear", alpha, sigma, NoiseKind::multiplicative),
          GeneratorMatrix::validate(rates)};
}

RegimeModel frozen_regime(const RegimeModel& model, int regime) {
  if (regime < 0 || regime >= model.n_regimes)
    raise(errc::invalid_argument, "regime out of range");
  RegimeModel frozen = model;
  frozen.name = model.name + "_frozen";
  const auto drift = model.drift;
  const auto diffusion = model.diffusion;
  frozen.drift = [drift, regime](const Eigen::VectorXd& x, int) { return drift(x, regime); };
  frozen.diffusion = [diffusion, regime](const Eigen::VectorXd& x, int) {
    return diffusion(x, regime);
  };
  frozen.bounds.beta = Eigen::VectorXd::Constant(model.n_regimes, model.bounds.beta(regime));
  return frozen;
}

}  // namespace switchsde
