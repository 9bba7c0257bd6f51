#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>

#include "switchsde/generator.hpp"
#include "switchsde/spectral.hpp"

namespace switchsde {

enum class NoiseKind { additive, multiplicative };

// Per-regime drift/diffusion with declared dissipativity constants.  The
// callables must be reentrant; ensembles evaluate them concurrently.
struct RegimeModel {
  std::string name;
  int dim = 1;
  int wiener_dim = 1;
  int n_regimes = 0;
  NoiseKind kind = NoiseKind::additive;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, int)> drift;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, int)> diffusion;
  RegimeBounds bounds;
};

struct SimulationConfig {
  double delta = 0.01;        // in (0, 1)
  long steps = 1;
  Eigen::VectorXd x0;
  int i0 = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;   // trajectory id within an ensemble
  long record_stride = 1;

  void check(const RegimeModel& model) const;
};

struct Trajectory {
  std::vector<double> time;
  std::vector<int> state;
  Eigen::MatrixXd values;  // one row per recorded gridpoint
};

// One explicit step: x + b(x, i) delta + sigma(x, i) dW.  No stabilization;
// overflow surfaces as NonFiniteState.
Eigen::VectorXd em_step(const RegimeModel& model, const Eigen::VectorXd& x, int regime,
                        double delta, const Eigen::VectorXd& brownian_increment);

// Brownian increment for one step, Normal(0, delta I), addressed by
// (seed, trajectory, step, coordinate) so ensembles replay identically.
Eigen::VectorXd brownian_increment(std::uint64_t seed, std::uint64_t trajectory, long step,
                                   int wiener_dim, double delta);

Trajectory simulate(const RegimeModel& model, const GeneratorMatrix& generator,
                    const SimulationConfig& cfg);

// Synchronous coupling: both legs share the chain path and the Brownian
// increments, only the starting points differ.
std::pair<Trajectory, Trajectory> simulate_coupled(const RegimeModel& model,
                                                   const GeneratorMatrix& generator,
                                                   const SimulationConfig& cfg,
                                                   const Eigen::VectorXd& x0_second);

// Streaming core shared by the trajectory and measure layers; the callback
// receives (step index, state, value) at every gridpoint including step 0.
void run_scheme(const RegimeModel& model, const GeneratorMatrix& generator,
                const SimulationConfig& cfg,
                const std::function<void(long, int, const Eigen::VectorXd&)>& on_grid);

// Spot-check of the declared constants on random points in a ball; reports
// the largest observed violation per inequality (zero means none seen).
struct BoundsReport {
  Eigen::VectorXd dissipativity_violation;        // per regime, vs c0 + beta_i |x|^2
  Eigen::VectorXd pair_dissipativity_violation;   // per regime, vs beta_i |x-y|^2
  Eigen::VectorXd lipschitz_violation;            // per regime, vs L |x-y|
  double worst() const;
};

BoundsReport verify_bounds(const RegimeModel& model, int sample_count, double radius,
                           std::uint64_t seed);

// Built-in scalar linear models with exact declared constants.
struct BuiltinModel {
  RegimeModel model;
  GeneratorMatrix generator;
};

// Scalar linear model drift alpha_i x, noise sigma_i (additive) or
// sigma_i x (multiplicative), with the exact declared constants.
RegimeModel make_scalar_linear(std::string name, const Eigen::VectorXd& alpha,
                               const Eigen::VectorXd& sigma, NoiseKind kind);

// Two-regime Ornstein-Uhlenbeck with switching: drift alpha_i x with
// alpha = (1, -1/2), constant noise (sigma0, sigma1), switching rates
// 4 (out of regime 0) and gamma (out of regime 1).
BuiltinModel make_switching_ou(double gamma, double sigma0 = 1.0, double sigma1 = 1.0);

// Three-regime geometric model: drift alpha_i x, noise sigma_i x with
// alpha = (1/2, -2, -3), sigma = (1/3, 2, 1); nu >= 0 adds a direct
// 1 -> 2 transition channel.
BuiltinModel make_switching_linear3(double nu);

// Birth-death three-state chain with rates built from (a, b) and geometric
// regimes alpha_i x dt + sigma_i x dW; requires the dissipativity pattern
// b + c0 < 0, a - b - c1 > 0, a - c2 > 0 where c_i = 2 alpha_i + sigma_i^2.
BuiltinModel make_birth_death_linear(double a, double b, const Eigen::Vector3d& alpha,
                                     const Eigen::Vector3d& sigma);

// Same dynamics in every regime, frozen to the given one; the chain still
// runs but no longer affects the motion.
RegimeModel frozen_regime(const RegimeModel& model, int regime);

}  // namespace switchsde
