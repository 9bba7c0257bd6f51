#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "switchsde/errors.hpp"

namespace switchsde {

// Tolerances used by validation and analysis routines.  The CLI exposes two
// profiles; everything downstream takes the struct, never bare literals.
struct ToleranceProfile {
  double row_sum = 1e-12;
  double detailed_balance = 1e-10;
  double stationary_residual = 1e-10;
  double eigen_residual = 1e-10;

  static ToleranceProfile defaults() { return {}; }
  static ToleranceProfile strict() { return {1e-13, 1e-12, 1e-11, 1e-11}; }
};

// Conservative irreducible Q-matrix of the switching chain.  Construct via
// validate(); all analysis code assumes the invariants hold.
class GeneratorMatrix {
 public:
  static GeneratorMatrix validate(const Eigen::MatrixXd& raw,
                                  const ToleranceProfile& tol = ToleranceProfile::defaults());

  const Eigen::MatrixXd& rates() const { return rates_; }
  int size() const { return static_cast<int>(rates_.rows()); }

  // q_0 = max_i(-q_ii), the largest exit rate.
  double max_exit_rate() const { return (-rates_.diagonal()).maxCoeff(); }

 private:
  explicit GeneratorMatrix(Eigen::MatrixXd rates) : rates_(std::move(rates)) {}
  Eigen::MatrixXd rates_;
};

struct StationaryDistribution {
  Eigen::VectorXd weights;  // strictly positive, sums to one
};

StationaryDistribution stationary_distribution(const GeneratorMatrix& generator);

bool is_reversible(const GeneratorMatrix& generator, const StationaryDistribution& mu,
                   double tolerance = 1e-10);

// Exact event-driven chain realization: exponential holding times and
// jump probabilities q_ij / (-q_ii).  Right-continuous step function.
struct ChainPath {
  int initial_state = 0;
  double horizon = 0.0;
  std::vector<double> jump_times;   // strictly increasing, within (0, horizon]
  std::vector<int> states_after;    // state entered at each jump time

  int state_at(double t) const;
};

ChainPath simulate_chain(const GeneratorMatrix& generator, int initial_state, double horizon,
                         std::uint64_t seed, std::uint64_t stream = 0);

// States at times k*delta, k = 0..steps.  The value at a gridpoint is the
// state right after the last jump at or before it.
std::vector<int> chain_at_grid(const ChainPath& path, double delta, long steps);

struct SurvivalCurve {
  std::vector<double> time;
  std::vector<double> survival;  // empirical P(tau > t)
};

// Meeting-time tail for two independent chains started in distinct states.
SurvivalCurve coupling_tail(const GeneratorMatrix& generator, int state_a, int state_b,
                            double horizon, int n_paths, std::uint64_t seed,
                            int grid_points = 64);

}  // namespace switchsde
