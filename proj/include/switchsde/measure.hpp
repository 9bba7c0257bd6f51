#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "switchsde/em.hpp"
#include "switchsde/generator.hpp"

namespace switchsde {

// Weighted samples on R^n x S.  Empty `weights` means uniform.
struct EmpiricalMeasure {
  Eigen::MatrixXd points;   // one sample per row
  std::vector<int> states;
  Eigen::VectorXd weights;

  long size() const { return points.rows(); }
  bool uniform() const { return weights.size() == 0; }
  void check() const;
};

// d((x,i),(y,j)) = |x - y| + 1_{i != j}, raised to the power p in (0, 1].
// The transport functional below carries no outer 1/p root.
double hybrid_distance(const Eigen::VectorXd& x, int state_x, const Eigen::VectorXd& y,
                       int state_y, double p);

// Exact discrete optimal transport under the hybrid cost: equal-size uniform
// supports go through the assignment solver, anything else through the
// transportation solver.
double wasserstein_p(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p);

// Time-average sampling along one trajectory: drop `burn_in` gridpoints, then
// keep every `thin`-th point until `n_samples` are collected.
EmpiricalMeasure estimate_invariant(const RegimeModel& model, const GeneratorMatrix& generator,
                                    const SimulationConfig& cfg, long burn_in, long thin,
                                    long n_samples);

struct ContractionResult {
  std::vector<double> time;       // recorded gridpoint times
  std::vector<double> log_mean;   // log of the ensemble mean of |dY|^p
  double slope = 0.0;             // least-squares decay rate over the window
  double slope_ci_low = 0.0;      // bootstrap 95% interval over paths
  double slope_ci_high = 0.0;
  long window = 0;                // points with mean above the numeric floor
};

// Synchronous-coupling decay experiment; the fitted slope estimates the
// contraction rate of E|Y^x - Y^y|^p.
ContractionResult contraction_experiment(const RegimeModel& model,
                                         const GeneratorMatrix& generator,
                                         const SimulationConfig& cfg, const Eigen::VectorXd& x0,
                                         const Eigen::VectorXd& y0, double p, int n_paths,
                                         int bootstrap_rounds = 200);

struct StudyBudget {
  long n_samples = 20000;     // per-run sample count (matched across deltas)
  int parents = 4;            // independent runs per delta; replicates pair them up
  int subsample = 1000;       // matched subsample size per distance evaluation
  int replicates = 8;         // distance replicates per delta
  double burn_in_fraction = 0.2;
  long thin = 10;
  int bootstrap_rounds = 1000;
};

struct StudyRow {
  double delta = 0.0;
  double distance = 0.0;       // median over replicates (robust to tail excursions)
  double std_error = 0.0;      // bootstrap scatter of that median
  long n_samples = 0;
  std::uint64_t seed = 0;
};

struct StudyResult {
  std::vector<StudyRow> rows;       // one per delta, in input order
  double reference_delta = 0.0;
  double slope = 0.0;               // log-log fit of distance against delta
  double slope_ci_low = 0.0;
  double slope_ci_high = 0.0;
  double noise_floor = 0.0;         // same-delta distance between independent runs
  double noise_floor_se = 0.0;
  bool non_increasing_within_se = false;
  bool all_below_floor = false;        // raw comparison against the floor
  bool all_at_floor_within_2se = false;  // indistinguishable from the floor
};

// Self-convergence study against a fine-delta reference (the true invariant
// measure is unavailable; the reference is a stand-in, not ground truth).
StudyResult convergence_study(const RegimeModel& model, const GeneratorMatrix& generator,
                              const std::vector<double>& deltas, double reference_delta, double p,
                              const StudyBudget& budget, const Eigen::VectorXd& x0, int i0,
                              std::uint64_t seed);

}  // namespace switchsde
