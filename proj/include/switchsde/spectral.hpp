#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <vector>

#include "switchsde/generator.hpp"

namespace switchsde {

// Per-regime dissipativity and Lipschitz constants declared for a model:
//   2<x, b(x,i)> + |sigma(x,i)|^2          <= c0 + beta_i |x|^2
//   2<x-y, b(x,i)-b(y,i)> + |dsigma|^2     <= beta_i |x-y|^2
//   |b(x,i)-b(y,i)| + |sigma(x,i)-sigma(y,i)| <= L |x-y|
//   |b(x,i)| + |sigma(x,i)|                <= L0 + L |x|
struct RegimeBounds {
  Eigen::VectorXd beta;
  double c0 = 0.0;
  double L = 0.0;
  double L0 = 0.0;

  // beta_0 = max_i |beta_i|
  double beta_max_abs() const { return beta.cwiseAbs().maxCoeff(); }
};

struct AveragingResult {
  double sum = 0.0;  // sum_i mu_i beta_i
  bool holds = false;  // strict: sum < 0
};

AveragingResult averaging_condition(const StationaryDistribution& mu, const RegimeBounds& bounds);

// Q_p = Q + (p/2) diag(beta)
Eigen::MatrixXd build_qp(const GeneratorMatrix& generator, const RegimeBounds& bounds, double p);

struct PerronResult {
  double eta = 0.0;       // -(spectral abscissa of Q_p)
  Eigen::VectorXd xi;     // positive eigenvector, max entry = 1
  long iterations = 0;
};

// Perron root of the shifted nonnegative matrix Q_p + sI via power iteration;
// requires nonnegative off-diagonals and an irreducible pattern.
PerronResult perron_eta(const Eigen::MatrixXd& qp, long max_iterations = 100000,
                        double rayleigh_tolerance = 1e-13);

// Certificate for one moment order p.
struct SpectralCertificate {
  double p = 0.0;
  Eigen::MatrixXd qp;
  double eta = 0.0;
  Eigen::VectorXd xi;
  double xi_max = 0.0;      // max_i xi_i
  double xi_min_inv = 0.0;  // (min_i xi_i)^{-1}
  double q0 = 0.0;          // max_i(-q_ii)
  double beta0 = 0.0;       // max_i |beta_i|
};

SpectralCertificate make_certificate(const GeneratorMatrix& generator, const RegimeBounds& bounds,
                                     double p);

// Largest admissible moment order: +inf when all beta_i <= 0, otherwise
// min over {i : beta_i > 0} of -2 q_ii / beta_i.  Meaningful only once the
// averaging condition holds.
double p0_threshold(const GeneratorMatrix& generator, const RegimeBounds& bounds);

// alpha = p { beta0 + 4 L^2 (3 + 4 beta0)
//             + 4^{(2+p)/2} beta0 (4^{p/2} L^p + q0 xi_max xi_min_inv) }
double alpha_additive(const RegimeBounds& bounds, const SpectralCertificate& cert);

struct StepsizeBound {
  enum class Kind { additive, multiplicative, reversible, partition };
  Kind kind = Kind::additive;
  double rate_constant = 0.0;  // alpha, beta or kappa
  double delta_max = 0.0;
  double p = 0.0;
};

// delta < (1/(16 L^2)) ^ (eta_p / alpha)^{2/p}, additionally capped at 1.
StepsizeBound delta_max_additive(const RegimeBounds& bounds, const SpectralCertificate& cert,
                                 double alpha);

// min over {i : beta_i > 0} of -q_ii / beta_i exceeds 1 (vacuously true when
// no beta_i is positive).
bool condition_star6(const GeneratorMatrix& generator, const RegimeBounds& bounds);

// beta = {(1 + 12 q0) beta0 + 8 L^2 (5 + 6 beta0)} xi_max xi_min_inv at p = 2.
double beta_multiplicative(const GeneratorMatrix& generator, const RegimeBounds& bounds,
                           const SpectralCertificate& cert2);

// delta < (1/(32 L^2)) ^ (eta_2 / beta)^2, capped at 1.
StepsizeBound delta_max_multiplicative(const RegimeBounds& bounds,
                                       const SpectralCertificate& cert2, double beta);

// Grid search over moment orders: the statements hold for any p in
// (0, 1 ^ p0) but leave the choice open, so the pipeline scans a fixed grid
// and keeps the p with the largest admissible stepsize.
inline const std::vector<double>& default_p_grid() {
  static const std::vector<double> grid = {0.1, 0.25, 0.5, 0.75, 0.9};
  return grid;
}

struct GridPoint {
  double p = 0.0;
  double eta = 0.0;
  double alpha = 0.0;
  double delta_max = 0.0;
};

struct SpectralReport {
  AveragingResult averaging;
  double p0 = std::numeric_limits<double>::infinity();
  bool star6 = false;
  std::vector<GridPoint> grid;                    // additive scan, empty if inapplicable
  std::optional<SpectralCertificate> best;        // certificate at the best grid p
  std::optional<StepsizeBound> additive;          // bound at the best grid p
  std::optional<SpectralCertificate> cert2;       // p = 2 certificate when eta_2 > 0
  double beta_mult = std::numeric_limits<double>::quiet_NaN();
  std::optional<StepsizeBound> multiplicative;
};

// Full Perron pipeline for a model with declared bounds.  `additive_noise`
// selects whether the additive-noise bound applies.
SpectralReport certify_spectral(const GeneratorMatrix& generator, const RegimeBounds& bounds,
                                bool additive_noise);

}  // namespace switchsde
