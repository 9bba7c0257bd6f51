#include "switchsde/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace switchsde {

AveragingResult averaging_condition(const StationaryDistribution& mu, const RegimeBounds& bounds) {
  if (mu.weights.size() != bounds.beta.size())
    raise(errc::length_mismatch, "mu and beta have different lengths");
  const double sum = mu.weights.dot(bounds.beta);
  return {sum, sum < 0.0};
}

Eigen::MatrixXd build_qp(const GeneratorMatrix& generator, const RegimeBounds& bounds, double p) {
  if (p < 0.0) raise(errc::invalid_argument, "moment order must be nonnegative");
  if (bounds.beta.size() != generator.size())
    raise(errc::length_mismatch, "beta length does not match the generator");
  Eigen::MatrixXd qp = generator.rates();
  qp.diagonal() += 0.5 * p * bounds.beta;
  return qp;
}

PerronResult perron_eta(const Eigen::MatrixXd& qp, long max_iterations,
                        double rayleigh_tolerance) {
  const int n = static_cast<int>(qp.rows());
  // Shift so B = Q_p + sI is nonnegative with positive diagonal: irreducible
  // and aperiodic, hence power iteration converges to the Perron pair.
  const double shift = (-qp.diagonal()).maxCoeff() + 1.0;
  Eigen::MatrixXd b = qp;
  b.diagonal().array() += shift;

  Eigen::VectorXd x = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  double rho = 0.0;
  long used = 0;
  bool converged = false;
  for (long it = 1; it <= max_iterations; ++it) {
    const Eigen::VectorXd bx = b * x;
    const double next = x.dot(bx) / x.squaredNorm();
    x = bx / bx.norm();
    used = it;
    if (std::abs(next - rho) < rayleigh_tolerance * std::max(1.0, std::abs(next)) && it > 1) {
      rho = next;
      converged = true;
      break;
    }
    rho = next;
  }
  if (!converged) raise(errc::no_convergence, "power iteration hit the iteration cap");

  // A couple of extra multiplications sharpen the eigenvector once rho has
  // settled, keeping the certificate residual well under tolerance.
  for (int extra = 0; extra < 8; ++extra) {
    Eigen::VectorXd bx = b * x;
    rho = x.dot(bx) / x.squaredNorm();
    x = bx / bx.norm();
  }

  PerronResult result;
  result.eta = shift - rho;
  result.xi = x / x.maxCoeff();
  result.iterations = used;
  if (result.xi.minCoeff() <= 0.0)
    raise(errc::no_convergence, "Perron vector not strictly positive");
  return result;
}

SpectralCertificate make_certificate(const GeneratorMatrix& generator, const RegimeBounds& bounds,
                                     double p) {
  SpectralCertificate cert;
  cert.p = p;
  cert.qp = build_qp(generator, bounds, p);
  const PerronResult perron = perron_eta(cert.qp);
  cert.eta = perron.eta;
  cert.xi = perron.xi;
  cert.xi_max = cert.xi.maxCoeff();
  cert.xi_min_inv = 1.0 / cert.xi.minCoeff();
  cert.q0 = generator.max_exit_rate();
  cert.beta0 = bounds.beta_max_abs();
  return cert;
}

double p0_threshold(const GeneratorMatrix& generator, const RegimeBounds& bounds) {
  if (bounds.beta.size() != generator.size())
    raise(errc::length_mismatch, "beta length does not match the generator");
  if (bounds.beta.maxCoeff() <= 0.0) return std::numeric_limits<double>::infinity();
  double p0 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < generator.size(); ++i)
    if (bounds.beta(i) > 0.0)
      p0 = std::min(p0, -2.0 * generator.rates()(i, i) / bounds.beta(i));
  return p0;
}

double alpha_additive(const RegimeBounds& bounds, const SpectralCertificate& cert) {
  const double p = cert.p;
  const double b0 = bounds.beta_max_abs();
  const double l2 = bounds.L * bounds.L;
  return p * (b0 + 4.0 * l2 * (3.0 + 4.0 * b0) +
              std::pow(4.0, 0.5 * (2.0 + p)) * b0 *
                  (std::pow(4.0, 0.5 * p) * std::pow(bounds.L, p) +
                   cert.q0 * cert.xi_max * cert.xi_min_inv));
}

StepsizeBound delta_max_additive(const RegimeBounds& bounds, const SpectralCertificate& cert,
                                 double alpha) {
  if (!(cert.eta > 0.0)) raise(errc::non_positive_eta, "eta_p must be positive");
  const double lipschitz_cap =
      bounds.L > 0.0 ? 1.0 / (16.0 * bounds.L * bounds.L) : std::numeric_limits<double>::infinity();
  const double spectral_cap = alpha > 0.0 ? std::pow(cert.eta / alpha, 2.0 / cert.p)
                                          : std::numeric_limits<double>::infinity();
  StepsizeBound bound;
  bound.kind = StepsizeBound::Kind::additive;
  bound.rate_constant = alpha;
  bound.p = cert.p;
  // The scheme is posed for stepsizes in (0, 1), so the bound never exceeds 1.
  bound.delta_max = std::min({lipschitz_cap, spectral_cap, 1.0});
  return bound;
}

bool condition_star6(const GeneratorMatrix& generator, const RegimeBounds& bounds) {
  if (bounds.beta.size() != generator.size())
    raise(errc::length_mismatch, "beta length does not match the generator");
  double lowest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < generator.size(); ++i)
    if (bounds.beta(i) > 0.0)
      lowest = std::min(lowest, -generator.rates()(i, i) / bounds.beta(i));
  return lowest > 1.0;  // vacuously true when no beta_i > 0
}

double beta_multiplicative(const GeneratorMatrix& generator, const RegimeBounds& bounds,
                           const SpectralCertificate& cert2) {
  if (!condition_star6(generator, bounds))
    raise(errc::star6_violated, "min over positive-beta states of -q_ii/beta_i must exceed 1");
  const double b0 = bounds.beta_max_abs();
  return ((1.0 + 12.0 * cert2.q0) * b0 + 8.0 * bounds.L * bounds.L * (5.0 + 6.0 * b0)) *
         cert2.xi_max * cert2.xi_min_inv;
}

StepsizeBound delta_max_multiplicative(const RegimeBounds& bounds,
                                       const SpectralCertificate& cert2, double beta) {
  if (!(cert2.eta > 0.0)) raise(errc::non_positive_eta, "eta_2 must be positive");
  const double lipschitz_cap =
      bounds.L > 0.0 ? 1.0 / (32.0 * bounds.L * bounds.L) : std::numeric_limits<double>::infinity();
  const double spectral_cap =
      beta > 0.0 ? (cert2.eta / beta) * (cert2.eta / beta) : std::numeric_limits<double>::infinity();
  StepsizeBound bound;
  bound.kind = StepsizeBound::Kind::multiplicative;
  bound.rate_constant = beta;
  bound.p = 2.0;
  bound.delta_max = std::min({lipschitz_cap, spectral_cap, 1.0});
  return bound;
}

SpectralReport certify_spectral(const GeneratorMatrix& generator, const RegimeBounds& bounds,
                                bool additive_noise) {
  SpectralReport report;
  const StationaryDistribution mu = stationary_distribution(generator);
  report.averaging = averaging_condition(mu, bounds);
  report.p0 = p0_threshold(generator, bounds);
  report.star6 = condition_star6(generator, bounds);

  if (report.averaging.holds && additive_noise) {
    const double p_cap = std::min(1.0, report.p0);
    for (double p : default_p_grid()) {
      if (!(p < p_cap)) continue;
      const SpectralCertificate cert = make_certificate(generator, bounds, p);
      GridPoint point;
      point.p = p;
      point.eta = cert.eta;
      if (cert.eta > 0.0) {
        point.alpha = alpha_additive(bounds, cert);
        const StepsizeBound bound = delta_max_additive(bounds, cert, point.alpha);
        point.delta_max = bound.delta_max;
        if (!report.additive || bound.delta_max > report.additive->delta_max) {
          report.additive = bound;
          report.best = cert;
        }
      }
      report.grid.push_back(point);
    }
  }

  if (report.star6) {
    const SpectralCertificate cert2 = make_certificate(generator, bounds, 2.0);
    if (cert2.eta > 0.0) {
      report.cert2 = cert2;
      report.beta_mult = beta_multiplicative(generator, bounds, cert2);
      report.multiplicative = delta_max_multiplicative(bounds, cert2, report.beta_mult);
    }
  }
  return report;
}

}  // namespace switchsde
