#include "switchsde/dirichlet.hpp"

#include <cmath>

namespace switchsde {

DirichletProblem DirichletProblem::make(const GeneratorMatrix& generator,
                                        const Eigen::VectorXd& beta, double balance_tolerance) {
  if (beta.size() != generator.size())
    raise(errc::length_mismatch, "beta length does not match the generator");
  StationaryDistribution pi = stationary_distribution(generator);
  if (!is_reversible(generator, pi, balance_tolerance))
    raise(errc::not_reversible, "detailed balance fails for this chain");
  return {generator, std::move(pi), beta};
}

double dirichlet_form(const DirichletProblem& problem, const Eigen::VectorXd& f) {
  const int n = problem.generator.size();
  if (f.size() != n) raise(errc::length_mismatch, "test function has wrong length");
  const auto& q = problem.generator.rates();
  const auto& pi = problem.pi.weights;
  double quad = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double diff = f(j) - f(i);
      quad += pi(i) * q(i, j) * diff * diff;
    }
  double penalty = 0.0;
  for (int i = 0; i < n; ++i) penalty += pi(i) * problem.beta(i) * f(i) * f(i);
  return 0.5 * quad - penalty;
}

EigenCertificate principal_eigenvalue(const DirichletProblem& problem) {
  const int n = problem.generator.size();
  Eigen::MatrixXd op = -problem.generator.rates();
  op.diagonal() -= problem.beta;

  const Eigen::VectorXd sqrt_pi = problem.pi.weights.cwiseSqrt();
  Eigen::MatrixXd sym(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sym(i, j) = sqrt_pi(i) * op(i, j) / sqrt_pi(j);
  sym = 0.5 * (sym + sym.transpose().eval());  // symmetric up to rounding

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success)
    raise(errc::no_convergence, "symmetric eigensolver failed");

  EigenCertificate cert;
  cert.lambda0 = solver.eigenvalues()(0);

  Eigen::VectorXd ground = solver.eigenvectors().col(0).cwiseQuotient(sqrt_pi);
  if (ground.sum() < 0.0) ground = -ground;
  cert.xi = ground / ground.maxCoeff();

  const double gap = n > 1 ? solver.eigenvalues()(1) - solver.eigenvalues()(0) : 1.0;
  cert.ground_positive = cert.xi.minCoeff() > 1e-12 && gap > 1e-12;
  cert.xi_max = cert.xi.maxCoeff();
  cert.xi_min_inv = cert.ground_positive ? 1.0 / cert.xi.minCoeff()
                                         : std::numeric_limits<double>::quiet_NaN();
  return cert;
}

double test_vector_rate(const DirichletProblem& problem, const Eigen::VectorXd& xi) {
  if (xi.size() != problem.generator.size())
    raise(errc::length_mismatch, "test vector has wrong length");
  if (xi.minCoeff() <= 0.0) raise(errc::non_positive_vector, "test vector must be positive");
  Eigen::VectorXd omega_xi = problem.generator.rates() * xi;
  omega_xi += problem.beta.cwiseProduct(xi);
  return (-omega_xi.cwiseQuotient(xi)).minCoeff();
}

StepsizeBound kappa_and_delta(const DirichletProblem& problem, EigenCertificate& cert,
                              const RegimeBounds& bounds) {
  if (!(cert.lambda0 > 0.0))
    raise(errc::non_positive_lambda0, "principal eigenvalue must be positive");
  if (!cert.ground_positive)
    raise(errc::non_positive_vector, "ground vector is degenerate; stepsize bound withheld");

  const double q0 = problem.generator.max_exit_rate();
  const double b0 = bounds.beta_max_abs();
  cert.kappa = ((1.0 + 12.0 * q0) * b0 + 8.0 * bounds.L * bounds.L * (5.0 + 6.0 * b0)) *
               cert.xi_max * cert.xi_min_inv;

  const double lipschitz_cap =
      bounds.L > 0.0 ? 1.0 / (32.0 * bounds.L * bounds.L) : std::numeric_limits<double>::infinity();
  const double spectral_cap = cert.kappa > 0.0
                                  ? (cert.lambda0 / cert.kappa) * (cert.lambda0 / cert.kappa)
                                  : std::numeric_limits<double>::infinity();

  StepsizeBound bound;
  bound.kind = StepsizeBound::Kind::reversible;
  bound.rate_constant = cert.kappa;
  bound.p = 2.0;
  bound.delta_max = std::min({lipschitz_cap, spectral_cap, 1.0});
  cert.delta_max = bound.delta_max;
  return bound;
}

}  // namespace switchsde
