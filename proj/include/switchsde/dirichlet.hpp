#pragma once

#include <Eigen/Dense>

#include "switchsde/generator.hpp"
#include "switchsde/spectral.hpp"

namespace switchsde {

// Reversible-chain data: detailed balance pi_i q_ij = pi_j q_ji is required
// and checked on construction.
struct DirichletProblem {
  GeneratorMatrix generator;
  StationaryDistribution pi;
  Eigen::VectorXd beta;

  static DirichletProblem make(const GeneratorMatrix& generator, const Eigen::VectorXd& beta,
                               double balance_tolerance = 1e-10);
};

// D(f) = (1/2) sum_{i,j} pi_i q_ij (f_j - f_i)^2 - sum_i pi_i beta_i f_i^2
double dirichlet_form(const DirichletProblem& problem, const Eigen::VectorXd& f);

struct EigenCertificate {
  double lambda0 = 0.0;     // smallest eigenvalue of -(Q + diag(beta)) in L^2(pi)
  Eigen::VectorXd xi;       // ground vector, max entry = 1
  double xi_max = 0.0;
  double xi_min_inv = 0.0;
  bool ground_positive = true;   // ground vector strictly positive and simple
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double delta_max = std::numeric_limits<double>::quiet_NaN();
};

// Ground state of the symmetrized operator D^{1/2}(-Q - diag(beta))D^{-1/2},
// D = diag(pi).  Real spectrum by reversibility.
EigenCertificate principal_eigenvalue(const DirichletProblem& problem);

// Largest lambda with (Q + diag(beta)) xi <= -lambda xi entrywise, i.e.
// min_i of -((Q + diag(beta)) xi)_i / xi_i for a positive test vector.
double test_vector_rate(const DirichletProblem& problem, const Eigen::VectorXd& xi);

// kappa = {(1 + 12 q0) beta0 + 8 L^2 (5 + 6 beta0)} xi_max xi_min_inv and
// delta < (1/(32 L^2)) ^ (lambda0 / kappa)^2, capped at 1.
StepsizeBound kappa_and_delta(const DirichletProblem& problem, EigenCertificate& cert,
                              const RegimeBounds& bounds);

}  // namespace switchsde
