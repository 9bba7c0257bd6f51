#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "switchsde/generator.hpp"

namespace switchsde {

// Regime space given through a finite set of representative states.  For a
// genuinely countable space (`complete == false`) the row sums into each
// class cannot be computed from representatives alone, so per-class-pair
// bounds must be declared; the lumping consumes only those bounds.
struct CountableRegimeSpec {
  Eigen::MatrixXd rates;      // rows/cols over the representative states
  Eigen::VectorXd beta;
  bool complete = true;       // enumeration covers the whole space
  double beta_sup = 0.0;      // K = sup beta_i; defaults to max(beta) when complete
  double exit_rate_sup = 0.0; // sup(-q_ii)
  bool ergodicity_declared = true;  // exponential ergodicity of the chain, taken on trust

  static CountableRegimeSpec finite(const Eigen::MatrixXd& rates, const Eigen::VectorXd& beta);
};

struct Partition {
  std::vector<double> cuts;     // interior cut points, strictly increasing
  std::vector<int> assignment;  // state -> class, 0-based
  int n_classes = 0;
};

// Classes F_i = {j : beta_j in (k_{i-1}, k_i]} over cuts
// -inf = k_0 < k_1 < ... < k_m < k_{m+1} = K; every class must be nonempty.
Partition build_partition(const CountableRegimeSpec& spec, const std::vector<double>& cuts);

// Declared sup/inf of row sums into each class, overriding what the
// representatives give.  NaN entries mean "not declared".
struct DeclaredClassBounds {
  Eigen::MatrixXd sup;  // used for class pairs j < i
  Eigen::MatrixXd inf;  // used for class pairs j > i

  static DeclaredClassBounds none(int n_classes);
};

struct LumpedGenerator {
  Eigen::MatrixXd rates;  // conservative generator on the classes
  Eigen::VectorXd beta;   // beta_i^F = sup of beta over the class
};

LumpedGenerator lumped_generator(const CountableRegimeSpec& spec, const Partition& partition,
                                 const std::optional<DeclaredClassBounds>& declared = std::nullopt);

// Upper-triangular all-ones matrix H: H(i, j) = 1 iff j >= i.
Eigen::MatrixXd h_matrix(int size);

// Z-matrix with all leading principal minors positive.
bool is_nonsingular_m_matrix(const Eigen::MatrixXd& a);

struct LumpedCertificate {
  Eigen::MatrixXd qf;
  Eigen::VectorXd beta_f;
  Eigen::MatrixXd h;
  Eigen::MatrixXd a;        // -(Q^F + diag(beta^F)) H
  bool is_m = false;
  Eigen::VectorXd eta_f;    // positive solution of A eta = 1 when certified
  Eigen::VectorXd xi_f;     // H eta, strictly decreasing when certified
  Eigen::VectorXd lambda_f; // -(Q^F + diag(beta^F)) xi_f (the all-ones vector when certified)
  bool ergodicity_declared = true;
};

// M-matrix test on A = -(Q^F + diag(beta^F)) H plus the constructive witness:
// solving A eta = 1 yields eta >> 0 by inverse positivity.
LumpedCertificate partition_certificate(const Eigen::MatrixXd& qf, const Eigen::VectorXd& beta_f,
                                        bool ergodicity_declared = true);

}  // namespace switchsde
