#include "switchsde/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace switchsde {

CountableRegimeSpec CountableRegimeSpec::finite(const Eigen::MatrixXd& rates,
                                                const Eigen::VectorXd& beta) {
  if (rates.rows() != rates.cols() || rates.rows() != beta.size())
    raise(errc::invalid_argument, "rates and beta dimensions disagree");
  CountableRegimeSpec spec;
  spec.rates = rates;
  spec.beta = beta;
  spec.complete = true;
  spec.beta_sup = beta.maxCoeff();
  spec.exit_rate_sup = (-rates.diagonal()).maxCoeff();
  return spec;
}

Partition build_partition(const CountableRegimeSpec& spec, const std::vector<double>& cuts) {
  if (!std::isfinite(spec.beta_sup) || !std::isfinite(spec.exit_rate_sup))
    raise(errc::invalid_argument, "sup beta and sup exit rate must be finite");
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
    if (!(cuts[k] < cuts[k + 1])) raise(errc::non_monotone_cuts, "cuts must strictly increase");
  for (double cut : cuts)
    if (!(cut < spec.beta_sup)) raise(errc::non_monotone_cuts, "cuts must stay below sup beta");
  if (spec.beta.maxCoeff() > spec.beta_sup + 1e-12)
    raise(errc::invalid_argument, "a representative exceeds the declared sup beta");

  Partition partition;
  partition.cuts = cuts;
  partition.n_classes = static_cast<int>(cuts.size()) + 1;
  partition.assignment.resize(static_cast<std::size_t>(spec.beta.size()));
  // Classes are numbered from the top beta interval down: class 0 holds the
  // least dissipative regimes.  The Lyapunov weights H eta then decrease with
  // the class index, which is what the M-matrix certificate needs (singleton
  // classes on a 2-state chain reproduce the classical diag(-beta) - Q test).
  for (int s = 0; s < spec.beta.size(); ++s) {
    int ascending = 0;
    while (ascending < static_cast<int>(cuts.size()) &&
           spec.beta(s) > cuts[static_cast<std::size_t>(ascending)])
      ++ascending;
    partition.assignment[static_cast<std::size_t>(s)] =
        static_cast<int>(cuts.size()) - ascending;
  }
  for (int c = 0; c < partition.n_classes; ++c) {
    const bool occupied = std::any_of(partition.assignment.begin(), partition.assignment.end(),
                                      [c](int a) { return a == c; });
    if (!occupied)
      raise(errc::empty_class, "class " + std::to_string(c + 1) + " has no representative");
  }
  return partition;
}

DeclaredClassBounds DeclaredClassBounds::none(int n_classes) {
  DeclaredClassBounds bounds;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  bounds.sup = Eigen::MatrixXd::Constant(n_classes, n_classes, nan);
  bounds.inf = Eigen::MatrixXd::Constant(n_classes, n_classes, nan);
  return bounds;
}

LumpedGenerator lumped_generator(const CountableRegimeSpec& spec, const Partition& partition,
                                 const std::optional<DeclaredClassBounds>& declared) {
  const int m = partition.n_classes;
  const int n = static_cast<int>(spec.beta.size());
  LumpedGenerator lumped;
  lumped.rates = Eigen::MatrixXd::Zero(m, m);
  lumped.beta = Eigen::VectorXd::Constant(m, -std::numeric_limits<double>::infinity());

  if (spec.complete) {
    for (int s = 0; s < n; ++s) {
      const int c = partition.assignment[static_cast<std::size_t>(s)];
      lumped.beta(c) = std::max(lumped.beta(c), spec.beta(s));
    }
  } else {
    // Representatives witness the class sup only from below; the safe value
    // is the upper endpoint of the class interval (K for the top class).
    lumped.beta(0) = spec.beta_sup;
    for (int c = 1; c < m; ++c)
      lumped.beta(c) = partition.cuts[static_cast<std::size_t>(m - 1 - c)];
  }

  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      const bool want_sup = j < i;
      double declared_value = std::numeric_limits<double>::quiet_NaN();
      if (declared)
        declared_value = want_sup ? declared->sup(i, j) : declared->inf(i, j);
      if (std::isfinite(declared_value)) {
        lumped.rates(i, j) = declared_value;
        continue;
      }
      if (!spec.complete)
        raise(errc::unresolvable_bound, "class pair (" + std::to_string(i + 1) + "," +
                                            std::to_string(j + 1) +
                                            ") needs a declared rate bound");
      double extreme = want_sup ? -std::numeric_limits<double>::infinity()
                                : std::numeric_limits<double>::infinity();
      for (int r = 0; r < n; ++r) {
        if (partition.assignment[static_cast<std::size_t>(r)] != i) continue;
        double row_sum = 0.0;
        for (int k = 0; k < n; ++k)
          if (partition.assignment[static_cast<std::size_t>(k)] == j) row_sum += spec.rates(r, k);
        extreme = want_sup ? std::max(extreme, row_sum) : std::min(extreme, row_sum);
      }
      lumped.rates(i, j) = extreme;
    }
  }
  for (int i = 0; i < m; ++i) {
    lumped.rates(i, i) = 0.0;
    lumped.rates(i, i) = -lumped.rates.row(i).sum();
  }
  return lumped;
}

Eigen::MatrixXd h_matrix(int size) {
  if (size < 1) raise(errc::invalid_argument, "matrix size must be positive");
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(size, size);
  for (int i = 0; i < size; ++i)
    for (int j = i; j < size; ++j) h(i, j) = 1.0;
  return h;
}

bool is_nonsingular_m_matrix(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) raise(errc::invalid_argument, "matrix must be square");
  const int n = static_cast<int>(a.rows());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && a(i, j) > 0.0) return false;  // not a Z-matrix
  // Z-matrix with positive leading principal minors == nonsingular M-matrix.
  for (int k = 1; k <= n; ++k) {
    const double minor = a.topLeftCorner(k, k).determinant();
    if (!(minor > 0.0)) return false;
  }
  return true;
}

LumpedCertificate partition_certificate(const Eigen::MatrixXd& qf, const Eigen::VectorXd& beta_f,
                                        bool ergodicity_declared) {
  if (qf.rows() != qf.cols() || qf.rows() != beta_f.size())
    raise(errc::invalid_argument, "lumped generator and beta dimensions disagree");
  const int m = static_cast<int>(qf.rows());

  LumpedCertificate cert;
  cert.qf = qf;
  cert.beta_f = beta_f;
  cert.h = h_matrix(m);
  cert.ergodicity_declared = ergodicity_declared;

  Eigen::MatrixXd omega = qf;
  omega.diagonal() += beta_f;
  cert.a = -(omega * cert.h);

  cert.is_m = is_nonsingular_m_matrix(cert.a);
  if (!cert.is_m) return cert;

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
  cert.eta_f = cert.a.fullPivLu().solve(ones);
  if (cert.eta_f.minCoeff() <= 0.0)
    raise(errc::not_m_matrix, "inverse positivity fails, eta not strictly positive");
  cert.xi_f = cert.h * cert.eta_f;
  cert.lambda_f = -(omega * cert.xi_f);
  for (int i = 0; i + 1 < m; ++i)
    if (!(cert.xi_f(i) > cert.xi_f(i + 1)))
      raise(errc::not_m_matrix, "xi^F is not strictly decreasing");
  return cert;
}

}  // namespace switchsde
