#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "switchsde/dirichlet.hpp"

using namespace switchsde;

namespace {

GeneratorMatrix birth_death(double a, double b) {
  Eigen::MatrixXd q(3, 3);
  q << -b, b, 0.0, 2.0 * a, -2.0 * (a + b), 2.0 * b, 0.0, 3.0 * a, -3.0 * a;
  return GeneratorMatrix::validate(q);
}

// a = 3, b = 1, regime constants c = (-3, 1, 2)
DirichletProblem reference_problem() {
  return DirichletProblem::make(birth_death(3.0, 1.0), Eigen::Vector3d(-3.0, 1.0, 2.0));
}

// Direct summation, independent of the library formula.
double form_by_hand(const DirichletProblem& prob, const Eigen::VectorXd& f) {
  double quad = 0.0, penalty = 0.0;
  const int n = prob.generator.size();
  for (int i = 0; i < n; ++i) {
    penalty += prob.pi.weights(i) * prob.beta(i) * f(i) * f(i);
    for (int j = 0; j < n; ++j)
      if (i != j)
        quad += prob.pi.weights(i) * prob.generator.rates()(i, j) * (f(j) - f(i)) * (f(j) - f(i));
  }
  return 0.5 * quad - penalty;
}

}  // namespace

TEST_CASE("construction rejects non-reversible chains") {
  Eigen::MatrixXd q(3, 3);
  q << -3.0, 1.0, 2.0, 1.0, -3.0, 2.0, 1.0, 2.0, -3.0;
  CHECK_THROWS_WITH_AS(
      static_cast<void>(DirichletProblem::make(GeneratorMatrix::validate(q),
                                               Eigen::Vector3d(1.0, 0.0, -1.0))),
      doctest::Contains("NotReversible"), Error);
}

TEST_CASE("the form vanishes on constants without a penalty") {
  DirichletProblem prob = reference_problem();
  prob.beta.setZero();
  CHECK(dirichlet_form(prob, Eigen::Vector3d::Ones()) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("the form on constants equals minus the averaged beta") {
  const DirichletProblem prob = reference_problem();
  const double expected = -prob.pi.weights.dot(prob.beta);
  CHECK(dirichlet_form(prob, Eigen::Vector3d::Ones()) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("the form matches direct summation on the reference instance") {
  const DirichletProblem prob = reference_problem();
  const Eigen::Vector3d f(1.0, 2.0, 3.0);
  CHECK(dirichlet_form(prob, f) == doctest::Approx(form_by_hand(prob, f)).epsilon(1e-14));
  // pi = (54, 9, 2)/65 gives D(f) = 162/65 by hand
  CHECK(dirichlet_form(prob, f) == doctest::Approx(162.0 / 65.0).epsilon(1e-12));
}

TEST_CASE("zero beta leaves the generator kernel as ground state") {
  DirichletProblem prob = reference_problem();
  prob.beta.setZero();
  const EigenCertificate cert = principal_eigenvalue(prob);
  CHECK(std::abs(cert.lambda0) < 1e-12);
  CHECK((cert.xi.array() - 1.0).abs().maxCoeff() < 1e-9);
}

TEST_CASE("reference instance: lambda0 at least 1 with tight residual") {
  const DirichletProblem prob = reference_problem();
  const EigenCertificate cert = principal_eigenvalue(prob);
  CHECK(cert.lambda0 >= 1.0 - 1e-9);
  CHECK(cert.ground_positive);
  Eigen::VectorXd residual = prob.generator.rates() * cert.xi;
  residual += prob.beta.cwiseProduct(cert.xi);
  residual += cert.lambda0 * cert.xi;
  CHECK(residual.cwiseAbs().maxCoeff() < 1e-9);
  // Rayleigh-quotient consistency
  const double norm2 = cert.xi.cwiseAbs2().dot(prob.pi.weights);
  CHECK(dirichlet_form(prob, cert.xi) / norm2 == doctest::Approx(cert.lambda0).epsilon(1e-9));
}

TEST_CASE("lambda0 agrees with the Jacobi oracle on random reversible chains") {
  rng::Stream draws(101, rng::kPurposeGeneric);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 4;
    const GeneratorMatrix q =
        GeneratorMatrix::validate(oracles::random_reversible_generator(n, draws));
    Eigen::VectorXd beta(n);
    for (int i = 0; i < n; ++i) beta(i) = 2.0 * draws.next_unit() - 1.0;
    const DirichletProblem prob = DirichletProblem::make(q, beta);
    const EigenCertificate cert = principal_eigenvalue(prob);

    const Eigen::VectorXd sqrt_pi = prob.pi.weights.cwiseSqrt();
    Eigen::MatrixXd op = -q.rates();
    op.diagonal() -= beta;
    Eigen::MatrixXd sym(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) sym(i, j) = sqrt_pi(i) * op(i, j) / sqrt_pi(j);
    sym = 0.5 * (sym + sym.transpose().eval());
    CHECK(cert.lambda0 ==
          doctest::Approx(oracles::jacobi_smallest_eigenvalue(sym)).epsilon(1e-9));
  }
}

TEST_CASE("variational characterization holds on random unit vectors") {
  const DirichletProblem prob = reference_problem();
  const EigenCertificate cert = principal_eigenvalue(prob);
  rng::Stream draws(7, rng::kPurposeGeneric);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::Vector3d f;
    for (int i = 0; i < 3; ++i) f(i) = 2.0 * draws.next_unit() - 1.0;
    const double norm = std::sqrt(f.cwiseAbs2().dot(prob.pi.weights));
    if (norm < 1e-8) continue;
    f /= norm;
    CHECK(dirichlet_form(prob, f) >= cert.lambda0 - 1e-9);
  }
}

TEST_CASE("test vector rate: exact arithmetic on the reference instance") {
  const DirichletProblem prob = reference_problem();
  // (Omega xi)(0) = b + c0, (Omega xi)(1) = -2(a-b-c1), (Omega xi)(2) = -3(a-c2)
  const double rate = test_vector_rate(prob, Eigen::Vector3d(1.0, 2.0, 3.0));
  CHECK(rate == 1.0);  // min{2, 1, 1}, exact in double arithmetic

  CHECK_THROWS_WITH_AS(static_cast<void>(test_vector_rate(prob, Eigen::Vector3d(1.0, 0.0, 3.0))),
                       doctest::Contains("NonPositiveVector"), Error);
}

TEST_CASE("the principal eigenvector attains lambda0 as a test vector") {
  const DirichletProblem prob = reference_problem();
  const EigenCertificate cert = principal_eigenvalue(prob);
  CHECK(test_vector_rate(prob, cert.xi) == doctest::Approx(cert.lambda0).epsilon(1e-9));
}

TEST_CASE("positive test vectors never beat lambda0") {
  rng::Stream draws(61, rng::kPurposeGeneric);
  for (int trial = 0; trial < 30; ++trial) {
    const GeneratorMatrix q =
        GeneratorMatrix::validate(oracles::random_reversible_generator(4, draws));
    Eigen::VectorXd beta(4);
    for (int i = 0; i < 4; ++i) beta(i) = 2.0 * draws.next_unit() - 1.0;
    const DirichletProblem prob = DirichletProblem::make(q, beta);
    const EigenCertificate cert = principal_eigenvalue(prob);
    Eigen::VectorXd xi(4);
    for (int i = 0; i < 4; ++i) xi(i) = 0.1 + draws.next_unit();
    CHECK(test_vector_rate(prob, xi) <= cert.lambda0 + 1e-9);
  }
}

TEST_CASE("kappa and the reversible stepsize bound") {
  SUBCASE("nonpositive lambda0 is rejected") {
    DirichletProblem prob = reference_problem();
    EigenCertificate cert = principal_eigenvalue(prob);
    cert.lambda0 = 0.0;
    RegimeBounds bounds;
    bounds.beta = prob.beta;
    bounds.L = 3.0;
    CHECK_THROWS_WITH_AS(static_cast<void>(kappa_and_delta(prob, cert, bounds)),
                         doctest::Contains("NonPositiveLambda0"), Error);
  }
  SUBCASE("kappa collapses to 40 for beta0 = 0, L = 1, flat eigenvector") {
    Eigen::MatrixXd sym(2, 2);
    sym << -1.0, 1.0, 1.0, -1.0;
    DirichletProblem prob =
        DirichletProblem::make(GeneratorMatrix::validate(sym), Eigen::Vector2d::Zero());
    EigenCertificate cert;
    cert.lambda0 = 0.5;  // synthetic, only the formula is under test
    cert.xi = Eigen::Vector2d::Ones();
    cert.xi_max = 1.0;
    cert.xi_min_inv = 1.0;
    cert.ground_positive = true;
    RegimeBounds bounds;
    bounds.beta = Eigen::Vector2d::Zero();
    bounds.L = 1.0;
    const StepsizeBound bound = kappa_and_delta(prob, cert, bounds);
    CHECK(cert.kappa == doctest::Approx(40.0));
    CHECK(bound.delta_max == doctest::Approx(std::min(1.0 / 32.0, 0.5 * 0.5 / 1600.0)));
  }
  SUBCASE("reference pipeline value matches the hand formula") {
    const DirichletProblem prob = reference_problem();
    EigenCertificate cert = principal_eigenvalue(prob);
    RegimeBounds bounds;
    bounds.beta = prob.beta;
    bounds.L = 3.0;  // max(|alpha_i| + |sigma_i|) for alpha = (-2, 0, 1/2), sigma = 1
    const StepsizeBound bound = kappa_and_delta(prob, cert, bounds);
    // q0 = 9, beta0 = 3, L = 3: {(1+108) 3 + 72 (5+18)} = 1983
    const double kappa = 1983.0 * cert.xi_max * cert.xi_min_inv;
    CHECK(cert.kappa == doctest::Approx(kappa).epsilon(1e-12));
    // kappa only sees the scale-free ratio of the eigenvector
    EigenCertificate scaled = cert;
    scaled.xi *= 5.0;
    scaled.xi_max = scaled.xi.maxCoeff();
    scaled.xi_min_inv = 1.0 / scaled.xi.minCoeff();
    const StepsizeBound rescaled = kappa_and_delta(prob, scaled, bounds);
    CHECK(scaled.kappa == doctest::Approx(cert.kappa).epsilon(1e-13));
    CHECK(rescaled.delta_max == doctest::Approx(bound.delta_max).epsilon(1e-13));
    const double expected =
        std::min(1.0 / (32.0 * 9.0), (cert.lambda0 / kappa) * (cert.lambda0 / kappa));
    CHECK(bound.delta_max == doctest::Approx(expected).epsilon(1e-12));
    CHECK(bound.delta_max > 0.0);
  }
}
