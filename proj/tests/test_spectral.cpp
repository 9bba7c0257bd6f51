#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "switchsde/spectral.hpp"

using namespace switchsde;

namespace {

GeneratorMatrix two_state(double gamma) {
  Eigen::MatrixXd q(2, 2);
  q << -4.0, 4.0, gamma, -gamma;
  return GeneratorMatrix::validate(q);
}

GeneratorMatrix three_state(double nu) {
  Eigen::MatrixXd q(3, 3);
  q << -(3.0 + nu), nu, 3.0, 1.0, -3.0, 2.0, 1.0, 2.0, -3.0;
  return GeneratorMatrix::validate(q);
}

RegimeBounds ou_bounds() {
  RegimeBounds bounds;
  bounds.beta = Eigen::Vector2d(2.0, -1.0);
  bounds.c0 = 1.0;
  bounds.L = 1.0;
  bounds.L0 = 1.0;
  return bounds;
}

RegimeBounds linear3_bounds() {
  RegimeBounds bounds;
  bounds.beta = Eigen::Vector3d(10.0 / 9.0, 0.0, -5.0);
  bounds.L = 4.0;
  return bounds;
}

}  // namespace

TEST_CASE("averaging condition follows the closed form (2 gamma - 4)/(4 + gamma)") {
  for (double gamma : {0.5, 1.0, 1.9, 2.0, 2.1, 3.0}) {
    const auto mu = stationary_distribution(two_state(gamma));
    const AveragingResult r = averaging_condition(mu, ou_bounds());
    CHECK(r.sum == doctest::Approx((2.0 * gamma - 4.0) / (4.0 + gamma)).epsilon(1e-14));
    CHECK(r.holds == (gamma < 2.0));
  }
  RegimeBounds zero = ou_bounds();
  zero.beta.setZero();
  const auto mu = stationary_distribution(two_state(1.0));
  const AveragingResult r = averaging_condition(mu, zero);
  CHECK(r.sum == 0.0);
  CHECK_FALSE(r.holds);  // the boundary is excluded

  RegimeBounds mismatched = ou_bounds();
  mismatched.beta = Eigen::Vector3d(1.0, 2.0, 3.0);
  CHECK_THROWS_WITH_AS(static_cast<void>(averaging_condition(mu, mismatched)),
                       doctest::Contains("LengthMismatch"), Error);
}

TEST_CASE("averaging verdict is invariant under state relabeling") {
  rng::Stream draws(31, rng::kPurposeGeneric);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(draws.next_unit() * 3);
    const Eigen::MatrixXd raw = oracles::random_generator(n, draws);
    Eigen::VectorXd beta(n);
    for (int i = 0; i < n; ++i) beta(i) = 2.0 * draws.next_unit() - 1.2;

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::rotate(perm.begin(), perm.begin() + 1, perm.end());
    Eigen::MatrixXd praw(n, n);
    Eigen::VectorXd pbeta(n);
    for (int i = 0; i < n; ++i) {
      pbeta(perm[static_cast<std::size_t>(i)]) = beta(i);
      for (int j = 0; j < n; ++j)
        praw(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]) = raw(i, j);
    }
    RegimeBounds b1, b2;
    b1.beta = beta;
    b2.beta = pbeta;
    const auto r1 = averaging_condition(stationary_distribution(GeneratorMatrix::validate(raw)), b1);
    const auto r2 =
        averaging_condition(stationary_distribution(GeneratorMatrix::validate(praw)), b2);
    CHECK(r1.sum == doctest::Approx(r2.sum).epsilon(1e-10));
    CHECK(r1.holds == r2.holds);
  }
}

TEST_CASE("Q_p is the exact entrywise formula") {
  const GeneratorMatrix q = two_state(1.0);
  const Eigen::MatrixXd qp = build_qp(q, ou_bounds(), 1.0);
  CHECK(qp(0, 0) == doctest::Approx(-3.0));
  CHECK(qp(0, 1) == doctest::Approx(4.0));
  CHECK(qp(1, 0) == doctest::Approx(1.0));
  CHECK(qp(1, 1) == doctest::Approx(-1.5));

  CHECK((build_qp(q, ou_bounds(), 0.0) - q.rates()).cwiseAbs().maxCoeff() == 0.0);

  const Eigen::MatrixXd q2 = build_qp(three_state(0.0), linear3_bounds(), 2.0);
  CHECK(q2(0, 0) == doctest::Approx(-3.0 + 10.0 / 9.0).epsilon(1e-15));
  CHECK(q2(1, 1) == doctest::Approx(-3.0));
  CHECK(q2(2, 2) == doctest::Approx(-8.0));
  CHECK(q2(0, 1) == 0.0);
  CHECK(q2(0, 2) == doctest::Approx(3.0));
}

TEST_CASE("Perron eta matches the 2x2 characteristic polynomial") {
  Eigen::MatrixXd qp(2, 2);
  qp << -3.0, 4.0, 1.0, -1.5;
  // lambda^2 + 4.5 lambda + 0.5 = 0, top root -(4.5 - sqrt(18.25))/2
  const double expected = (4.5 - std::sqrt(18.25)) / 2.0;
  const PerronResult r = perron_eta(qp);
  CHECK(r.eta == doctest::Approx(expected).epsilon(1e-11));
  CHECK(r.xi.maxCoeff() == doctest::Approx(1.0));
  CHECK(r.xi.minCoeff() > 0.0);
  CHECK((qp * r.xi + r.eta * r.xi).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("a generator itself has eta 0 with the constant eigenvector") {
  const GeneratorMatrix q = three_state(1.0);
  const PerronResult r = perron_eta(q.rates());
  CHECK(std::abs(r.eta) < 1e-11);
  CHECK((r.xi.array() - 1.0).abs().maxCoeff() < 1e-9);
}

TEST_CASE("Perron pipeline agrees with the dense eigensolver on random instances") {
  rng::Stream draws(47, rng::kPurposeGeneric);
  int done = 0;
  while (done < 60) {
    const int n = 2 + static_cast<int>(draws.next_unit() * 4);  // up to 5x5
    const GeneratorMatrix q = GeneratorMatrix::validate(oracles::random_generator(n, draws));
    Eigen::VectorXd beta(n);
    for (int i = 0; i < n; ++i) beta(i) = 3.0 * draws.next_unit() - 2.0;
    RegimeBounds bounds;
    bounds.beta = beta;
    if (!averaging_condition(stationary_distribution(q), bounds).holds) continue;
    const double p_cap = std::min(1.0, p0_threshold(q, bounds));
    const double p = 0.1 + 0.8 * p_cap * draws.next_unit();
    const Eigen::MatrixXd qp = build_qp(q, bounds, p);
    const PerronResult r = perron_eta(qp);
    CHECK((qp * r.xi + r.eta * r.xi).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(r.xi.minCoeff() > 0.0);
    CHECK(r.eta == doctest::Approx(-oracles::spectral_abscissa(qp)).epsilon(1e-8));
    ++done;
  }
}

TEST_CASE("moment threshold p0") {
  CHECK(p0_threshold(two_state(1.0), ou_bounds()) == doctest::Approx(4.0));
  CHECK(p0_threshold(three_state(0.0), linear3_bounds()) == doctest::Approx(5.4).epsilon(1e-12));
  RegimeBounds stable = ou_bounds();
  stable.beta = Eigen::Vector2d(-0.5, -1.0);
  CHECK(std::isinf(p0_threshold(two_state(1.0), stable)));
}

TEST_CASE("additive rate constant collapses and matches a re-derivation") {
  // beta identically zero: alpha reduces to 12 p L^2
  RegimeBounds zero;
  zero.beta = Eigen::Vector2d::Zero();
  zero.L = 1.5;
  SpectralCertificate cert;
  cert.p = 0.7;
  cert.q0 = 4.0;
  cert.xi_max = 1.0;
  cert.xi_min_inv = 1.0;
  CHECK(alpha_additive(zero, cert) ==
        doctest::Approx(12.0 * 0.7 * 1.5 * 1.5).epsilon(1e-14));

  // independent re-evaluation of the closed form at p = 0.5
  RegimeBounds bounds = ou_bounds();
  cert.p = 0.5;
  cert.q0 = 4.0;
  cert.xi_max = 1.0;
  cert.xi_min_inv = 1.5;
  const double b0 = 2.0, L = 1.0, p = 0.5, q0 = 4.0, prod = 1.5;
  const double by_hand =
      p * (b0 + 4.0 * L * L * (3.0 + 4.0 * b0) +
           std::pow(4.0, (2.0 + p) / 2.0) * b0 * (std::pow(4.0, p / 2.0) * std::pow(L, p) + q0 * prod));
  CHECK(alpha_additive(bounds, cert) == doctest::Approx(by_hand).epsilon(1e-14));
}

TEST_CASE("alpha under unit constants reduces to p(29 + 4^{(2+p)/2}(4^{p/2} + 4 z))") {
  // beta0 = 1, L = 1, q0 = 4; z stands for xi_max * xi_min_inv
  RegimeBounds bounds;
  bounds.beta = Eigen::Vector2d(1.0, -0.5);
  bounds.L = 1.0;
  for (double p : {0.1, 0.3, 0.5, 0.9}) {
    for (double z : {1.0, 1.2, 2.5}) {
      SpectralCertificate cert;
      cert.p = p;
      cert.q0 = 4.0;
      cert.xi_max = z;
      cert.xi_min_inv = 1.0;
      const double closed = p * (29.0 + std::pow(4.0, (2.0 + p) / 2.0) *
                                            (std::pow(4.0, p / 2.0) + 4.0 * z));
      CHECK(alpha_additive(bounds, cert) == doctest::Approx(closed).epsilon(1e-14));
    }
  }
}

TEST_CASE("alpha and beta are invariant under rescaling the eigenvector") {
  const GeneratorMatrix q = two_state(1.0);
  SpectralCertificate cert = make_certificate(q, ou_bounds(), 0.5);
  SpectralCertificate scaled = cert;
  scaled.xi *= 7.0;
  scaled.xi_max = scaled.xi.maxCoeff();
  scaled.xi_min_inv = 1.0 / scaled.xi.minCoeff();
  CHECK(alpha_additive(ou_bounds(), cert) ==
        doctest::Approx(alpha_additive(ou_bounds(), scaled)).epsilon(1e-14));

  const GeneratorMatrix q3 = three_state(0.0);
  SpectralCertificate cert2 = make_certificate(q3, linear3_bounds(), 2.0);
  SpectralCertificate scaled2 = cert2;
  scaled2.xi *= 0.25;
  scaled2.xi_max = scaled2.xi.maxCoeff();
  scaled2.xi_min_inv = 1.0 / scaled2.xi.minCoeff();
  CHECK(beta_multiplicative(q3, linear3_bounds(), cert2) ==
        doctest::Approx(beta_multiplicative(q3, linear3_bounds(), scaled2)).epsilon(1e-14));
}

TEST_CASE("additive stepsize bound") {
  const GeneratorMatrix q = two_state(1.0);
  SpectralCertificate cert = make_certificate(q, ou_bounds(), 0.5);
  REQUIRE(cert.eta > 0.0);

  SUBCASE("nonpositive eta is rejected") {
    SpectralCertificate bad = cert;
    bad.eta = 0.0;
    CHECK_THROWS_WITH_AS(static_cast<void>(delta_max_additive(ou_bounds(), bad, 1.0)),
                         doctest::Contains("NonPositiveEta"), Error);
  }
  SUBCASE("a large Lipschitz constant makes the first factor bind") {
    RegimeBounds stiff = ou_bounds();
    stiff.L = 10.0;
    const StepsizeBound bound = delta_max_additive(stiff, cert, 1e-9);
    CHECK(bound.delta_max == doctest::Approx(1.0 / 1600.0));
  }
  SUBCASE("the bound never exceeds 1") {
    RegimeBounds loose = ou_bounds();
    loose.L = 0.0;
    const StepsizeBound bound = delta_max_additive(loose, cert, 1e-12);
    CHECK(bound.delta_max == doctest::Approx(1.0));
  }
}

TEST_CASE("condition (*6)") {
  CHECK(condition_star6(three_state(0.0), linear3_bounds()));  // 3 / (10/9) = 2.7
  RegimeBounds all_negative;
  all_negative.beta = Eigen::Vector3d(-1.0, -1.0, -1.0);
  CHECK(condition_star6(three_state(0.0), all_negative));  // empty minimum

  Eigen::MatrixXd slow(2, 2);
  slow << -1.0, 1.0, 1.0, -1.0;
  RegimeBounds fast;
  fast.beta = Eigen::Vector2d(2.0, -1.0);
  CHECK_FALSE(condition_star6(GeneratorMatrix::validate(slow), fast));  // 0.5 < 1
}

TEST_CASE("multiplicative rate constant") {
  SUBCASE("collapses to 40 for beta0 = 0, L = 1, unit eigenvector") {
    Eigen::MatrixXd sym(2, 2);
    sym << -1.0, 1.0, 1.0, -1.0;
    const GeneratorMatrix q = GeneratorMatrix::validate(sym);
    RegimeBounds bounds;
    bounds.beta = Eigen::Vector2d::Zero();
    bounds.L = 1.0;
    const SpectralCertificate cert2 = make_certificate(q, bounds, 2.0);
    CHECK(beta_multiplicative(q, bounds, cert2) == doctest::Approx(40.0).epsilon(1e-12));
  }
  SUBCASE("matches the hand arithmetic for the three-regime model") {
    // nu = 0: q0 = 3 gives {(1+36) 5 + 128 (5+30)} = 4665 times the xi ratio
    const GeneratorMatrix q0 = three_state(0.0);
    const SpectralCertificate cert0 = make_certificate(q0, linear3_bounds(), 2.0);
    CHECK(beta_multiplicative(q0, linear3_bounds(), cert0) ==
          doctest::Approx(4665.0 * cert0.xi_max * cert0.xi_min_inv).epsilon(1e-12));
    // nu = 5: q0 = 8 gives {(1+96) 5 + 4480} = 4965 times the xi ratio
    const GeneratorMatrix q5 = three_state(5.0);
    const SpectralCertificate cert5 = make_certificate(q5, linear3_bounds(), 2.0);
    CHECK(beta_multiplicative(q5, linear3_bounds(), cert5) ==
          doctest::Approx(4965.0 * cert5.xi_max * cert5.xi_min_inv).epsilon(1e-12));
  }
  SUBCASE("violating (*6) is an error") {
    Eigen::MatrixXd slow(2, 2);
    slow << -1.0, 1.0, 1.0, -1.0;
    const GeneratorMatrix q = GeneratorMatrix::validate(slow);
    RegimeBounds bounds;
    bounds.beta = Eigen::Vector2d(2.0, -1.0);
    bounds.L = 1.0;
    SpectralCertificate cert2;
    cert2.p = 2.0;
    CHECK_THROWS_WITH_AS(static_cast<void>(beta_multiplicative(q, bounds, cert2)),
                         doctest::Contains("Star6Violated"), Error);
  }
}

TEST_CASE("multiplicative stepsize bound factors") {
  SpectralCertificate cert2;
  cert2.p = 2.0;
  cert2.eta = 1.0;
  RegimeBounds bounds;
  bounds.beta = Eigen::Vector2d::Zero();
  bounds.L = 4.0;
  CHECK(delta_max_multiplicative(bounds, cert2, 1.0).delta_max ==
        doctest::Approx(1.0 / 512.0));

  bounds.L = 0.1;
  cert2.eta = 0.01;
  CHECK(delta_max_multiplicative(bounds, cert2, 1.0).delta_max == doctest::Approx(1e-4));

  cert2.eta = -1.0;
  CHECK_THROWS_AS(static_cast<void>(delta_max_multiplicative(bounds, cert2, 1.0)), Error);
}

TEST_CASE("eta_p / p is non-increasing on the grid for the worked models") {
  // eta vanishes at p = 0 and the spectral abscissa is convex in the diagonal
  // perturbation, so the averaged rate eta_p / p can only fall with p.
  const auto run = [](const GeneratorMatrix& q, const RegimeBounds& bounds) {
    double previous = std::numeric_limits<double>::infinity();
    for (double p : default_p_grid()) {
      if (p >= std::min(1.0, p0_threshold(q, bounds))) break;
      const SpectralCertificate cert = make_certificate(q, bounds, p);
      const double ratio = cert.eta / p;
      CHECK(ratio <= previous + 1e-10);
      previous = ratio;
    }
  };
  run(two_state(1.0), ou_bounds());
  run(three_state(0.0), linear3_bounds());
}

TEST_CASE("golden stepsize bound at p = 1/2 for the switching OU model") {
  // full pipeline cross-checked against a by-hand evaluation: eta from the
  // 2x2 characteristic polynomial, xi from the first eigen-equation row,
  // alpha from the closed form
  const GeneratorMatrix q = two_state(1.0);
  const SpectralCertificate cert = make_certificate(q, ou_bounds(), 0.5);
  const double alpha = alpha_additive(ou_bounds(), cert);
  const StepsizeBound bound = delta_max_additive(ou_bounds(), cert, alpha);

  // Q_{1/2} = [[-3.5, 4], [1, -1.25]]: lambda^2 + 4.75 lambda + 0.375 = 0
  const double eta_hand = (4.75 - std::sqrt(4.75 * 4.75 - 4.0 * 0.375)) / 2.0;
  CHECK(cert.eta == doctest::Approx(eta_hand).epsilon(1e-11));
  // first row of (Q_p + eta) xi = 0 gives xi_1 / xi_0 = (3.5 - eta) / 4 < 1
  const double ratio = (3.5 - eta_hand) / 4.0;
  CHECK(cert.xi_min_inv * cert.xi_max == doctest::Approx(1.0 / ratio).epsilon(1e-9));
  const double alpha_hand =
      0.5 * (2.0 + 4.0 * (3.0 + 8.0) +
             std::pow(4.0, 1.25) * 2.0 * (std::pow(4.0, 0.25) + 4.0 / ratio));
  CHECK(alpha == doctest::Approx(alpha_hand).epsilon(1e-9));
  const double delta_hand = std::pow(eta_hand / alpha_hand, 4.0);
  CHECK(bound.delta_max == doctest::Approx(std::min(1.0 / 16.0, delta_hand)).epsilon(1e-8));
  CHECK(bound.delta_max > 0.0);
}

TEST_CASE("the full spectral pipeline certifies the switching OU model") {
  const GeneratorMatrix q = two_state(1.0);
  const SpectralReport report = certify_spectral(q, ou_bounds(), true);
  CHECK(report.averaging.holds);
  CHECK(report.averaging.sum == doctest::Approx(-0.4).epsilon(1e-14));
  CHECK(report.p0 == doctest::Approx(4.0));
  REQUIRE_FALSE(report.grid.empty());
  REQUIRE(report.additive.has_value());
  CHECK(report.additive->delta_max > 0.0);
  CHECK(report.additive->delta_max <= 1.0 / 16.0);
  // every grid point with positive eta satisfies the residual contract
  for (const auto& point : report.grid) {
    const SpectralCertificate cert = make_certificate(q, ou_bounds(), point.p);
    CHECK((cert.qp * cert.xi + cert.eta * cert.xi).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("the multiplicative pipeline certifies the three-regime model") {
  const GeneratorMatrix q = three_state(0.0);
  const SpectralReport report = certify_spectral(q, linear3_bounds(), false);
  CHECK(report.averaging.holds);
  CHECK(report.star6);
  REQUIRE(report.cert2.has_value());
  CHECK(report.cert2->eta > 0.0);
  REQUIRE(report.multiplicative.has_value());
  CHECK(report.multiplicative->delta_max > 0.0);
  CHECK(report.multiplicative->delta_max <= 1.0 / 512.0);
}
