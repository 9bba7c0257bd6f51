#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "switchsde/generator.hpp"

using namespace switchsde;

namespace {

Eigen::MatrixXd two_state(double gamma) {
  Eigen::MatrixXd q(2, 2);
  q << -4.0, 4.0, gamma, -gamma;
  return q;
}

Eigen::MatrixXd three_state(double nu) {
  Eigen::MatrixXd q(3, 3);
  q << -(3.0 + nu), nu, 3.0, 1.0, -3.0, 2.0, 1.0, 2.0, -3.0;
  return q;
}

Eigen::MatrixXd birth_death(double a, double b) {
  Eigen::MatrixXd q(3, 3);
  q << -b, b, 0.0, 2.0 * a, -2.0 * (a + b), 2.0 * b, 0.0, 3.0 * a, -3.0 * a;
  return q;
}

}  // namespace

TEST_CASE("validation accepts the switching generator and reports q0") {
  const GeneratorMatrix q = GeneratorMatrix::validate(two_state(1.0));
  CHECK(q.size() == 2);
  CHECK(q.max_exit_rate() == doctest::Approx(4.0));
}

TEST_CASE("validation rejects broken rate matrices") {
  Eigen::MatrixXd absorbing(2, 2);
  absorbing << -1.0, 1.0, 0.0, 0.0;  // no return path out of state 2
  CHECK_THROWS_WITH_AS(static_cast<void>(GeneratorMatrix::validate(absorbing)),
                       doctest::Contains("Reducible"), Error);

  Eigen::MatrixXd unbalanced(2, 2);
  unbalanced << -1.0, 2.0, 1.0, -1.0;
  CHECK_THROWS_WITH_AS(static_cast<void>(GeneratorMatrix::validate(unbalanced)),
                       doctest::Contains("NonConservative"), Error);

  Eigen::MatrixXd negative(2, 2);
  negative << 1.0, -1.0, 1.0, -1.0;
  CHECK_THROWS_WITH_AS(static_cast<void>(GeneratorMatrix::validate(negative)),
                       doctest::Contains("NegativeRate"), Error);

  Eigen::MatrixXd tiny(1, 1);
  tiny << 0.0;
  CHECK_THROWS_AS(static_cast<void>(GeneratorMatrix::validate(tiny)), Error);
}

TEST_CASE("stationary distributions match the closed forms") {
  const auto mu2 = stationary_distribution(GeneratorMatrix::validate(two_state(1.0)));
  CHECK(mu2.weights(0) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(mu2.weights(1) == doctest::Approx(0.8).epsilon(1e-12));

  const auto mu3 = stationary_distribution(GeneratorMatrix::validate(three_state(0.0)));
  CHECK(mu3.weights(0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(mu3.weights(1) == doctest::Approx(0.30).epsilon(1e-12));
  CHECK(mu3.weights(2) == doctest::Approx(0.45).epsilon(1e-12));

  Eigen::MatrixXd sym(2, 2);
  sym << -1.0, 1.0, 1.0, -1.0;
  const auto mu = stationary_distribution(GeneratorMatrix::validate(sym));
  CHECK(mu.weights(0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("stationary residual stays below 1e-10 on random generators") {
  rng::Stream draws(11, rng::kPurposeGeneric);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(draws.next_unit() * 5);
    const GeneratorMatrix q = GeneratorMatrix::validate(oracles::random_generator(n, draws));
    const auto mu = stationary_distribution(q);
    CHECK((mu.weights.transpose() * q.rates()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(mu.weights.minCoeff() > 0.0);
    CHECK(mu.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("reversibility verdicts") {
  const GeneratorMatrix bd = GeneratorMatrix::validate(birth_death(3.0, 1.0));
  CHECK(is_reversible(bd, stationary_distribution(bd)));

  const GeneratorMatrix q3 = GeneratorMatrix::validate(three_state(1.0));
  CHECK_FALSE(is_reversible(q3, stationary_distribution(q3)));

  // two-state chains satisfy detailed balance automatically
  for (double gamma : {0.5, 1.0, 3.0}) {
    const GeneratorMatrix q2 = GeneratorMatrix::validate(two_state(gamma));
    CHECK(is_reversible(q2, stationary_distribution(q2)));
  }
}

TEST_CASE("reversibility verdict is invariant under state relabeling") {
  rng::Stream draws(17, rng::kPurposeGeneric);
  const Eigen::MatrixXd raw = birth_death(2.0, 0.7);
  const int n = 3;
  std::vector<int> perm = {2, 0, 1};
  Eigen::MatrixXd permuted(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) permuted(perm[i], perm[j]) = raw(i, j);
  const GeneratorMatrix a = GeneratorMatrix::validate(raw);
  const GeneratorMatrix b = GeneratorMatrix::validate(permuted);
  CHECK(is_reversible(a, stationary_distribution(a)) ==
        is_reversible(b, stationary_distribution(b)));
}

TEST_CASE("chain paths are reproducible and well formed") {
  const GeneratorMatrix q = GeneratorMatrix::validate(two_state(1.0));
  const ChainPath a = simulate_chain(q, 0, 10.0, 99);
  const ChainPath b = simulate_chain(q, 0, 10.0, 99);
  REQUIRE(a.jump_times.size() == b.jump_times.size());
  for (std::size_t k = 0; k < a.jump_times.size(); ++k) {
    CHECK(a.jump_times[k] == b.jump_times[k]);
    CHECK(a.states_after[k] == b.states_after[k]);
  }
  int prev = a.initial_state;
  double last = 0.0;
  for (std::size_t k = 0; k < a.jump_times.size(); ++k) {
    CHECK(a.jump_times[k] > last);
    CHECK(a.jump_times[k] <= a.horizon);
    CHECK(a.states_after[k] != prev);
    last = a.jump_times[k];
    prev = a.states_after[k];
  }
  CHECK(simulate_chain(q, 0, 10.0, 100).jump_times != a.jump_times);
}

TEST_CASE("occupation fractions converge to the stationary law") {
  const GeneratorMatrix q = GeneratorMatrix::validate(two_state(1.0));
  const double horizon = 1e4;
  const ChainPath path = simulate_chain(q, 0, horizon, 7);
  double occupied = 0.0;
  int state = path.initial_state;
  double t = 0.0;
  for (std::size_t k = 0; k <= path.jump_times.size(); ++k) {
    const double next = k < path.jump_times.size() ? path.jump_times[k] : horizon;
    if (state == 1) occupied += next - t;
    t = next;
    if (k < path.jump_times.size()) state = path.states_after[k];
  }
  CHECK(occupied / horizon == doctest::Approx(0.8).epsilon(0.025));
}

TEST_CASE("grid sampling is right-continuous and matches a linear scan") {
  ChainPath path;
  path.initial_state = 0;
  path.horizon = 1.0;
  SUBCASE("no jumps gives a constant sequence") {
    const auto grid = chain_at_grid(path, 0.1, 10);
    for (int s : grid) CHECK(s == 0);
  }
  SUBCASE("a jump at 0.15 shows up at gridpoint 2 for delta 0.1") {
    path.jump_times = {0.15};
    path.states_after = {1};
    const auto grid = chain_at_grid(path, 0.1, 10);
    CHECK(grid[0] == 0);
    CHECK(grid[1] == 0);
    CHECK(grid[2] == 1);
    CHECK(grid[10] == 1);
  }
  SUBCASE("grid past the horizon is rejected") {
    CHECK_THROWS_WITH_AS(static_cast<void>(chain_at_grid(path, 0.3, 5)),
                         doctest::Contains("HorizonExceeded"), Error);
  }
}

TEST_CASE("grid sampling agrees with state_at on random paths") {
  const GeneratorMatrix q = GeneratorMatrix::validate(three_state(1.0));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ChainPath path = simulate_chain(q, 2, 5.0, seed);
    const double delta = 0.07;
    const long steps = 70;
    const auto grid = chain_at_grid(path, delta, steps);
    for (long k = 0; k <= steps; ++k)
      CHECK(grid[static_cast<std::size_t>(k)] == path.state_at(static_cast<double>(k) * delta));
  }
}

TEST_CASE("one-step switching probability is bounded by q0 delta") {
  const GeneratorMatrix q = GeneratorMatrix::validate(two_state(1.0));
  const double delta = 0.1;
  const int n_paths = 100000;
  int switched = 0;
  for (int p = 0; p < n_paths; ++p) {
    const ChainPath path = simulate_chain(q, 0, delta, 13, static_cast<std::uint64_t>(p));
    if (path.state_at(delta) != 0) ++switched;
  }
  const double p_hat = static_cast<double>(switched) / n_paths;
  // theory: 1 - exp(q_ii delta) <= q0 delta; allow Monte Carlo slack
  CHECK(p_hat <= q.max_exit_rate() * delta + 4.0 * std::sqrt(0.25 / n_paths));
  CHECK(p_hat == doctest::Approx(1.0 - std::exp(-4.0 * delta)).epsilon(0.03));
}

TEST_CASE("coupling tails decay for the switching generator") {
  const GeneratorMatrix q = GeneratorMatrix::validate(two_state(1.0));
  CHECK_THROWS_AS(static_cast<void>(coupling_tail(q, 1, 1, 5.0, 100, 1)), Error);
  CHECK_THROWS_AS(static_cast<void>(coupling_tail(q, 0, 1, 5.0, 0, 1)), Error);

  const SurvivalCurve curve = coupling_tail(q, 0, 1, 6.0, 4000, 5, 24);
  REQUIRE(curve.time.size() == 25);
  CHECK(curve.survival.front() == doctest::Approx(1.0));

  // least-squares slope of log survival over the strictly positive window
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t k = 0; k < curve.time.size() && curve.survival[k] > 0.005; ++k) {
    const double x = curve.time[k], y = std::log(curve.survival[k]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++m;
  }
  REQUIRE(m >= 3);
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  CHECK(slope < 0.0);
}
