#include "switchsde/generator.hpp"

#include <algorithm>
#include <cmath>

#include "switchsde/rng.hpp"

namespace switchsde {

namespace {

// Reachability over the positive-rate digraph (rate > 0 exactly; rates are
// inputs, not computed quantities).
std::vector<bool> reachable(const Eigen::MatrixXd& rates, bool transpose) {
  const int n = static_cast<int>(rates.rows());
  std::vector<bool> seen(n, false);
  std::vector<int> stack = {0};
  seen[0] = true;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < n; ++v) {
      if (v == u || seen[v]) continue;
      const double rate = transpose ? rates(v, u) : rates(u, v);
      if (rate > 0.0) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace

GeneratorMatrix GeneratorMatrix::validate(const Eigen::MatrixXd& raw,
                                          const ToleranceProfile& tol) {
  if (raw.rows() != raw.cols())
    raise(errc::invalid_argument, "rate matrix must be square");
  const int n = static_cast<int>(raw.rows());
  if (n < 2) raise(errc::invalid_argument, "need at least two states");
  if (!raw.allFinite()) raise(errc::invalid_argument, "rates must be finite");

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && raw(i, j) < 0.0)
        raise(errc::negative_rate, "q[" + std::to_string(i) + "][" + std::to_string(j) +
                                       "] = " + std::to_string(raw(i, j)));
    }
    const double row_sum = raw.row(i).sum();
    if (std::abs(row_sum) > tol.row_sum)
      raise(errc::non_conservative,
            "row " + std::to_string(i) + " sums to " + std::to_string(row_sum));
  }

  const auto forward = reachable(raw, false);
  const auto backward = reachable(raw, true);
  for (int i = 0; i < n; ++i) {
    if (!forward[i] || !backward[i])
      raise(errc::reducible, "state " + std::to_string(i) + " not strongly connected");
  }

  GeneratorMatrix out(raw);
  if (!(out.max_exit_rate() > 0.0))
    raise(errc::reducible, "all exit rates vanish");
  return out;
}

StationaryDistribution stationary_distribution(const GeneratorMatrix& generator) {
  const int n = generator.size();
  // mu Q = 0 with sum(mu) = 1: replace the last equation of Q^T mu = 0 by the
  // normalization row.  n is small, a dense solve is robust.
  Eigen::MatrixXd system = generator.rates().transpose();
  system.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;

  const Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible())
    raise(errc::singular_system, "stationary system is singular");
  Eigen::VectorXd mu = lu.solve(rhs);

  const double residual = (mu.transpose() * generator.rates()).cwiseAbs().maxCoeff();
  if (residual > 1e-10 || mu.minCoeff() <= 0.0)
    raise(errc::singular_system, "stationary solve failed, residual " + std::to_string(residual));
  return {std::move(mu)};
}

bool is_reversible(const GeneratorMatrix& generator, const StationaryDistribution& mu,
                   double tolerance) {
  const int n = generator.size();
  const auto& q = generator.rates();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(mu.weights(i) * q(i, j) - mu.weights(j) * q(j, i)) > tolerance) return false;
  return true;
}

int ChainPath::state_at(double t) const {
  int state = initial_state;
  for (std::size_t k = 0; k < jump_times.size() && jump_times[k] <= t; ++k)
    state = states_after[k];
  return state;
}

ChainPath simulate_chain(const GeneratorMatrix& generator, int initial_state, double horizon,
                         std::uint64_t seed, std::uint64_t stream) {
  if (initial_state < 0 || initial_state >= generator.size())
    raise(errc::invalid_argument, "initial state out of range");
  if (!(horizon > 0.0)) raise(errc::invalid_argument, "horizon must be positive");

  const auto& q = generator.rates();
  rng::Stream draws(seed, rng::kPurposeChain, stream);

  ChainPath path;
  path.initial_state = initial_state;
  path.horizon = horizon;

  int state = initial_state;
  double t = 0.0;
  while (true) {
    const double exit_rate = -q(state, state);
    if (!(exit_rate > 0.0)) break;  // unreachable for validated generators
    t += draws.next_exponential(exit_rate);
    if (t > horizon) break;
    const int n = generator.size();
    const double u = draws.next_unit() * exit_rate;
    double acc = 0.0;
    int next = -1;
    for (int j = 0; j < n; ++j) {
      if (j == state) continue;
      acc += q(state, j);
      if (u <= acc) {
        next = j;
        break;
      }
    }
    if (next < 0) {  // guard against rounding at the top of the scan
      for (int j = n - 1; j >= 0; --j)
        if (j != state && q(state, j) > 0.0) {
          next = j;
          break;
        }
    }
    path.jump_times.push_back(t);
    path.states_after.push_back(next);
    state = next;
  }
  return path;
}

std::vector<int> chain_at_grid(const ChainPath& path, double delta, long steps) {
  if (!(delta > 0.0) || steps < 0) raise(errc::invalid_argument, "bad grid");
  if (static_cast<double>(steps) * delta > path.horizon * (1.0 + 1e-12))
    raise(errc::horizon_exceeded, "grid extends past the simulated horizon");

  std::vector<int> grid(static_cast<std::size_t>(steps) + 1);
  int state = path.initial_state;
  std::size_t jump = 0;
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * delta;
    while (jump < path.jump_times.size() && path.jump_times[jump] <= t) {
      state = path.states_after[jump];
      ++jump;
    }
    grid[static_cast<std::size_t>(k)] = state;
  }
  return grid;
}

SurvivalCurve coupling_tail(const GeneratorMatrix& generator, int state_a, int state_b,
                            double horizon, int n_paths, std::uint64_t seed, int grid_points) {
  if (state_a == state_b)
    raise(errc::invalid_argument, "coupling requires distinct initial states");
  if (n_paths <= 0) raise(errc::invalid_argument, "need at least one path");
  if (grid_points < 1) raise(errc::invalid_argument, "need at least one gridpoint");

  std::vector<double> meeting(static_cast<std::size_t>(n_paths));
  for (int p = 0; p < n_paths; ++p) {
    const auto a = simulate_chain(generator, state_a, horizon, seed, 2 * static_cast<std::uint64_t>(p));
    const auto b = simulate_chain(generator, state_b, horizon, seed, 2 * static_cast<std::uint64_t>(p) + 1);

    // States only change at jump instants, so the first meeting happens at one
    // of the merged event times.
    double tau = horizon + 1.0;  // censored marker
    std::size_t ia = 0, ib = 0;
    int sa = a.initial_state, sb = b.initial_state;
    while (true) {
      if (sa == sb) {
        const double ta = ia == 0 ? 0.0 : a.jump_times[ia - 1];
        const double tb = ib == 0 ? 0.0 : b.jump_times[ib - 1];
        tau = std::max(ta, tb);
        break;
      }
      const double next_a = ia < a.jump_times.size() ? a.jump_times[ia] : horizon + 1.0;
      const double next_b = ib < b.jump_times.size() ? b.jump_times[ib] : horizon + 1.0;
      if (next_a > horizon && next_b > horizon) break;
      if (next_a <= next_b) {
        sa = a.states_after[ia++];
      } else {
        sb = b.states_after[ib++];
      }
    }
    meeting[static_cast<std::size_t>(p)] = tau;
  }

  SurvivalCurve curve;
  curve.time.resize(static_cast<std::size_t>(grid_points) + 1);
  curve.survival.resize(curve.time.size());
  for (int g = 0; g <= grid_points; ++g) {
    const double t = horizon * static_cast<double>(g) / grid_points;
    long alive = 0;
    for (double tau : meeting)
      if (tau > t) ++alive;
    curve.time[static_cast<std::size_t>(g)] = t;
    curve.survival[static_cast<std::size_t>(g)] =
        static_cast<double>(alive) / static_cast<double>(n_paths);
  }
  return curve;
}

}  // namespace switchsde
