#include "switchsde/measure.hpp"

#include <algorithm>
#include <numeric>
#include <cmath>
#include <thread>

#include "switchsde/rng.hpp"
#include "switchsde/transport.hpp"

namespace switchsde {

namespace {

// Chunked parallel loop; workers write to disjoint, preallocated slots so the
// result never depends on scheduling.
void parallel_for(long count, const std::function<void(long)>& body) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = static_cast<unsigned>(std::min<long>(count, hw));
  if (workers <= 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (long i = w; i < count; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y, long count) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (long k = 0; k < count; ++k) {
    sx += x[static_cast<std::size_t>(k)];
    sy += y[static_cast<std::size_t>(k)];
    sxx += x[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
    sxy += x[static_cast<std::size_t>(k)] * y[static_cast<std::size_t>(k)];
  }
  const double nd = static_cast<double>(count);
  const double denom = nd * sxx - sx * sx;
  LineFit fit;
  fit.slope = (nd * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / nd;
  return fit;
}

}  // namespace

void EmpiricalMeasure::check() const {
  if (size() == 0) raise(errc::empty_support, "measure has no samples");
  if (static_cast<long>(states.size()) != size())
    raise(errc::invalid_argument, "state column does not match the sample count");
  if (!uniform()) {
    if (weights.size() != size())
      raise(errc::invalid_argument, "weight column does not match the sample count");
    if (weights.minCoeff() < 0.0) raise(errc::invalid_argument, "weights must be nonnegative");
    if (std::abs(weights.sum() - 1.0) > 1e-12)
      raise(errc::invalid_argument, "weights must sum to one");
  }
}

double hybrid_distance(const Eigen::VectorXd& x, int state_x, const Eigen::VectorXd& y,
                       int state_y, double p) {
  if (!(p > 0.0 && p <= 1.0)) raise(errc::invalid_argument, "order must lie in (0, 1]");
  if (x.size() != y.size()) raise(errc::length_mismatch, "points live in different dimensions");
  const double base = (x - y).norm() + (state_x == state_y ? 0.0 : 1.0);
  return std::pow(base, p);
}

double wasserstein_p(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p) {
  mu.check();
  nu.check();
  if (!(p > 0.0 && p <= 1.0)) raise(errc::invalid_argument, "order must lie in (0, 1]");
  if (mu.points.cols() != nu.points.cols())
    raise(errc::length_mismatch, "measures live in different dimensions");

  const long a = mu.size();
  const long b = nu.size();
  Eigen::MatrixXd cost(a, b);
  for (long i = 0; i < a; ++i)
    for (long j = 0; j < b; ++j)
      cost(i, j) = hybrid_distance(mu.points.row(i), mu.states[static_cast<std::size_t>(i)],
                                   nu.points.row(j), nu.states[static_cast<std::size_t>(j)], p);

  if (mu.uniform() && nu.uniform() && a == b)
    return solve_assignment(cost) / static_cast<double>(a);

  const Eigen::VectorXd supply =
      mu.uniform() ? Eigen::VectorXd::Constant(a, 1.0 / static_cast<double>(a)) : mu.weights;
  const Eigen::VectorXd demand =
      nu.uniform() ? Eigen::VectorXd::Constant(b, 1.0 / static_cast<double>(b)) : nu.weights;
  return solve_transport(cost, supply, demand);
}

EmpiricalMeasure estimate_invariant(const RegimeModel& model, const GeneratorMatrix& generator,
                                    const SimulationConfig& cfg, long burn_in, long thin,
                                    long n_samples) {
  if (burn_in < 0 || thin < 1 || n_samples < 1)
    raise(errc::invalid_argument, "bad sampling parameters");
  SimulationConfig run = cfg;
  run.steps = burn_in + thin * n_samples;
  run.record_stride = 1;

  EmpiricalMeasure measure;
  measure.points.resize(n_samples, model.dim);
  measure.states.resize(static_cast<std::size_t>(n_samples));
  long collected = 0;
  run_scheme(model, generator, run, [&](long k, int regime, const Eigen::VectorXd& x) {
    if (k <= burn_in || (k - burn_in) % thin != 0 || collected >= n_samples) return;
    measure.points.row(collected) = x.transpose();
    measure.states[static_cast<std::size_t>(collected)] = regime;
    ++collected;
  });
  measure.points.conservativeResize(collected, model.dim);
  measure.states.resize(static_cast<std::size_t>(collected));
  return measure;
}

ContractionResult contraction_experiment(const RegimeModel& model,
                                         const GeneratorMatrix& generator,
                                         const SimulationConfig& cfg, const Eigen::VectorXd& x0,
                                         const Eigen::VectorXd& y0, double p, int n_paths,
                                         int bootstrap_rounds) {
  if ((x0 - y0).norm() == 0.0)
    raise(errc::invalid_argument, "starting points coincide; the difference is identically zero");
  if (n_paths < 2) raise(errc::invalid_argument, "need at least two paths");
  if (!(p > 0.0)) raise(errc::invalid_argument, "order must be positive");

  const long records = cfg.steps / cfg.record_stride + 1;
  Eigen::MatrixXd moment(n_paths, records);  // |dY|^p per path per gridpoint

  parallel_for(n_paths, [&](long path) {
    SimulationConfig leg = cfg;
    leg.x0 = x0;
    leg.stream = static_cast<std::uint64_t>(path);
    const auto pair = simulate_coupled(model, generator, leg, y0);
    for (long r = 0; r < records; ++r) {
      const double gap = (pair.first.values.row(r) - pair.second.values.row(r)).norm();
      moment(path, r) = std::pow(gap, p);
    }
  });

  ContractionResult result;
  result.time.resize(static_cast<std::size_t>(records));
  result.log_mean.resize(static_cast<std::size_t>(records));
  const double floor = 1e-12;
  long window = 0;
  for (long r = 0; r < records; ++r) {
    const double mean = moment.col(r).mean();
    result.time[static_cast<std::size_t>(r)] =
        static_cast<double>(r * cfg.record_stride) * cfg.delta;
    result.log_mean[static_cast<std::size_t>(r)] = std::log(std::max(mean, 1e-300));
    if (mean > floor && window == r) ++window;  // leading window above the floor
  }
  result.window = window;
  if (window < 2) raise(errc::degenerate_window, "mean difference sits at the numeric floor");

  const LineFit fit = least_squares(result.time, result.log_mean, window);
  result.slope = fit.slope;

  // Bootstrap over paths.
  std::vector<double> slopes(static_cast<std::size_t>(bootstrap_rounds));
  parallel_for(bootstrap_rounds, [&](long round) {
    rng::Stream draws(cfg.seed, rng::kPurposeBootstrap, static_cast<std::uint64_t>(round));
    Eigen::VectorXd resampled = Eigen::VectorXd::Zero(window);
    for (int s = 0; s < n_paths; ++s) {
      const long pick = static_cast<long>(draws.next_unit() * n_paths) % n_paths;
      resampled += moment.row(pick).head(window).transpose();
    }
    std::vector<double> logs(static_cast<std::size_t>(window));
    for (long r = 0; r < window; ++r)
      logs[static_cast<std::size_t>(r)] =
          std::log(std::max(resampled(r) / static_cast<double>(n_paths), 1e-300));
    slopes[static_cast<std::size_t>(round)] = least_squares(result.time, logs, window).slope;
  });
  std::sort(slopes.begin(), slopes.end());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(slopes.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, slopes.size() - 1);
    return slopes[lo] + (pos - static_cast<double>(lo)) * (slopes[hi] - slopes[lo]);
  };
  result.slope_ci_low = quantile(0.025);
  result.slope_ci_high = quantile(0.975);
  return result;
}

namespace {

// First `count` entries of a tagged random permutation of [0, n).
std::vector<long> subsample_indices(long n, long count, std::uint64_t seed, std::uint64_t tag) {
  std::vector<long> indices(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) indices[static_cast<std::size_t>(i)] = i;
  rng::Stream draws(seed, rng::kPurposeSubsample, tag);
  const long m = std::min(count, n);
  for (long i = 0; i < m; ++i) {
    const long j = i + static_cast<long>(draws.next_unit() * static_cast<double>(n - i)) % (n - i);
    std::swap(indices[static_cast<std::size_t>(i)], indices[static_cast<std::size_t>(j)]);
  }
  indices.resize(static_cast<std::size_t>(m));
  return indices;
}

EmpiricalMeasure gather(const EmpiricalMeasure& measure, const std::vector<long>& indices,
                        std::size_t offset, std::size_t count) {
  EmpiricalMeasure out;
  out.points.resize(static_cast<long>(count), measure.points.cols());
  out.states.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const long pick = indices[offset + i];
    out.points.row(static_cast<long>(i)) = measure.points.row(pick);
    out.states[i] = measure.states[static_cast<std::size_t>(pick)];
  }
  return out;
}

}  // namespace

StudyResult convergence_study(const RegimeModel& model, const GeneratorMatrix& generator,
                              const std::vector<double>& deltas, double reference_delta, double p,
                              const StudyBudget& budget, const Eigen::VectorXd& x0, int i0,
                              std::uint64_t seed) {
  if (deltas.empty()) raise(errc::invalid_argument, "need at least one stepsize");
  for (double d : deltas)
    if (!(d > 0.0 && d < 1.0)) raise(errc::invalid_argument, "stepsizes must lie in (0, 1)");
  if (!(reference_delta > 0.0 && reference_delta < *std::min_element(deltas.begin(), deltas.end())))
    raise(errc::invalid_argument, "reference stepsize must be below every study stepsize");
  if (budget.subsample > 2000)
    raise(errc::invalid_argument, "subsample size capped at 2000 (cubic assignment cost)");

  const bool degenerate =
      std::adjacent_find(deltas.begin(), deltas.end(), std::not_equal_to<>()) == deltas.end() &&
      deltas.size() > 1;
  if (degenerate)
    raise(errc::degenerate_window, "identical stepsizes leave the slope undefined");

  // Runs at different stepsizes inside one parent share the driving
  // randomness: the same chain realization in time and the same underlying
  // fine Brownian path, with coarse increments formed as sums of fine ones.
  // Distances then compare time-matched samples, so the wild tail excursions
  // hit both sides together and cancel out of the measured gap.  This needs
  // every stepsize to be an integer multiple of the reference; otherwise the
  // runs fall back to independent sampling.
  const long k = static_cast<long>(deltas.size());
  const int parents = std::max(1, budget.parents);
  const double coarsest = *std::max_element(deltas.begin(), deltas.end());

  std::vector<long> ratio(static_cast<std::size_t>(k + 1), 1);
  bool coupled = true;
  for (long idx = 0; idx < k; ++idx) {
    const double raw = deltas[static_cast<std::size_t>(idx)] / reference_delta;
    ratio[static_cast<std::size_t>(idx)] = std::llround(raw);
    if (std::abs(raw - static_cast<double>(ratio[static_cast<std::size_t>(idx)])) > 1e-9)
      coupled = false;
  }
  // fine steps per sampling interval and per burn-in, shared across runs
  const long fine_interval =
      std::llround(static_cast<double>(budget.thin) * coarsest / reference_delta);
  for (long idx = 0; idx < k && coupled; ++idx)
    if (fine_interval % ratio[static_cast<std::size_t>(idx)] != 0) coupled = false;
  const long fine_burn =
      std::max<long>(1, std::llround(budget.burn_in_fraction / (1.0 - budget.burn_in_fraction) *
                                     static_cast<double>(budget.n_samples))) *
      fine_interval;
  const long fine_total = fine_burn + fine_interval * budget.n_samples;

  auto coupled_measure = [&](long steps_per, std::uint64_t stream, const ChainPath& path) {
    const double delta = static_cast<double>(steps_per) * reference_delta;
    const long thin = fine_interval / steps_per;
    const long burn = fine_burn / steps_per;
    const long steps = fine_total / steps_per;
    const std::vector<int> regimes = chain_at_grid(path, delta, steps);
    const double root = std::sqrt(reference_delta);

    EmpiricalMeasure out;
    out.points.resize(budget.n_samples, model.dim);
    out.states.resize(static_cast<std::size_t>(budget.n_samples));
    Eigen::VectorXd x = x0;
    long collected = 0;
    for (long step = 0; step < steps && collected < budget.n_samples; ++step) {
      Eigen::VectorXd dw = Eigen::VectorXd::Zero(model.wiener_dim);
      for (long j = 0; j < steps_per; ++j)
        for (int c = 0; c < model.wiener_dim; ++c)
          dw(c) += rng::normal_at(seed, rng::kPurposeBrownian, stream,
                                  static_cast<std::uint64_t>(step * steps_per + j),
                                  static_cast<std::uint32_t>(c));
      dw *= root;
      x = em_step(model, x, regimes[static_cast<std::size_t>(step)], delta, dw);
      if (step + 1 > burn && (step + 1 - burn) % thin == 0) {
        out.points.row(collected) = x.transpose();
        out.states[static_cast<std::size_t>(collected)] =
            regimes[static_cast<std::size_t>(step + 1)];
        ++collected;
      }
    }
    return out;
  };

  auto independent_measure = [&](double delta, std::uint64_t stream) {
    SimulationConfig cfg;
    cfg.delta = delta;
    cfg.x0 = x0;
    cfg.i0 = i0;
    cfg.seed = seed;
    cfg.stream = stream;
    const double interval = static_cast<double>(budget.thin) * coarsest;
    const long thin = std::max<long>(1, std::llround(interval / delta));
    const long burn = std::llround(budget.burn_in_fraction / (1.0 - budget.burn_in_fraction) *
                                   static_cast<double>(thin * budget.n_samples));
    return estimate_invariant(model, generator, cfg, burn, thin, budget.n_samples);
  };

  std::vector<std::vector<EmpiricalMeasure>> measures(static_cast<std::size_t>(k + 1));
  for (auto& family : measures) family.resize(static_cast<std::size_t>(parents));
  if (coupled) {
    std::vector<ChainPath> paths(static_cast<std::size_t>(parents));
    parallel_for(parents, [&](long par) {
      const double horizon =
          static_cast<double>(fine_total) * reference_delta + coarsest;  // padded
      paths[static_cast<std::size_t>(par)] =
          simulate_chain(generator, i0, horizon, seed, 100 + static_cast<std::uint64_t>(par));
    });
    parallel_for((k + 1) * parents, [&](long job) {
      const long family = job / parents;
      const int par = static_cast<int>(job % parents);
      measures[static_cast<std::size_t>(family)][static_cast<std::size_t>(par)] =
          coupled_measure(ratio[static_cast<std::size_t>(family)],
                          100 + static_cast<std::uint64_t>(par),
                          paths[static_cast<std::size_t>(par)]);
    });
  } else {
    parallel_for((k + 1) * parents, [&](long job) {
      const long family = job / parents;
      const int par = static_cast<int>(job % parents);
      const double delta =
          family < k ? deltas[static_cast<std::size_t>(family)] : reference_delta;
      measures[static_cast<std::size_t>(family)][static_cast<std::size_t>(par)] =
          independent_measure(delta, 100 * (1 + static_cast<std::uint64_t>(family)) +
                                         static_cast<std::uint64_t>(par));
    });
  }
  const auto& reference = measures[static_cast<std::size_t>(k)];

  const int reps = budget.replicates;
  const long m = budget.subsample;
  Eigen::MatrixXd dist(k, reps);
  Eigen::VectorXd floor_reps(reps);
  parallel_for(static_cast<long>(reps) * (k + 1), [&](long job) {
    const long idx = job / reps;
    const int r = static_cast<int>(job % reps);
    const std::uint64_t tag = static_cast<std::uint64_t>(job);
    const std::size_t par = static_cast<std::size_t>(r % parents);
    if (idx < k) {
      // one index set applied to both runs keeps the pairs time-matched
      const auto indices =
          subsample_indices(budget.n_samples, m, seed, 2 * tag);
      const auto a = gather(measures[static_cast<std::size_t>(idx)][par], indices, 0,
                            static_cast<std::size_t>(indices.size()));
      const auto b =
          gather(reference[par], indices, 0, static_cast<std::size_t>(indices.size()));
      dist(idx, r) = wasserstein_p(a, b, p);
    } else {
      // noise floor: two disjoint halves of the same reference run
      const auto indices = subsample_indices(budget.n_samples, 2 * m, seed, 2 * tag + 1);
      const std::size_t half = indices.size() / 2;
      const auto a = gather(reference[par], indices, 0, half);
      const auto b = gather(reference[par], indices, half, half);
      floor_reps(r) = wasserstein_p(a, b, p);
    }
  });

  const auto median_of = [](std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  };
  // Bootstrap scatter of the replicate median.
  const auto median_se = [&](const Eigen::VectorXd& values, std::uint64_t tag) {
    const int rounds = 400;
    std::vector<double> medians(static_cast<std::size_t>(rounds));
    for (int round = 0; round < rounds; ++round) {
      rng::Stream draws(seed, rng::kPurposeBootstrap,
                        (tag << 32) ^ static_cast<std::uint64_t>(round));
      std::vector<double> resampled(static_cast<std::size_t>(values.size()));
      for (Eigen::Index s = 0; s < values.size(); ++s)
        resampled[static_cast<std::size_t>(s)] =
            values(static_cast<Eigen::Index>(draws.next_unit() * values.size()) % values.size());
      medians[static_cast<std::size_t>(round)] = median_of(std::move(resampled));
    }
    const double mean = std::accumulate(medians.begin(), medians.end(), 0.0) / rounds;
    double var = 0.0;
    for (double m : medians) var += (m - mean) * (m - mean);
    return std::sqrt(var / (rounds - 1));
  };

  StudyResult result;
  result.reference_delta = reference_delta;
  result.rows.resize(static_cast<std::size_t>(k));
  Eigen::VectorXd mean(k), se(k);
  for (long idx = 0; idx < k; ++idx) {
    const Eigen::VectorXd row_copy = dist.row(idx).transpose();
    std::vector<double> row_values(row_copy.data(), row_copy.data() + reps);
    mean(idx) = median_of(row_values);
    se(idx) = median_se(dist.row(idx).transpose(), 7000 + static_cast<std::uint64_t>(idx));
    auto& row = result.rows[static_cast<std::size_t>(idx)];
    row.delta = deltas[static_cast<std::size_t>(idx)];
    row.distance = mean(idx);
    row.std_error = se(idx);
    row.n_samples = budget.n_samples;
    row.seed = seed;
  }
  {
    std::vector<double> floor_values(floor_reps.data(), floor_reps.data() + reps);
    result.noise_floor = median_of(floor_values);
    result.noise_floor_se = median_se(floor_reps, 9000);
  }

  // Log-log fit over deltas.
  std::vector<double> lx(static_cast<std::size_t>(k)), ly(static_cast<std::size_t>(k));
  for (long idx = 0; idx < k; ++idx) {
    lx[static_cast<std::size_t>(idx)] = std::log(deltas[static_cast<std::size_t>(idx)]);
    ly[static_cast<std::size_t>(idx)] = std::log(std::max(mean(idx), 1e-300));
  }
  if (k >= 2) result.slope = least_squares(lx, ly, k).slope;

  // Bootstrap the slope over replicate distances.
  std::vector<double> slopes;
  slopes.reserve(static_cast<std::size_t>(budget.bootstrap_rounds));
  for (int round = 0; round < budget.bootstrap_rounds && k >= 2; ++round) {
    rng::Stream draws(seed, rng::kPurposeBootstrap, 1000 + static_cast<std::uint64_t>(round));
    std::vector<double> boot_y(static_cast<std::size_t>(k));
    for (long idx = 0; idx < k; ++idx) {
      std::vector<double> resampled(static_cast<std::size_t>(reps));
      for (int s = 0; s < reps; ++s)
        resampled[static_cast<std::size_t>(s)] =
            dist(idx, static_cast<int>(draws.next_unit() * reps) % reps);
      boot_y[static_cast<std::size_t>(idx)] =
          std::log(std::max(median_of(std::move(resampled)), 1e-300));
    }
    slopes.push_back(least_squares(lx, boot_y, k).slope);
  }
  if (!slopes.empty()) {
    std::sort(slopes.begin(), slopes.end());
    const auto quantile = [&](double q) {
      const double pos = q * static_cast<double>(slopes.size() - 1);
      const std::size_t lo = static_cast<std::size_t>(pos);
      const std::size_t hi = std::min(lo + 1, slopes.size() - 1);
      return slopes[lo] + (pos - static_cast<double>(lo)) * (slopes[hi] - slopes[lo]);
    };
    result.slope_ci_low = quantile(0.025);
    result.slope_ci_high = quantile(0.975);
  }

  // Deltas sorted descending: distances should not increase, up to noise.
  std::vector<long> order(static_cast<std::size_t>(k));
  for (long idx = 0; idx < k; ++idx) order[static_cast<std::size_t>(idx)] = idx;
  std::sort(order.begin(), order.end(), [&](long a, long b) {
    return deltas[static_cast<std::size_t>(a)] > deltas[static_cast<std::size_t>(b)];
  });
  result.non_increasing_within_se = true;
  for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
    const long hi = order[pos], lo = order[pos + 1];
    const double allowance = std::sqrt(se(hi) * se(hi) + se(lo) * se(lo));
    if (mean(lo) > mean(hi) + allowance) result.non_increasing_within_se = false;
  }
  result.all_below_floor = true;
  result.all_at_floor_within_2se = true;
  for (long idx = 0; idx < k; ++idx) {
    if (mean(idx) > result.noise_floor) result.all_below_floor = false;
    const double allowance =
        2.0 * std::sqrt(se(idx) * se(idx) + result.noise_floor_se * result.noise_floor_se);
    if (mean(idx) > result.noise_floor + allowance) result.all_at_floor_within_2se = false;
  }
  return result;
}

}  // namespace switchsde
