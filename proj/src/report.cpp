#include "switchsde/report.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>

#include "switchsde/dirichlet.hpp"

namespace switchsde {

namespace {

[[noreturn]] void config_fail(const std::string& field, const std::string& message) {
  raise(errc::config_error, field + ": " + message);
}

double require_number(const json& node, const std::string& field) {
  if (!node.is_number()) config_fail(field, "expected a number");
  return node.get<double>();
}

Eigen::VectorXd parse_vector(const json& node, const std::string& field) {
  if (!node.is_array()) config_fail(field, "expected an array of numbers");
  Eigen::VectorXd out(node.size());
  for (std::size_t i = 0; i < node.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = require_number(node[i], field + "[" + std::to_string(i) + "]");
  return out;
}

Eigen::MatrixXd parse_matrix(const json& node, const std::string& field) {
  if (!node.is_array() || node.empty()) config_fail(field, "expected a nested array");
  const std::size_t rows = node.size();
  const std::size_t cols = node[0].is_array() ? node[0].size() : 0;
  if (cols == 0) config_fail(field, "expected a nested array");
  Eigen::MatrixXd out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!node[i].is_array() || node[i].size() != cols)
      config_fail(field + "[" + std::to_string(i) + "]", "ragged row");
    for (std::size_t j = 0; j < cols; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          require_number(node[i][j], field + "[" + std::to_string(i) + "]");
  }
  return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

json finite_or_null(double value) {
  if (std::isfinite(value)) return value;
  return nullptr;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(errc::config_error, "cannot open " + path + " for writing");
  out << text;
}

}  // namespace

std::string format_double(double value) {
  char buffer[40];
  const auto res = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                 std::chars_format::scientific, 16);
  return std::string(buffer, res.ptr);
}

RunConfig RunConfig::parse(const json& document) {
  if (!document.is_object()) config_fail("$", "config must be an object");
  RunConfig cfg;

  if (document.contains("seed")) {
    if (!document["seed"].is_number_unsigned() && !document["seed"].is_number_integer())
      config_fail("seed", "expected an integer");
    cfg.seed = document["seed"].get<std::uint64_t>();
  } else {
    std::random_device entropy;
    cfg.seed = (static_cast<std::uint64_t>(entropy()) << 32) ^ entropy();
    cfg.seed_was_generated = true;
  }

  if (!document.contains("model")) config_fail("model", "section missing");
  const json& model = document["model"];
  if (model.contains("builtin")) {
    cfg.builtin = model["builtin"].get<std::string>();
    cfg.builtin_params = model.value("params", json::object());
  } else if (model.contains("linear")) {
    const json& lin = model["linear"];
    if (!lin.contains("alpha")) config_fail("model.linear.alpha", "field missing");
    if (!lin.contains("sigma")) config_fail("model.linear.sigma", "field missing");
    cfg.linear_alpha = parse_vector(lin["alpha"], "model.linear.alpha");
    cfg.linear_sigma = parse_vector(lin["sigma"], "model.linear.sigma");
    const std::string noise = lin.value("noise", "additive");
    if (noise == "additive") {
      cfg.linear_noise = NoiseKind::additive;
    } else if (noise == "multiplicative") {
      cfg.linear_noise = NoiseKind::multiplicative;
    } else {
      config_fail("model.linear.noise", "expected 'additive' or 'multiplicative'");
    }
    if (cfg.linear_alpha.size() != cfg.linear_sigma.size())
      config_fail("model.linear", "alpha and sigma lengths differ");
    cfg.has_linear = true;
  } else {
    config_fail("model", "need either 'builtin' or 'linear'");
  }
  if (model.contains("freeze_regime"))
    cfg.freeze_regime = model["freeze_regime"].get<int>();

  if (document.contains("generator")) {
    const json& gen = document["generator"];
    if (!gen.contains("rates")) config_fail("generator.rates", "field missing");
    cfg.generator_rates = parse_matrix(gen["rates"], "generator.rates");
  } else if (cfg.has_linear) {
    config_fail("generator", "section required for an explicit linear model");
  }

  if (document.contains("analysis")) {
    const json& analysis = document["analysis"];
    if (analysis.contains("certificates")) {
      cfg.certificates.clear();
      for (const auto& entry : analysis["certificates"])
        cfg.certificates.push_back(entry.get<std::string>());
    }
    if (analysis.contains("partition_cuts"))
      for (const auto& cut : analysis["partition_cuts"])
        cfg.partition_cuts.push_back(require_number(cut, "analysis.partition_cuts"));
  }

  if (document.contains("simulation")) {
    const json& sim = document["simulation"];
    cfg.delta = require_number(sim.value("delta", json(cfg.delta)), "simulation.delta");
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
      config_fail("simulation.delta", "stepsize must lie in (0, 1)");
    cfg.steps = sim.value("steps", cfg.steps);
    if (cfg.steps < 1) config_fail("simulation.steps", "must be positive");
    if (sim.contains("x0")) cfg.x0 = parse_vector(sim["x0"], "simulation.x0");
    cfg.i0 = sim.value("i0", cfg.i0);
    cfg.record_stride = sim.value("record_stride", cfg.record_stride);
    cfg.burn_in = sim.value("burn_in", cfg.burn_in);
    cfg.thin = sim.value("thin", cfg.thin);
  }

  if (document.contains("study")) {
    const json& study = document["study"];
    if (study.contains("deltas"))
      for (const auto& d : study["deltas"])
        cfg.study_deltas.push_back(require_number(d, "study.deltas"));
    if (study.contains("reference_delta"))
      cfg.reference_delta = require_number(study["reference_delta"], "study.reference_delta");
    cfg.study_p = study.value("p", cfg.study_p);
    cfg.budget.n_samples = study.value("n_samples", cfg.budget.n_samples);
    cfg.budget.parents = study.value("parents", cfg.budget.parents);
    cfg.budget.subsample = study.value("subsample", cfg.budget.subsample);
    cfg.budget.replicates = study.value("replicates", cfg.budget.replicates);
    cfg.budget.thin = study.value("thin", cfg.budget.thin);
    cfg.budget.burn_in_fraction = study.value("burn_in_fraction", cfg.budget.burn_in_fraction);
    cfg.budget.bootstrap_rounds = study.value("bootstrap_rounds", cfg.budget.bootstrap_rounds);
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(errc::config_error, "cannot read config file " + path);
  json document;
  try {
    in >> document;
  } catch (const json::parse_error& e) {
    raise(errc::config_error, std::string("config parse error: ") + e.what());
  }
  return parse(document);
}

json RunConfig::to_json() const {
  json document;
  document["seed"] = seed;
  json model;
  if (!builtin.empty()) {
    model["builtin"] = builtin;
    model["params"] = builtin_params;
  } else {
    model["linear"] = {
        {"alpha", vector_to_json(linear_alpha)},
        {"sigma", vector_to_json(linear_sigma)},
        {"noise", linear_noise == NoiseKind::additive ? "additive" : "multiplicative"}};
  }
  if (freeze_regime) model["freeze_regime"] = *freeze_regime;
  document["model"] = model;
  if (generator_rates) document["generator"] = {{"rates", matrix_to_json(*generator_rates)}};
  document["analysis"] = {{"certificates", certificates}};
  if (!partition_cuts.empty()) document["analysis"]["partition_cuts"] = partition_cuts;
  document["simulation"] = {{"delta", delta},
                            {"steps", steps},
                            {"x0", vector_to_json(x0.size() ? x0 : Eigen::VectorXd::Ones(1))},
                            {"i0", i0},
                            {"record_stride", record_stride},
                            {"burn_in", burn_in},
                            {"thin", thin}};
  if (!study_deltas.empty()) {
    document["study"] = {{"deltas", study_deltas},
                         {"reference_delta", reference_delta},
                         {"p", study_p},
                         {"n_samples", budget.n_samples},
                         {"parents", budget.parents},
                         {"subsample", budget.subsample},
                         {"replicates", budget.replicates},
                         {"thin", budget.thin},
                         {"burn_in_fraction", budget.burn_in_fraction},
                         {"bootstrap_rounds", budget.bootstrap_rounds}};
  }
  return document;
}

BuiltinModel resolve_model(const RunConfig& config, const ToleranceProfile& tol) {
  BuiltinModel built = [&]() -> BuiltinModel {
    if (config.builtin == "switching_ou") {
      const double gamma = config.builtin_params.value("gamma", 1.0);
      const double sigma0 = config.builtin_params.value("sigma0", 1.0);
      const double sigma1 = config.builtin_params.value("sigma1", 1.0);
      return make_switching_ou(gamma, sigma0, sigma1);
    }
    if (config.builtin == "switching_linear3") {
      return make_switching_linear3(config.builtin_params.value("nu", 0.0));
    }
    if (config.builtin == "birth_death_linear") {
      const double a = config.builtin_params.value("a", 3.0);
      const double b = config.builtin_params.value("b", 1.0);
      Eigen::Vector3d alpha(-2.0, 0.0, 0.5), sigma(1.0, 1.0, 1.0);
      const auto read3 = [](const json& node, const std::string& field) {
        const Eigen::VectorXd v = parse_vector(node, field);
        if (v.size() != 3) config_fail(field, "expected three entries");
        return Eigen::Vector3d(v(0), v(1), v(2));
      };
      if (config.builtin_params.contains("alpha"))
        alpha = read3(config.builtin_params["alpha"], "model.params.alpha");
      if (config.builtin_params.contains("sigma"))
        sigma = read3(config.builtin_params["sigma"], "model.params.sigma");
      return make_birth_death_linear(a, b, alpha, sigma);
    }
    if (!config.builtin.empty())
      config_fail("model.builtin", "unknown builtin '" + config.builtin + "'");
    RegimeModel model =
        make_scalar_linear("linear", config.linear_alpha, config.linear_sigma, config.linear_noise);
    return {std::move(model), GeneratorMatrix::validate(*config.generator_rates, tol)};
  }();

  if (config.generator_rates && !config.builtin.empty())
    built.generator = GeneratorMatrix::validate(*config.generator_rates, tol);
  if (built.model.n_regimes != built.generator.size())
    config_fail("generator.rates", "size does not match the number of regimes");
  if (config.freeze_regime)
    built.model = frozen_regime(built.model, *config.freeze_regime);
  return built;
}

namespace {

json certificate_common(const SpectralReport& spectral) {
  json cert;
  cert["averaging_sum"] = spectral.averaging.sum;
  cert["p0"] = finite_or_null(spectral.p0);
  cert["star6"] = spectral.star6;
  return cert;
}

json spectral_certificate_json(const SpectralReport& spectral, const RegimeBounds& bounds) {
  json cert = certificate_common(spectral);
  cert["kind"] = "spectral";
  const SpectralCertificate* shown =
      spectral.best ? &*spectral.best : (spectral.cert2 ? &*spectral.cert2 : nullptr);
  cert["p"] = shown ? json(shown->p) : json(nullptr);
  cert["eta_p"] = shown ? json(shown->eta) : json(nullptr);
  cert["xi"] = shown ? vector_to_json(shown->xi) : json(nullptr);
  cert["alpha"] = spectral.additive ? json(spectral.additive->rate_constant) : json(nullptr);
  cert["beta_mult"] = std::isfinite(spectral.beta_mult) ? json(spectral.beta_mult) : json(nullptr);
  cert["delta_max_additive"] =
      spectral.additive ? json(spectral.additive->delta_max) : json(nullptr);
  cert["delta_max_multiplicative"] =
      spectral.multiplicative ? json(spectral.multiplicative->delta_max) : json(nullptr);

  json grid = json::array();
  for (const auto& point : spectral.grid)
    grid.push_back({{"p", point.p},
                    {"eta_p", point.eta},
                    {"alpha", point.alpha},
                    {"delta_max", point.delta_max}});
  cert["eta_grid"] = grid;
  (void)bounds;
  return cert;
}

json reversible_certificate_json(const SpectralReport& spectral, const GeneratorMatrix& generator,
                                 const RegimeBounds& bounds) {
  json cert = certificate_common(spectral);
  cert["kind"] = "reversible";
  DirichletProblem problem = DirichletProblem::make(generator, bounds.beta);
  EigenCertificate eigen = principal_eigenvalue(problem);
  cert["p"] = 2.0;
  cert["eta_p"] = eigen.lambda0;  // lambda_0 plays the role of the decay rate
  cert["xi"] = vector_to_json(eigen.xi);
  cert["alpha"] = nullptr;
  cert["ground_positive"] = eigen.ground_positive;
  if (eigen.lambda0 > 0.0 && eigen.ground_positive) {
    const StepsizeBound bound = kappa_and_delta(problem, eigen, bounds);
    cert["beta_mult"] = eigen.kappa;  // kappa plays the role of the rate constant
    cert["delta_max_multiplicative"] = bound.delta_max;
  } else {
    cert["beta_mult"] = nullptr;
    cert["delta_max_multiplicative"] = nullptr;
  }
  cert["delta_max_additive"] = nullptr;
  return cert;
}

json partition_certificate_json(const GeneratorMatrix& generator, const RegimeBounds& bounds,
                                const std::vector<double>& cuts_in) {
  const CountableRegimeSpec spec =
      CountableRegimeSpec::finite(generator.rates(), bounds.beta);
  std::vector<double> cuts = cuts_in;
  if (cuts.empty()) {
    // default: one class per distinct beta value
    std::vector<double> sorted(bounds.beta.data(), bounds.beta.data() + bounds.beta.size());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
      cuts.push_back(0.5 * (sorted[i] + sorted[i + 1]));
  }
  const Partition partition = build_partition(spec, cuts);
  const LumpedGenerator lumped = lumped_generator(spec, partition);
  const LumpedCertificate cert = partition_certificate(lumped.rates, lumped.beta);

  json out;
  out["kind"] = "partition";
  out["cuts"] = cuts;
  out["QF"] = matrix_to_json(cert.qf);
  out["beta_F"] = vector_to_json(cert.beta_f);
  out["A"] = matrix_to_json(cert.a);
  out["verdict"] = cert.is_m;
  out["eta_F"] = cert.is_m ? vector_to_json(cert.eta_f) : json(nullptr);
  out["xi_F"] = cert.is_m ? vector_to_json(cert.xi_f) : json(nullptr);
  out["ergodicity_declared"] = cert.ergodicity_declared;

  // Stepsize guidance from the multiplicative bound on the lumped system;
  // heuristic only, no theorem backs the constant.
  out["delta_max_heuristic"] = nullptr;
  out["heuristic_note"] = "lumped-system multiplicative bound; not a proved constant";
  if (cert.is_m && cert.qf.rows() >= 2) {
    try {
      const GeneratorMatrix lumped_generator_matrix = GeneratorMatrix::validate(cert.qf);
      RegimeBounds lumped_bounds = bounds;
      lumped_bounds.beta = cert.beta_f;
      const SpectralReport lumped_report =
          certify_spectral(lumped_generator_matrix, lumped_bounds, false);
      if (lumped_report.multiplicative)
        out["delta_max_heuristic"] = lumped_report.multiplicative->delta_max;
    } catch (const Error&) {
      // lumped chain may be reducible or otherwise out of scope; skip
    }
  }
  return out;
}

// Warning when a requested stepsize exceeds every certified bound the model
// admits; the experiments proceed regardless.
std::optional<std::string> certified_delta_warning(const BuiltinModel& built, double delta) {
  try {
    const SpectralReport report = certify_spectral(built.generator, built.model.bounds,
                                                   built.model.kind == NoiseKind::additive);
    double best = 0.0;
    if (report.additive) best = std::max(best, report.additive->delta_max);
    if (report.multiplicative) best = std::max(best, report.multiplicative->delta_max);
    if (best > 0.0 && delta > best) {
      return "stepsize " + format_double(delta) + " exceeds the certified bound " +
             format_double(best) + "; proceeding uncertified";
    }
  } catch (const Error&) {
    // no certificate available for this model; nothing to compare against
  }
  return std::nullopt;
}

}  // namespace

CommandResult cmd_certify(const RunConfig& config, const std::string& out_dir,
                          const ToleranceProfile& tol) {
  CommandResult result;
  const BuiltinModel built = resolve_model(config, tol);
  const GeneratorMatrix& generator = built.generator;
  const RegimeBounds& bounds = built.model.bounds;

  const bool additive = built.model.kind == NoiseKind::additive;
  const SpectralReport spectral = certify_spectral(generator, bounds, additive);
  const StationaryDistribution mu = stationary_distribution(generator);

  json report;
  report["seed"] = config.seed;
  if (config.seed_was_generated) report["seed_generated"] = true;
  report["model"] = built.model.name;
  report["mu"] = vector_to_json(mu.weights);
  report["averaging_sum"] = spectral.averaging.sum;
  report["averaging_holds"] = spectral.averaging.holds;
  report["p0"] = finite_or_null(spectral.p0);
  report["star6"] = spectral.star6;
  json warnings = json::array();
  if (!spectral.averaging.holds)
    warnings.push_back("averaging condition fails; the moment threshold p0 is meaningless");

  json certificates = json::array();
  bool certified = false;
  for (const std::string& kind : config.certificates) {
    if (kind == "spectral") {
      json cert = spectral_certificate_json(spectral, bounds);
      if (additive && spectral.averaging.holds) {
        // Secondary evaluation under the halved dissipativity convention
        // (one-sided bounds stated without the factor 2).
        RegimeBounds halved = bounds;
        halved.beta *= 0.5;
        const SpectralReport half = certify_spectral(generator, halved, true);
        cert["half_convention"] = {
            {"alpha", half.additive ? json(half.additive->rate_constant) : json(nullptr)},
            {"delta_max_additive",
             half.additive ? json(half.additive->delta_max) : json(nullptr)}};
      }
      certified = certified || (spectral.additive && spectral.additive->delta_max > 0.0) ||
                  (spectral.multiplicative && spectral.multiplicative->delta_max > 0.0);
      certificates.push_back(std::move(cert));
    } else if (kind == "reversible") {
      if (is_reversible(generator, mu, tol.detailed_balance)) {
        json cert = reversible_certificate_json(spectral, generator, bounds);
        certified = certified || (cert["delta_max_multiplicative"].is_number() &&
                                  cert["delta_max_multiplicative"].get<double>() > 0.0);
        certificates.push_back(std::move(cert));
      } else {
        warnings.push_back("chain is not reversible; skipping the principal-eigenvalue certificate");
      }
    } else if (kind == "partition") {
      certificates.push_back(partition_certificate_json(generator, bounds, config.partition_cuts));
    } else {
      config_fail("analysis.certificates", "unknown certificate kind '" + kind + "'");
    }
  }
  report["certificates"] = std::move(certificates);
  report["certified"] = certified;
  report["warnings"] = warnings;

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const std::string path = out_dir + "/certify.json";
    write_text(path, report.dump(2) + "\n");
    result.files_written.push_back(path);
  }
  result.report = std::move(report);
  result.exit_code = certified ? kExitOk : kExitNotCertified;
  return result;
}

CommandResult cmd_simulate(const RunConfig& config, const std::string& out_dir,
                           const ToleranceProfile& tol) {
  CommandResult result;
  const BuiltinModel built = resolve_model(config, tol);

  SimulationConfig sim;
  sim.delta = config.delta;
  sim.steps = config.steps;
  sim.x0 = config.x0.size() ? config.x0 : Eigen::VectorXd::Ones(built.model.dim);
  sim.i0 = config.i0;
  sim.seed = config.seed;
  sim.record_stride = config.record_stride;

  std::filesystem::create_directories(out_dir.empty() ? "." : out_dir);
  const std::string dir = out_dir.empty() ? "." : out_dir;

  json meta;
  meta["seed"] = config.seed;
  meta["model"] = built.model.name;
  meta["delta"] = config.delta;
  meta["steps"] = config.steps;
  if (const auto warning = certified_delta_warning(built, config.delta))
    meta["warnings"] = json::array({*warning});

  try {
    const Trajectory trajectory = simulate(built.model, built.generator, sim);
    std::string csv = "t,state";
    for (int c = 0; c < built.model.dim; ++c) csv += ",y_" + std::to_string(c + 1);
    csv += "\n";
    for (std::size_t r = 0; r < trajectory.time.size(); ++r) {
      csv += format_double(trajectory.time[r]);
      csv += "," + std::to_string(trajectory.state[r]);
      for (int c = 0; c < built.model.dim; ++c)
        csv += "," + format_double(trajectory.values(static_cast<Eigen::Index>(r), c));
      csv += "\n";
    }
    const std::string csv_path = dir + "/trajectory.csv";
    write_text(csv_path, csv);
    result.files_written.push_back(csv_path);

    meta["rows"] = trajectory.time.size();
    const std::string meta_path = dir + "/run.json";
    write_text(meta_path, meta.dump(2) + "\n");
    result.files_written.push_back(meta_path);
    result.report = std::move(meta);
    result.exit_code = kExitOk;
  } catch (const Error& e) {
    if (e.code() != errc::non_finite_state) throw;
    json divergence = meta;
    divergence["error"] = "NonFiniteState";
    divergence["step"] = e.step();
    divergence["message"] = e.what();
    const std::string path = dir + "/divergence.json";
    write_text(path, divergence.dump(2) + "\n");
    result.files_written.push_back(path);
    result.report = std::move(divergence);
    result.exit_code = kExitDiverged;
  }
  return result;
}

CommandResult cmd_study(const RunConfig& config, const std::string& out_dir,
                        const ToleranceProfile& tol) {
  CommandResult result;
  if (config.study_deltas.empty())
    config_fail("study.deltas", "need at least one stepsize");
  const double min_delta =
      *std::min_element(config.study_deltas.begin(), config.study_deltas.end());
  if (!(config.reference_delta > 0.0 && config.reference_delta < min_delta))
    config_fail("study.reference_delta", "must be positive and below every study stepsize");

  const BuiltinModel built = resolve_model(config, tol);
  const Eigen::VectorXd x0 =
      config.x0.size() ? config.x0 : Eigen::VectorXd::Ones(built.model.dim);

  const StudyResult study =
      convergence_study(built.model, built.generator, config.study_deltas, config.reference_delta,
                        config.study_p, config.budget, x0, config.i0, config.seed);

  std::string csv = "delta,W_hat,n_samples,seed\n";
  for (const auto& row : study.rows) {
    csv += format_double(row.delta) + "," + format_double(row.distance) + "," +
           std::to_string(row.n_samples) + "," + std::to_string(row.seed) + "\n";
  }

  json summary;
  summary["seed"] = config.seed;
  summary["model"] = built.model.name;
  summary["p"] = config.study_p;
  {
    const double coarsest =
        *std::max_element(config.study_deltas.begin(), config.study_deltas.end());
    if (const auto warning = certified_delta_warning(built, coarsest))
      summary["warnings"] = json::array({*warning});
  }
  summary["reference_delta"] = study.reference_delta;
  summary["reference_note"] = "reference, not ground truth";
  summary["slope"] = study.slope;
  summary["slope_ci"] = {study.slope_ci_low, study.slope_ci_high};
  summary["noise_floor"] = study.noise_floor;
  summary["noise_floor_se"] = study.noise_floor_se;
  summary["non_increasing_within_se"] = study.non_increasing_within_se;
  summary["all_below_floor"] = study.all_below_floor;
  summary["all_at_floor_within_2se"] = study.all_at_floor_within_2se;
  json rows = json::array();
  for (const auto& row : study.rows)
    rows.push_back({{"delta", row.delta},
                    {"W_hat", row.distance},
                    {"std_error", row.std_error},
                    {"n_samples", row.n_samples}});
  summary["rows"] = rows;

  const std::string dir = out_dir.empty() ? "." : out_dir;
  std::filesystem::create_directories(dir);
  const std::string csv_path = dir + "/study.csv";
  write_text(csv_path, csv);
  result.files_written.push_back(csv_path);
  const std::string summary_path = dir + "/study_summary.json";
  write_text(summary_path, summary.dump(2) + "\n");
  result.files_written.push_back(summary_path);

  result.report = std::move(summary);
  result.exit_code = kExitOk;
  return result;
}

}  // namespace switchsde
