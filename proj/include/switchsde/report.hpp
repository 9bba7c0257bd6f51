#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "switchsde/em.hpp"
#include "switchsde/measure.hpp"
#include "switchsde/partition.hpp"

// The CLI front end: one config document drives every command, each command
// reads the sections it needs.  Kept out of tools/ so tests can drive the
// pipelines directly.

namespace switchsde {

using json = nlohmann::json;

struct RunConfig {
  std::uint64_t seed = 0;
  bool seed_was_generated = false;

  // model section
  std::string builtin;                  // one of the built-in names, or empty
  json builtin_params;                  // parameters for the built-in
  std::optional<int> freeze_regime;
  Eigen::VectorXd linear_alpha;         // explicit scalar linear model
  Eigen::VectorXd linear_sigma;
  NoiseKind linear_noise = NoiseKind::additive;
  bool has_linear = false;

  std::optional<Eigen::MatrixXd> generator_rates;

  // analysis section
  std::vector<std::string> certificates = {"spectral", "reversible", "partition"};
  std::vector<double> partition_cuts;   // empty: singleton classes by beta value

  // simulation section
  double delta = 0.01;
  long steps = 1000;
  Eigen::VectorXd x0;
  int i0 = 0;
  long record_stride = 1;
  long burn_in = 0;
  long thin = 1;

  // study section
  std::vector<double> study_deltas;
  double reference_delta = 0.0;
  double study_p = 1.0;
  StudyBudget budget;

  static RunConfig parse(const json& document);
  static RunConfig load(const std::string& path);
  json to_json() const;
};

// Model + generator resolved from the config.
BuiltinModel resolve_model(const RunConfig& config,
                           const ToleranceProfile& tol = ToleranceProfile::defaults());

std::string format_double(double value);  // full-precision scientific notation

struct CommandResult {
  int exit_code = 0;
  json report;
  std::vector<std::string> files_written;
};

CommandResult cmd_certify(const RunConfig& config, const std::string& out_dir,
                          const ToleranceProfile& tol = ToleranceProfile::defaults());
CommandResult cmd_simulate(const RunConfig& config, const std::string& out_dir,
                           const ToleranceProfile& tol = ToleranceProfile::defaults());
CommandResult cmd_study(const RunConfig& config, const std::string& out_dir,
                        const ToleranceProfile& tol = ToleranceProfile::defaults());

// Exit codes shared by all commands: 0 success/certified, 1 input error,
// 2 not certified, 3 runtime divergence.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNotCertified = 2;
inline constexpr int kExitDiverged = 3;

}  // namespace switchsde
