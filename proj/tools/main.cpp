#include <CLI11.hpp>
#include <iostream>
#include <nlohmann/json.hpp>

#include "switchsde/report.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::string tolerance_profile = "default";
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Path to the run configuration")->required();
  cmd->add_option("--out", opts.out_dir, "Output directory");
  cmd->add_option("--seed", opts.seed, "Override the config seed");
  cmd->add_option("--tolerance-profile", opts.tolerance_profile, "strict or default")
      ->check(CLI::IsMember({"strict", "default"}));
}

int run(const CommonOptions& opts,
        switchsde::CommandResult (*command)(const switchsde::RunConfig&, const std::string&,
                                            const switchsde::ToleranceProfile&)) {
  using switchsde::ToleranceProfile;
  try {
    switchsde::RunConfig config = switchsde::RunConfig::load(opts.config_path);
    if (opts.seed) {
      config.seed = *opts.seed;
      config.seed_was_generated = false;
    }
    const ToleranceProfile tol = opts.tolerance_profile == "strict"
                                     ? ToleranceProfile::strict()
                                     : ToleranceProfile::defaults();
    const switchsde::CommandResult result = command(config, opts.out_dir, tol);
    std::cout << result.report.dump(2) << "\n";
    return result.exit_code;
  } catch (const switchsde::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == switchsde::errc::non_finite_state ? switchsde::kExitDiverged
                                                         : switchsde::kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return switchsde::kExitInputError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Euler-Maruyama schemes for regime-switching diffusions with "
      "ergodicity certificates and invariant-measure experiments"};
  app.require_subcommand(1);

  CommonOptions certify_opts, simulate_opts, study_opts;
  CLI::App* certify = app.add_subcommand(
      "certify", "Stepsize certificates: averaging condition, Perron bounds, "
                 "principal eigenvalue, M-matrix partition test");
  add_common(certify, certify_opts);
  CLI::App* simulate =
      app.add_subcommand("simulate", "Run the scheme and write the trajectory CSV");
  add_common(simulate, simulate_opts);
  CLI::App* study = app.add_subcommand(
      "study", "Self-convergence study of the numerical invariant measure");
  add_common(study, study_opts);

  CLI11_PARSE(app, argc, argv);

  if (certify->parsed()) return run(certify_opts, &switchsde::cmd_certify);
  if (simulate->parsed()) return run(simulate_opts, &switchsde::cmd_simulate);
  return run(study_opts, &switchsde::cmd_study);
}
