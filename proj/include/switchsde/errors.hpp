#pragma once

#include <stdexcept>
#include <string>

namespace switchsde {

// Stable error taxonomy shared by the library, the CLI exit-code mapping and
// the python bindings.
enum class errc {
  invalid_argument,
  non_conservative,
  negative_rate,
  reducible,
  singular_system,
  horizon_exceeded,
  length_mismatch,
  no_convergence,
  non_positive_eta,
  star6_violated,
  non_positive_lambda0,
  not_reversible,
  non_positive_vector,
  empty_class,
  non_monotone_cuts,
  unresolvable_bound,
  not_m_matrix,
  non_finite_state,
  empty_support,
  degenerate_window,
  parameter_out_of_range,
  config_error,
};

const char* errc_name(errc code);

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message, long step = -1)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code),
        step_(step) {}

  errc code() const noexcept { return code_; }

  // Step index at which a simulation failed, -1 when not applicable.
  long step() const noexcept { return step_; }

 private:
  errc code_;
  long step_;
};

[[noreturn]] inline void raise(errc code, const std::string& message, long step = -1) {
  throw Error(code, message, step);
}

}  // namespace switchsde
