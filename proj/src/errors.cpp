#include "switchsde/errors.hpp"

namespace switchsde {

const char* errc_name(errc code) {
  switch (code) {
    case errc::invalid_argument: return "InvalidArgument";
    case errc::non_conservative: return "NonConservative";
    case errc::negative_rate: return "NegativeRate";
    case errc::reducible: return "Reducible";
    case errc::singular_system: return "SingularSystem";
    case errc::horizon_exceeded: return "HorizonExceeded";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::no_convergence: return "NoConvergence";
    case errc::non_positive_eta: return "NonPositiveEta";
    case errc::star6_violated: return "Star6Violated";
    case errc::non_positive_lambda0: return "NonPositiveLambda0";
    case errc::not_reversible: return "NotReversible";
    case errc::non_positive_vector: return "NonPositiveVector";
    case errc::empty_class: return "EmptyClass";
    case errc::non_monotone_cuts: return "NonMonotoneCuts";
    case errc::unresolvable_bound: return "UnresolvableBound";
    case errc::not_m_matrix: return "NotMMatrix";
    case errc::non_finite_state: return "NonFiniteState";
    case errc::empty_support: return "EmptySupport";
    case errc::degenerate_window: return "DegenerateWindow";
    case errc::parameter_out_of_range: return "ParameterOutOfRange";
    case errc::config_error: return "ConfigError";
  }
  return "UnknownError";
}

}  // namespace switchsde
