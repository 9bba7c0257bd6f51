#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "switchsde/dirichlet.hpp"
#include "switchsde/measure.hpp"
#include "switchsde/partition.hpp"
#include "switchsde/report.hpp"

namespace py = pybind11;
using namespace switchsde;

namespace {

GeneratorMatrix generator_from(const Eigen::MatrixXd& rates) {
  return GeneratorMatrix::validate(rates);
}

RegimeBounds bounds_from(const Eigen::VectorXd& beta, double c0, double L, double L0) {
  RegimeBounds bounds;
  bounds.beta = beta;
  bounds.c0 = c0;
  bounds.L = L;
  bounds.L0 = L0;
  return bounds;
}

EmpiricalMeasure measure_from(const Eigen::MatrixXd& points, const std::vector<int>& states,
                              const Eigen::VectorXd& weights) {
  EmpiricalMeasure m;
  m.points = points;
  m.states = states;
  m.weights = weights;
  m.check();
  return m;
}

py::dict study_to_dict(const StudyResult& study) {
  py::dict out;
  py::list rows;
  for (const auto& row : study.rows) {
    py::dict r;
    r["delta"] = row.delta;
    r["W_hat"] = row.distance;
    r["std_error"] = row.std_error;
    r["n_samples"] = row.n_samples;
    rows.append(r);
  }
  out["rows"] = rows;
  out["slope"] = study.slope;
  out["slope_ci"] = py::make_tuple(study.slope_ci_low, study.slope_ci_high);
  out["noise_floor"] = study.noise_floor;
  out["noise_floor_se"] = study.noise_floor_se;
  out["non_increasing_within_se"] = study.non_increasing_within_se;
  out["all_below_floor"] = study.all_below_floor;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Euler-Maruyama schemes for regime-switching diffusions: "
            "ergodicity certificates and invariant-measure experiments";

  py::register_exception<Error>(m, "SwitchSdeError");

  py::class_<GeneratorMatrix>(m, "GeneratorMatrix")
      .def_static("validate", &generator_from, py::arg("rates"))
      .def_property_readonly("rates", &GeneratorMatrix::rates)
      .def_property_readonly("size", &GeneratorMatrix::size)
      .def_property_readonly("max_exit_rate", &GeneratorMatrix::max_exit_rate);

  py::class_<StationaryDistribution>(m, "StationaryDistribution")
      .def_property_readonly("weights",
                             [](const StationaryDistribution& d) { return d.weights; });

  m.def("stationary_distribution", &stationary_distribution, py::arg("generator"));
  m.def("is_reversible", &is_reversible, py::arg("generator"), py::arg("mu"),
        py::arg("tolerance") = 1e-10);

  py::class_<RegimeBounds>(m, "RegimeBounds")
      .def(py::init(&bounds_from), py::arg("beta"), py::arg("c0") = 0.0, py::arg("L") = 0.0,
           py::arg("L0") = 0.0)
      .def_readonly("beta", &RegimeBounds::beta)
      .def_readonly("c0", &RegimeBounds::c0)
      .def_readonly("L", &RegimeBounds::L)
      .def_readonly("L0", &RegimeBounds::L0);

  m.def(
      "averaging_condition",
      [](const StationaryDistribution& mu, const RegimeBounds& bounds) {
        const AveragingResult r = averaging_condition(mu, bounds);
        return py::make_tuple(r.sum, r.holds);
      },
      py::arg("mu"), py::arg("bounds"));
  m.def("build_qp", &build_qp, py::arg("generator"), py::arg("bounds"), py::arg("p"));
  m.def(
      "eta_p_and_eigvec",
      [](const Eigen::MatrixXd& qp) {
        const PerronResult r = perron_eta(qp);
        return py::make_tuple(r.eta, r.xi);
      },
      py::arg("qp"));
  m.def("p0_threshold", &p0_threshold, py::arg("generator"), py::arg("bounds"));
  m.def("condition_star6", &condition_star6, py::arg("generator"), py::arg("bounds"));

  py::class_<SpectralCertificate>(m, "SpectralCertificate")
      .def_readonly("p", &SpectralCertificate::p)
      .def_readonly("eta_p", &SpectralCertificate::eta)
      .def_readonly("xi", &SpectralCertificate::xi)
      .def_readonly("q0", &SpectralCertificate::q0)
      .def_readonly("beta0", &SpectralCertificate::beta0);
  m.def("make_certificate", &make_certificate, py::arg("generator"), py::arg("bounds"),
        py::arg("p"));
  m.def("alpha_additive", &alpha_additive, py::arg("bounds"), py::arg("cert"));
  m.def(
      "delta_max_additive",
      [](const RegimeBounds& bounds, const SpectralCertificate& cert, double alpha) {
        return delta_max_additive(bounds, cert, alpha).delta_max;
      },
      py::arg("bounds"), py::arg("cert"), py::arg("alpha"));
  m.def("beta_multiplicative", &beta_multiplicative, py::arg("generator"), py::arg("bounds"),
        py::arg("cert2"));
  m.def(
      "delta_max_multiplicative",
      [](const RegimeBounds& bounds, const SpectralCertificate& cert2, double beta) {
        return delta_max_multiplicative(bounds, cert2, beta).delta_max;
      },
      py::arg("bounds"), py::arg("cert2"), py::arg("beta"));

  m.def(
      "principal_eigenvalue",
      [](const Eigen::MatrixXd& rates, const Eigen::VectorXd& beta) {
        const DirichletProblem problem = DirichletProblem::make(generator_from(rates), beta);
        const EigenCertificate cert = principal_eigenvalue(problem);
        return py::make_tuple(cert.lambda0, cert.xi);
      },
      py::arg("rates"), py::arg("beta"));
  m.def(
      "test_vector_rate",
      [](const Eigen::MatrixXd& rates, const Eigen::VectorXd& beta, const Eigen::VectorXd& xi) {
        const DirichletProblem problem = DirichletProblem::make(generator_from(rates), beta);
        return test_vector_rate(problem, xi);
      },
      py::arg("rates"), py::arg("beta"), py::arg("xi"));

  m.def("h_matrix", &h_matrix, py::arg("size"));
  m.def("is_nonsingular_m_matrix", &is_nonsingular_m_matrix, py::arg("a"));
  m.def(
      "partition_certificate",
      [](const Eigen::MatrixXd& qf, const Eigen::VectorXd& beta_f) {
        const LumpedCertificate cert = partition_certificate(qf, beta_f);
        py::dict out;
        out["A"] = cert.a;
        out["is_m"] = cert.is_m;
        if (cert.is_m) {
          out["eta_F"] = cert.eta_f;
          out["xi_F"] = cert.xi_f;
        }
        return out;
      },
      py::arg("qf"), py::arg("beta_f"));

  py::class_<BuiltinModel>(m, "BuiltinModel")
      .def_property_readonly("generator", [](const BuiltinModel& b) { return b.generator; })
      .def_property_readonly("name", [](const BuiltinModel& b) { return b.model.name; })
      .def_property_readonly("beta", [](const BuiltinModel& b) { return b.model.bounds.beta; })
      .def_property_readonly("L", [](const BuiltinModel& b) { return b.model.bounds.L; })
      .def_property_readonly("c0", [](const BuiltinModel& b) { return b.model.bounds.c0; });
  m.def("make_switching_ou", &make_switching_ou, py::arg("gamma"), py::arg("sigma0") = 1.0,
        py::arg("sigma1") = 1.0);
  m.def("make_switching_linear3", &make_switching_linear3, py::arg("nu"));
  m.def("make_birth_death_linear", &make_birth_death_linear, py::arg("a"), py::arg("b"),
        py::arg("alpha"), py::arg("sigma"));

  m.def(
      "simulate",
      [](const BuiltinModel& built, double delta, long steps, const Eigen::VectorXd& x0, int i0,
         std::uint64_t seed, long record_stride) {
        SimulationConfig cfg;
        cfg.delta = delta;
        cfg.steps = steps;
        cfg.x0 = x0;
        cfg.i0 = i0;
        cfg.seed = seed;
        cfg.record_stride = record_stride;
        const Trajectory tr = simulate(built.model, built.generator, cfg);
        py::dict out;
        out["t"] = tr.time;
        out["state"] = tr.state;
        out["y"] = tr.values;
        return out;
      },
      py::arg("model"), py::arg("delta"), py::arg("steps"), py::arg("x0"), py::arg("i0") = 0,
      py::arg("seed") = 0, py::arg("record_stride") = 1);

  m.def("hybrid_distance", &hybrid_distance, py::arg("x"), py::arg("state_x"), py::arg("y"),
        py::arg("state_y"), py::arg("p"));
  m.def(
      "wasserstein_p",
      [](const Eigen::MatrixXd& points_a, const std::vector<int>& states_a,
         const Eigen::VectorXd& weights_a, const Eigen::MatrixXd& points_b,
         const std::vector<int>& states_b, const Eigen::VectorXd& weights_b, double p) {
        return wasserstein_p(measure_from(points_a, states_a, weights_a),
                             measure_from(points_b, states_b, weights_b), p);
      },
      py::arg("points_a"), py::arg("states_a"), py::arg("weights_a"), py::arg("points_b"),
      py::arg("states_b"), py::arg("weights_b"), py::arg("p"));

  m.def(
      "estimate_invariant",
      [](const BuiltinModel& built, double delta, long burn_in, long thin, long n_samples,
         const Eigen::VectorXd& x0, int i0, std::uint64_t seed) {
        SimulationConfig cfg;
        cfg.delta = delta;
        cfg.x0 = x0;
        cfg.i0 = i0;
        cfg.seed = seed;
        const EmpiricalMeasure em =
            estimate_invariant(built.model, built.generator, cfg, burn_in, thin, n_samples);
        py::dict out;
        out["points"] = em.points;
        out["states"] = em.states;
        return out;
      },
      py::arg("model"), py::arg("delta"), py::arg("burn_in"), py::arg("thin"),
      py::arg("n_samples"), py::arg("x0"), py::arg("i0") = 0, py::arg("seed") = 0);

  m.def(
      "contraction_experiment",
      [](const BuiltinModel& built, double delta, long steps, const Eigen::VectorXd& x0,
         const Eigen::VectorXd& y0, double p, int n_paths, std::uint64_t seed,
         long record_stride) {
        SimulationConfig cfg;
        cfg.delta = delta;
        cfg.steps = steps;
        cfg.x0 = x0;
        cfg.seed = seed;
        cfg.record_stride = record_stride;
        const ContractionResult r =
            contraction_experiment(built.model, built.generator, cfg, x0, y0, p, n_paths);
        py::dict out;
        out["slope"] = r.slope;
        out["slope_ci"] = py::make_tuple(r.slope_ci_low, r.slope_ci_high);
        out["time"] = r.time;
        out["log_mean"] = r.log_mean;
        return out;
      },
      py::arg("model"), py::arg("delta"), py::arg("steps"), py::arg("x0"), py::arg("y0"),
      py::arg("p"), py::arg("n_paths"), py::arg("seed") = 0, py::arg("record_stride") = 1);

  m.def(
      "convergence_study",
      [](const BuiltinModel& built, const std::vector<double>& deltas, double reference_delta,
         double p, long n_samples, int subsample, int replicates, const Eigen::VectorXd& x0,
         int i0, std::uint64_t seed) {
        StudyBudget budget;
        budget.n_samples = n_samples;
        budget.subsample = subsample;
        budget.replicates = replicates;
        return study_to_dict(convergence_study(built.model, built.generator, deltas,
                                               reference_delta, p, budget, x0, i0, seed));
      },
      py::arg("model"), py::arg("deltas"), py::arg("reference_delta"), py::arg("p"),
      py::arg("n_samples"), py::arg("subsample"), py::arg("replicates"), py::arg("x0"),
      py::arg("i0") = 0, py::arg("seed") = 0);

  m.def(
      "certify",
      [](const std::string& config_json) {
        const RunConfig config = RunConfig::parse(json::parse(config_json));
        const CommandResult result = cmd_certify(config, "");
        return py::make_tuple(result.exit_code, result.report.dump());
      },
      py::arg("config_json"),
      "Run the certification pipeline on a JSON config string; returns (exit_code, report_json)");
}
