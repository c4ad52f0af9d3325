// SPDX-License-Identifier: Apache-2.0
//
// irsbeam: beam training and positioning simulator for IRS-assisted mmWave links

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "irsbeam/experiments.hpp"

namespace py = pybind11;
using namespace irsbeam;

PYBIND11_MODULE(_core, m) {
  m.doc() = "IRS-assisted mmWave beam training, positioning and Monte-Carlo experiments";

  py::class_<Pcg32>(m, "Pcg32")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("stream") = 0)
      .def("uniform", &Pcg32::uniform, py::arg("lo"), py::arg("hi"))
      .def("normal", &Pcg32::normal)
      .def("cnormal", &Pcg32::cnormal, py::arg("variance"));

  py::class_<Vec3>(m, "Vec3")
      .def(py::init<double, double, double>(), py::arg("x"), py::arg("y"), py::arg("z"))
      .def_readwrite("x", &Vec3::x)
      .def_readwrite("y", &Vec3::y)
      .def_readwrite("z", &Vec3::z)
      .def("__repr__", [](const Vec3& v) {
        return "Vec3(" + std::to_string(v.x) + ", " + std::to_string(v.y) + ", " +
               std::to_string(v.z) + ")";
      });

  m.def("cos_add", [](double a, double b) { return cos_add(CosAngle(a), CosAngle(b)).value(); },
        py::arg("a"), py::arg("b"), "wrapped cosine-angle addition into [-1, 1)");
  m.def("cos_sub", [](double a, double b) { return cos_sub(CosAngle(a), CosAngle(b)).value(); },
        py::arg("a"), py::arg("b"), "wrapped cosine-angle subtraction into [-1, 1)");
  m.def("steering_vector",
        [](int n, double psi) { return steering_vector(n, CosAngle(psi)); }, py::arg("n"),
        py::arg("psi"));
  m.def("kron_steering",
        [](double theta, double phi, int n_rx, int n_tx) {
          return kron_steering(CosAngle(theta), CosAngle(phi), n_rx, n_tx);
        },
        py::arg("theta"), py::arg("phi"), py::arg("n_rx"), py::arg("n_tx"));

  py::enum_<BeamSide>(m, "BeamSide")
      .value("Transmit", BeamSide::Transmit)
      .value("Receive", BeamSide::Receive)
      .value("Reflect", BeamSide::Reflect);

  py::class_<BeamCodebook>(m, "BeamCodebook")
      .def_readonly("vectors", &BeamCodebook::vectors)
      .def_readonly("side", &BeamCodebook::side);
  m.def("random_codebook", &random_codebook, py::arg("elements"), py::arg("length"),
        py::arg("side"), py::arg("rng"));

  py::class_<SensingMatrix>(m, "SensingMatrix")
      .def(py::init<Eigen::MatrixXcd, Eigen::MatrixXcd>(), py::arg("tx"), py::arg("rx"))
      .def_property_readonly("slots", &SensingMatrix::slots)
      .def("apply", &SensingMatrix::apply, py::arg("b"))
      .def("prefix", &SensingMatrix::prefix, py::arg("n"))
      .def("materialise", &SensingMatrix::materialise);

  py::class_<SoundingSession>(m, "SoundingSession")
      .def(py::init([](const SensingMatrix& d, const Eigen::VectorXcd& y, double gain_scale,
                       double noise_power) {
             SoundingSession s;
             s.sensing = d;
             s.y = y;
             s.gain_scale = gain_scale;
             s.noise_power = noise_power;
             s.gain_applied = true;
             return s;
           }),
           py::arg("sensing"), py::arg("y"), py::arg("gain_scale") = 1.0,
           py::arg("noise_power") = 0.0)
      .def_readonly("anchor_index", &SoundingSession::anchor_index)
      .def_readonly("y", &SoundingSession::y)
      .def_readonly("gain_scale", &SoundingSession::gain_scale)
      .def_property_readonly("sensing",
                             [](const SoundingSession& s) { return s.sensing; });

  m.def("synth_unified",
        [](int zeta, std::complex<double> delta, double theta, double phi,
           const SensingMatrix& d, double noise_power, Pcg32& rng) {
          return synth_unified(zeta, delta, CosAngle(theta), CosAngle(phi), d, noise_power,
                               rng);
        },
        py::arg("zeta"), py::arg("delta"), py::arg("theta"), py::arg("phi"), py::arg("sensing"),
        py::arg("noise_power"), py::arg("rng"));

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<>())
      .def_static("for_arrays", &GridSpec::for_arrays, py::arg("n_tx"), py::arg("n_rx"),
                  py::arg("n_peaks") = 5)
      .def_readwrite("z_theta", &GridSpec::z_theta)
      .def_readwrite("z_phi", &GridSpec::z_phi)
      .def_readwrite("n_peaks", &GridSpec::n_peaks);

  py::class_<FineSearchConfig>(m, "FineSearchConfig")
      .def(py::init<>())
      .def_readwrite("step", &FineSearchConfig::step)
      .def_readwrite("stop_eps", &FineSearchConfig::stop_eps)
      .def_readwrite("max_iterations", &FineSearchConfig::max_iterations);

  py::class_<PathEstimate>(m, "PathEstimate")
      .def_readonly("delta", &PathEstimate::delta)
      .def_property_readonly("theta", [](const PathEstimate& p) { return p.theta.value(); })
      .def_property_readonly("phi", [](const PathEstimate& p) { return p.phi.value(); })
      .def_readonly("residual_ratio", &PathEstimate::residual_ratio)
      .def_readonly("objective", &PathEstimate::objective)
      .def_readonly("converged", &PathEstimate::converged);

  m.def("objective_g",
        [](double theta, double phi, const SensingMatrix& d, const Eigen::VectorXcd& y) {
          return objective_g(CosAngle(theta), CosAngle(phi), d, y);
        },
        py::arg("theta"), py::arg("phi"), py::arg("sensing"), py::arg("y"));
  m.def("gradient_g",
        [](double theta, double phi, const SensingMatrix& d, const Eigen::VectorXcd& y) {
          return gradient_g(CosAngle(theta), CosAngle(phi), d, y);
        },
        py::arg("theta"), py::arg("phi"), py::arg("sensing"), py::arg("y"));
  m.def("objective_grid", &objective_grid, py::arg("sensing"), py::arg("y"), py::arg("z_theta"),
        py::arg("z_phi"));
  m.def("estimate_delta",
        [](double theta, double phi, const SensingMatrix& d, const Eigen::VectorXcd& y) {
          return estimate_delta(CosAngle(theta), CosAngle(phi), d, y);
        },
        py::arg("theta"), py::arg("phi"), py::arg("sensing"), py::arg("y"));
  m.def("residual_ratio",
        [](const Eigen::VectorXcd& y, std::complex<double> delta, double theta, double phi,
           const SensingMatrix& d) {
          return residual_ratio(y, delta, CosAngle(theta), CosAngle(phi), d);
        },
        py::arg("y"), py::arg("delta"), py::arg("theta"), py::arg("phi"), py::arg("sensing"));
  m.def("estimate_path", &estimate_path, py::arg("session"), py::arg("grid"), py::arg("fine"));

  m.def("d_squared",
        [](const SensingMatrix& d, double theta, double phi, double theta_alt, double phi_alt) {
          return d_squared(d, CosAngle(theta), CosAngle(phi), CosAngle(theta_alt),
                           CosAngle(phi_alt));
        },
        py::arg("sensing"), py::arg("theta"), py::arg("phi"), py::arg("theta_alt"),
        py::arg("phi_alt"));
  m.def("pep_theoretical",
        [](const SensingMatrix& d, std::complex<double> delta, double noise_power, double theta,
           double phi, double theta_alt, double phi_alt, bool display_form) {
          PepQuery q;
          q.sensing = &d;
          q.delta = delta;
          q.noise_power = noise_power;
          q.theta = CosAngle(theta);
          q.phi = CosAngle(phi);
          q.theta_alt = CosAngle(theta_alt);
          q.phi_alt = CosAngle(phi_alt);
          return pep_theoretical(q, display_form);
        },
        py::arg("sensing"), py::arg("delta"), py::arg("noise_power"), py::arg("theta"),
        py::arg("phi"), py::arg("theta_alt"), py::arg("phi_alt"),
        py::arg("display_form") = false);
  m.def("pep_monte_carlo",
        [](const SensingMatrix& d, std::complex<double> delta, double noise_power, double theta,
           double phi, double theta_alt, double phi_alt, int trials, Pcg32& rng) {
          PepQuery q;
          q.sensing = &d;
          q.delta = delta;
          q.noise_power = noise_power;
          q.theta = CosAngle(theta);
          q.phi = CosAngle(phi);
          q.theta_alt = CosAngle(theta_alt);
          q.phi_alt = CosAngle(phi_alt);
          return pep_monte_carlo(q, trials, rng);
        },
        py::arg("sensing"), py::arg("delta"), py::arg("noise_power"), py::arg("theta"),
        py::arg("phi"), py::arg("theta_alt"), py::arg("phi_alt"), py::arg("trials"),
        py::arg("rng"));
  m.def("crb_numeric",
        [](const SensingMatrix& d, std::complex<double> delta, double theta, double phi,
           double noise_power) {
          return crb_numeric(d, delta, CosAngle(theta), CosAngle(phi), noise_power);
        },
        py::arg("sensing"), py::arg("delta"), py::arg("theta"), py::arg("phi"),
        py::arg("noise_power"));
  m.def("kmeans_1d",
        [](const std::vector<double>& values, int k, Pcg32& rng, int restarts) {
          const Kmeans1dResult r = kmeans_1d(values, k, rng, restarts);
          return py::make_tuple(r.assignment, r.centroids, r.degenerate);
        },
        py::arg("values"), py::arg("k"), py::arg("rng"), py::arg("restarts") = 8);

  m.def("taylor_position",
        [](const std::vector<double>& aods, const std::vector<Vec3>& anchor_positions,
           const std::vector<Vec3>& anchor_directions, const Vec3& initial, double stop_eps,
           int max_iterations) {
          std::vector<CosAngle> wrapped;
          wrapped.reserve(aods.size());
          for (const double a : aods) wrapped.emplace_back(a);
          const TaylorResult r = taylor_position(wrapped, anchor_positions, anchor_directions,
                                                 initial, stop_eps, max_iterations);
          return py::make_tuple(r.position, r.cost, r.iterations, r.converged);
        },
        py::arg("aods"), py::arg("anchor_positions"), py::arg("anchor_directions"),
        py::arg("initial"), py::arg("stop_eps") = 1e-6, py::arg("max_iterations") = 100);
  m.def("decide_blockage", &decide_blockage, py::arg("measured_gain"), py::arg("predicted_gain"),
        py::arg("pathloss_threshold_db"));

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init(&default_config))
      .def_readwrite("users", &ExperimentConfig::users)
      .def_readwrite("nlos_paths", &ExperimentConfig::nlos_paths)
      .def_readwrite("noise_dbm", &ExperimentConfig::noise_dbm)
      .def_readwrite("tx_power_dbm", &ExperimentConfig::tx_power_dbm)
      .def_readwrite("training_length", &ExperimentConfig::training_length)
      .def_readwrite("codebook_seed", &ExperimentConfig::codebook_seed)
      .def_readwrite("trials", &ExperimentConfig::trials)
      .def_readwrite("base_seed", &ExperimentConfig::base_seed)
      .def_readwrite("workers", &ExperimentConfig::workers)
      .def_readwrite("out_dir", &ExperimentConfig::out_dir)
      .def_property_readonly("wavelength", &ExperimentConfig::wavelength)
      .def_property_readonly("noise_power", &ExperimentConfig::noise_power)
      .def_property_readonly("tx_power", &ExperimentConfig::tx_power);
  m.def("load_config", &load_config, py::arg("path"));
  m.def("config_hash", &config_hash, py::arg("config"));

  py::class_<LinkOutcome>(m, "LinkOutcome")
      .def_readonly("anchor_index", &LinkOutcome::anchor_index)
      .def_readonly("zeta_true", &LinkOutcome::zeta_true)
      .def_readonly("theta_true", &LinkOutcome::theta_true)
      .def_readonly("phi_true", &LinkOutcome::phi_true)
      .def_readonly("theta_ml", &LinkOutcome::theta_ml)
      .def_readonly("phi_ml", &LinkOutcome::phi_ml)
      .def_readonly("residual_ratio", &LinkOutcome::residual_ratio)
      .def_readonly("theta_refined", &LinkOutcome::theta_refined)
      .def_readonly("phi_refined", &LinkOutcome::phi_refined)
      .def_readonly("zeta_decided", &LinkOutcome::zeta_decided);

  py::class_<TrialRecord>(m, "TrialRecord")
      .def_readonly("trial_id", &TrialRecord::trial_id)
      .def_readonly("fix_ok", &TrialRecord::fix_ok)
      .def_readonly("mt_true", &TrialRecord::mt_true)
      .def_readonly("mt_estimate", &TrialRecord::mt_estimate)
      .def_readonly("position_error", &TrialRecord::position_error)
      .def_readonly("reliable_set", &TrialRecord::reliable_set)
      .def_readonly("links", &TrialRecord::links)
      .def_readonly("note", &TrialRecord::note);
  m.def("run_trial", &run_trial, py::arg("config"), py::arg("trial_id"));

  m.def("run_figure",
        [](const std::string& name, const ExperimentConfig& cfg) {
          if (name == "fig5") return run_fig5(cfg);
          if (name == "fig6") return run_fig6(cfg);
          if (name == "fig7") return run_fig7(cfg);
          if (name == "fig8") return run_fig8(cfg);
          if (name == "fig9") return run_fig9(cfg);
          if (name == "fig10") return run_fig10(cfg);
          if (name == "contour") return run_contour(cfg);
          throw std::invalid_argument("unknown figure: " + name);
        },
        py::arg("name"), py::arg("config"));
  m.def("run_property_suite", [](std::uint64_t seed) {
    std::vector<std::tuple<std::string, bool, std::string>> out;
    for (const auto& r : run_property_suite(seed)) out.emplace_back(r.name, r.pass, r.detail);
    return out;
  });
}
