// SPDX-License-Identifier: Apache-2.0
//
// irsbeam: beam training and positioning simulator for IRS-assisted mmWave links

#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "irsbeam/analysis.hpp"
#include "irsbeam/channel.hpp"
#include "irsbeam/estimator.hpp"
#include "irsbeam/positioning.hpp"
#include "irsbeam/sounding.hpp"

namespace irsbeam {

// Resolved experiment configuration; defaults reproduce the reference
// deployment (28 GHz, one BS plus 12 IRSs in a 20 x 20 x 5 m hall).
struct ExperimentConfig {
  // scenario
  Vec3 hall_min{-10.0, -10.0, 0.0};
  Vec3 hall_max{10.0, 10.0, 5.0};
  int users = 100;
  int nlos_paths = 4;
  double nlos_gap_db = 20.0;
  double reflection_loss_db = 13.0;
  double noise_dbm = -84.0;
  double frequency_ghz = 28.0;
  double tx_power_dbm = 15.0;
  int bs_antennas = 16;
  int mt_antennas = 16;
  int irs_elements = 16;
  double mt_z_min = 1.2;
  double mt_z_max = 1.4;
  Vec3 obstacle_size{0.6, 0.4, 1.7};
  Vec3 bs_position{0.0, 0.0, 5.0};
  Vec3 bs_direction{0.7071067811865476, 0.7071067811865476, 0.0};
  std::vector<Vec3> irs_positions;   // defaults set by default_config()
  std::vector<Vec3> irs_directions;

  // sounding; the experiments default to the ideal-spatial-filtering leakage
  // model for IRS bursts, which is what the reference figures assume.
  int training_length = 16;
  std::uint64_t codebook_seed = 7;
  bool step2_exact_leakage = false;

  // estimator (grid levels 0 = auto: 4 * max(array sizes))
  int grid_theta = 0;
  int grid_phi = 0;
  int peaks = 5;
  FineSearchConfig fine;

  // positioning
  SelectionPolicy policy;
  double taylor_stop_eps = 1e-6;
  int taylor_max_iterations = 100;

  // run
  std::uint64_t trials = 500;
  std::uint64_t base_seed = 1;
  int workers = 1;
  std::string out_dir = "out";

  double wavelength() const;
  double noise_power() const;        // watts
  double tx_power() const;           // watts
  double reflection_loss() const;    // linear
  GridSpec grid_spec() const;
  std::vector<Anchor> anchors() const;
  ScenarioParams scenario_params() const;
  Vec3 initial_position_guess() const;
};

ExperimentConfig default_config();

// INI-style parser (sections, key = value, '#' comments); unknown sections
// or keys are rejected. The repeatable `irs` key replaces the default list.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);

// Canonical key/value dump of every resolved field; hashed into figure CSVs.
std::string canonical_config_text(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

// Outcome of one link inside a full trial. Angle slots hold cosines; for IRS
// links the ML AoD is already rotated back by the known theta_BR.
struct LinkOutcome {
  int anchor_index = 1;
  int zeta_true = 1;
  double theta_true = 0.0;
  double phi_true = 0.0;
  bool estimate_ok = false;
  double theta_ml = 0.0;
  double phi_ml = 0.0;
  double residual_ratio = 1.0;
  double received_power = 0.0;  // ||y||^2 / N
  std::complex<double> delta_ml;
  double theta_refined = 0.0;
  double phi_refined = 0.0;
  std::complex<double> delta_refined;
  int zeta_decided = 0;
};

struct TrialRecord {
  std::uint64_t trial_id = 0;
  bool fix_ok = false;
  bool low_confidence = false;
  Vec3 mt_true;
  Vec3 mt_estimate;
  Vec3 mt_direction_true;
  Vec3 mt_direction_estimate;
  double position_error = 0.0;
  std::vector<int> reliable_set;
  std::vector<LinkOutcome> links;
  int position_aided_errors = 0;
  int kmeans_residual_errors = 0;
  int kmeans_power_errors = 0;
  std::string note;  // first component failure, if any
};

// Full Stage I-III pipeline for one seeded trial.
TrialRecord run_trial(const ExperimentConfig& cfg, std::uint64_t trial_id);

// Figure runners; each writes one CSV (plus contour's grid file) under
// cfg.out_dir and returns the paths written.
std::vector<std::string> run_fig5(const ExperimentConfig& cfg);
std::vector<std::string> run_fig6(const ExperimentConfig& cfg);
std::vector<std::string> run_fig7(const ExperimentConfig& cfg);
std::vector<std::string> run_fig8(const ExperimentConfig& cfg);
std::vector<std::string> run_fig9(const ExperimentConfig& cfg);
std::vector<std::string> run_fig10(const ExperimentConfig& cfg);
std::vector<std::string> run_contour(const ExperimentConfig& cfg);

// Property-suite entry used by the `validate` subcommand.
struct PropertyResult {
  std::string name;
  bool pass = false;
  std::string detail;
};
std::vector<PropertyResult> run_property_suite(std::uint64_t seed);

}  // namespace irsbeam
