// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "irsbeam/experiments.hpp"

using namespace irsbeam;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string record_signature(const TrialRecord& r) {
  char buf[160];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%d|%d|%.17g|%.17g|%.17g|%.17g|", (int)r.fix_ok,
                (int)r.low_confidence, r.mt_estimate.x, r.mt_estimate.y, r.mt_estimate.z,
                r.position_error);
  out += buf;
  for (const LinkOutcome& l : r.links) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g,%.17g,%d;", l.anchor_index,
                  l.zeta_true, l.theta_ml, l.phi_ml, l.theta_refined, l.phi_refined,
                  l.zeta_decided);
    out += buf;
  }
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("experiments");

TEST_CASE("config defaults match the reference deployment") {
  const ExperimentConfig cfg = default_config();
  REQUIRE(cfg.irs_positions.size() == 12);
  CHECK(cfg.anchors().size() == 13);
  CHECK(cfg.wavelength() == doctest::Approx(0.0107068735).epsilon(1e-6));
  CHECK(cfg.noise_power() == doctest::Approx(3.981e-12).epsilon(1e-3));
  CHECK(cfg.reflection_loss() == doctest::Approx(0.0501187).epsilon(1e-5));
  CHECK(cfg.policy.cost_threshold == doctest::Approx(2.5e-5));
  CHECK(cfg.policy.pathloss_threshold_db == 6.0);
  CHECK(cfg.grid_spec().z_theta == 64);
  CHECK(cfg.grid_spec().z_phi == 64);
  CHECK_FALSE(cfg.step2_exact_leakage);
}

TEST_CASE("config parsing") {
  const std::string text = R"(
# comment
[scenario]
users = 50
tx_power_dbm = 9          # inline comment
irs = 1 2 3  0 0 1
irs = 4 5 6  1 0 0

[sounding]
training_length = 8

[run]
trials = 7
base_seed = 99
)";
  const ExperimentConfig cfg = parse_config(text);
  CHECK(cfg.users == 50);
  CHECK(cfg.tx_power_dbm == 9.0);
  CHECK(cfg.training_length == 8);
  CHECK(cfg.trials == 7);
  CHECK(cfg.base_seed == 99);
  REQUIRE(cfg.irs_positions.size() == 2);  // the list replaces the defaults
  CHECK(cfg.irs_positions[1].x == 4.0);
  CHECK(cfg.irs_directions[1].x == 1.0);

  CHECK_THROWS(parse_config("[scenario]\nnot_a_key = 1\n"));
  CHECK_THROWS(parse_config("[nope]\nusers = 2\n"));
  CHECK_THROWS(parse_config("users = 2\n"));
  CHECK_THROWS(parse_config("[scenario]\nusers\n"));
  CHECK_THROWS(parse_config("[run]\ntrials = 0\n"));

  // hash covers the resolved values
  ExperimentConfig a = default_config(), b = default_config();
  b.training_length = 8;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a) == config_hash(default_config()));
}

TEST_CASE("trial determinism") {
  ExperimentConfig cfg = default_config();
  cfg.tx_power_dbm = 12.0;
  cfg.users = 40;
  const TrialRecord a = run_trial(cfg, 5);
  const TrialRecord b = run_trial(cfg, 5);
  CHECK(record_signature(a) == record_signature(b));
  const TrialRecord c = run_trial(cfg, 6);
  CHECK(record_signature(a) != record_signature(c));
}

TEST_CASE("trial pipeline on a clean world") {
  ExperimentConfig cfg = default_config();
  cfg.users = 0;
  cfg.tx_power_dbm = 30.0;
  const TrialRecord r = run_trial(cfg, 2);
  REQUIRE(r.fix_ok);
  CHECK(!r.low_confidence);
  REQUIRE(r.links.size() == 13);
  CHECK(r.position_error < 0.1);
  CHECK(r.position_aided_errors == 0);  // nothing blocked, nothing flagged
  for (const LinkOutcome& l : r.links) {
    CHECK(l.zeta_true == 1);
    CHECK(l.estimate_ok);
    CHECK(l.zeta_decided == 1);
  }
}

TEST_CASE("figure csv determinism and worker invariance") {
  ExperimentConfig cfg = default_config();
  cfg.trials = 60;
  cfg.base_seed = 17;
  cfg.out_dir = "test_out_a";
  const auto written_1 = run_fig6(cfg);
  const std::string bytes_1 = slurp(written_1.front());

  cfg.workers = 4;
  cfg.out_dir = "test_out_b";
  const auto written_4 = run_fig6(cfg);
  const std::string bytes_4 = slurp(written_4.front());
  CHECK(bytes_1 == bytes_4);

  // header carries the config hash and the seed
  char expect[64];
  std::snprintf(expect, sizeof(expect), "config_hash=0x%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  CHECK(bytes_1.find(expect) != std::string::npos);
  CHECK(bytes_1.find("seed=17") != std::string::npos);

  std::filesystem::remove_all("test_out_a");
  std::filesystem::remove_all("test_out_b");
}

TEST_CASE("contour peaks: first peak at the truth, gap grows with length") {
  ExperimentConfig cfg = default_config();
  cfg.out_dir = "test_out_contour";
  const auto written = run_contour(cfg);
  REQUIRE(written.size() == 2);
  const std::string peaks = slurp(written[1]);

  // rows: training_length,peak1,peak2,gap,theta1,phi1,theta2,phi2
  std::stringstream ss(peaks);
  std::string line;
  std::getline(ss, line);  // banner
  std::getline(ss, line);  // header
  double prev_gap = -1e9;
  int rows = 0;
  bool gap_monotone = true;
  while (std::getline(ss, line)) {
    std::stringstream row(ss.str());
    double n, p1, p2, gap, t1, f1;
    char comma;
    std::stringstream parse(line);
    parse >> n >> comma >> p1 >> comma >> p2 >> comma >> gap >> comma >> t1 >> comma >> f1;
    ++rows;
    CHECK(std::abs(t1) <= 2.0 / 128);  // first peak within grid resolution of (0, 0)
    CHECK(std::abs(f1) <= 2.0 / 128);
    if (gap < prev_gap) gap_monotone = false;
    prev_gap = gap;
  }
  CHECK(rows == 4);
  CHECK(gap_monotone);  // holds for the default seed; the trend over many
                         // seeds is asserted in the acceptance suite
  std::filesystem::remove_all("test_out_contour");
}

TEST_CASE("properties suite passes") {
  const auto results = run_property_suite(2026);
  for (const auto& r : results) {
    INFO(r.name, ": ", r.detail);
    CHECK(r.pass);
  }
}

TEST_SUITE_END();
