// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "irsbeam/channel.hpp"
#include "irsbeam/experiments.hpp"

using namespace irsbeam;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kLambda28 = 0.010707;
}  // namespace

TEST_SUITE_BEGIN("channel");

TEST_CASE("los gain magnitude and phase") {
  const auto d1 = los_gain(10.0, kLambda28);
  CHECK(std::abs(d1) == doctest::Approx(kLambda28 / (40.0 * kPi)).epsilon(1e-12));
  CHECK(std::abs(d1) == doctest::Approx(8.52e-5).epsilon(2e-3));
  CHECK(std::abs(los_gain(20.0, kLambda28)) == doctest::Approx(std::abs(d1) / 2.0));
  // one-wavelength step advances the phase by exactly 2*pi
  const auto a = los_gain(10.0, kLambda28);
  const auto b = los_gain(10.0 + kLambda28, kLambda28);
  CHECK(std::arg(a * std::conj(b) * std::abs(b) / std::abs(a)) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK_THROWS(los_gain(0.0, kLambda28));
}

TEST_CASE("vlos gain") {
  const double xi = std::pow(10.0, -1.3);
  const auto g = vlos_gain(5.0, 5.0, xi, kLambda28);
  CHECK(std::abs(g) ==
        doctest::Approx(std::pow(10.0, -0.65) * kLambda28 / (40.0 * kPi)).epsilon(1e-12));
  // xi = 1 and a vanishing second leg reduce to the direct form
  CHECK(std::abs(vlos_gain(7.0, 1e-12, 1.0, kLambda28)) ==
        doctest::Approx(std::abs(los_gain(7.0, kLambda28))).epsilon(1e-9));
  CHECK(std::abs(vlos_gain(10.0, 10.0, xi, kLambda28)) ==
        doctest::Approx(std::abs(g) / 2.0).epsilon(1e-12));
  CHECK_THROWS(vlos_gain(-1.0, 5.0, xi, kLambda28));
  CHECK_THROWS(vlos_gain(5.0, 5.0, 0.0, kLambda28));
}

TEST_CASE("effective irs gain") {
  Pcg32 rng(21, 0);
  const int n_r = 16;
  const CosAngle phi_rm(0.37), theta_br(-0.22);
  const std::complex<double> delta_bar(3e-5, -1e-5);

  const Eigen::VectorXcd optimal = steering_vector(n_r, cos_sub(phi_rm, theta_br));
  const auto best = effective_irs_gain(optimal, phi_rm, theta_br, delta_bar);
  CHECK(std::abs(best) == doctest::Approx(std::abs(delta_bar) * n_r).epsilon(1e-12));

  // orthogonal reflection pattern: half-integer beam offset
  const Eigen::VectorXcd ortho =
      steering_vector(n_r, cos_add(cos_sub(phi_rm, theta_br), CosAngle(2.0 / n_r)));
  CHECK(std::abs(effective_irs_gain(ortho, phi_rm, theta_br, delta_bar)) < 1e-12);

  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXcd g(n_r);
    for (int k = 0; k < n_r; ++k) g(k) = std::polar(1.0, rng.uniform(0.0, 2.0 * kPi));
    CHECK(std::abs(effective_irs_gain(g, phi_rm, theta_br, delta_bar)) <=
          std::abs(delta_bar) * n_r * (1.0 + 1e-12));
  }
}

TEST_CASE("nlos sampling moments and ranges") {
  Pcg32 rng(22, 0);
  CHECK(sample_nlos(0, 1e-4, 20.0, rng).empty());

  const double abs_d1 = 8.5e-5;
  double sum_sq = 0.0;
  const int samples = 100000;
  const auto paths = sample_nlos(samples, abs_d1, 20.0, rng);
  for (const NlosPath& p : paths) {
    sum_sq += std::norm(p.delta);
    REQUIRE(p.theta.value() >= -1.0);
    REQUIRE(p.theta.value() < 1.0);
    REQUIRE(p.phi.value() >= -1.0);
    REQUIRE(p.phi.value() < 1.0);
  }
  const double expected = abs_d1 * abs_d1 / 100.0;
  CHECK(sum_sq / samples == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("scenario sampling") {
  ExperimentConfig cfg = default_config();
  cfg.users = 0;
  Pcg32 rng(23, 0);
  const Scenario empty = sample_scenario(cfg.scenario_params(), rng);
  CHECK(empty.obstacles.empty());
  CHECK(compute_blockage(empty).zeta == std::vector<int>(13, 1));

  cfg.users = 100;
  Pcg32 rng_a(24, 0), rng_b(24, 0);
  const Scenario a = sample_scenario(cfg.scenario_params(), rng_a);
  const Scenario b = sample_scenario(cfg.scenario_params(), rng_b);
  REQUIRE(a.obstacles.size() == 99);
  CHECK(a.mt_position.x == b.mt_position.x);
  CHECK(a.mt_position.y == b.mt_position.y);
  CHECK(a.mt_position.z == b.mt_position.z);
  for (std::size_t i = 0; i < a.obstacles.size(); ++i) {
    CHECK(a.obstacles[i].center.x == b.obstacles[i].center.x);
    CHECK(a.obstacles[i].center.y == b.obstacles[i].center.y);
  }
  CHECK(a.mt_position.z >= 1.2);
  CHECK(a.mt_position.z <= 1.4);

  // pairwise non-overlap of the holder footprints
  for (std::size_t i = 0; i < a.obstacles.size(); ++i)
    for (std::size_t j = i + 1; j < a.obstacles.size(); ++j) {
      const bool separated =
          std::abs(a.obstacles[i].center.x - a.obstacles[j].center.x) >= 0.6 ||
          std::abs(a.obstacles[i].center.y - a.obstacles[j].center.y) >= 0.4;
      CHECK(separated);
    }

  // saturated hall: rejection budget must trip
  cfg.users = 100000;
  Pcg32 rng_full(25, 0);
  CHECK_THROWS(sample_scenario(cfg.scenario_params(), rng_full));
}

TEST_CASE("blockage evaluation") {
  ExperimentConfig cfg = default_config();
  cfg.users = 0;
  Pcg32 rng(26, 0);
  Scenario s = sample_scenario(cfg.scenario_params(), rng);

  // an obstacle straddling the BS-MT midpoint kills the direct link
  const Vec3 bs = s.anchors.front().position;
  const Vec3 mid = (bs + s.mt_position) / 2.0;
  s.obstacles.emplace_back(mid, Vec3{3.0, 3.0, 3.0});
  const LinkState state = compute_blockage(s);
  CHECK(state.zeta[0] == 0);
}

TEST_CASE("assembled channel structure") {
  ExperimentConfig cfg = default_config();
  cfg.users = 0;
  cfg.nlos_paths = 0;
  Pcg32 scen_rng(27, 0), nlos_rng(27, 1);
  const Scenario s = sample_scenario(cfg.scenario_params(), scen_rng);
  ChannelRealization real = realize_channel(s, nlos_rng);
  REQUIRE(real.nlos.empty());

  const std::vector<int> off(s.anchors.size() - 1, 0);
  const Eigen::MatrixXcd h = assemble_channel(s, real, {}, off);
  const LinkRecord& los = real.links.front();

  // single-path channel is rank one with the Frobenius identity
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(h);
  CHECK(svd.singularValues()(1) < 1e-12 * svd.singularValues()(0));
  CHECK(h.norm() == doctest::Approx(std::abs(los.delta) * 16.0).epsilon(1e-10));

  ChannelRealization blocked = real;
  blocked.links.front().zeta = 0;
  CHECK(assemble_channel(s, blocked, {}, off).norm() == doctest::Approx(0.0));

  // one IRS with the optimal reflection achieves |delta_bar| * N_R * sqrt(Nm*Nb)
  std::vector<int> act(s.anchors.size() - 1, 0);
  act[2] = 1;
  const VlosGeometry& geo = *real.links[3].vlos;
  std::vector<Eigen::VectorXcd> refl(s.anchors.size() - 1, Eigen::VectorXcd());
  refl[2] = steering_vector(16, cos_sub(geo.phi_rm, geo.theta_br));
  const Eigen::MatrixXcd h_vlos = assemble_channel(s, blocked, refl, act);
  CHECK(h_vlos.norm() ==
        doctest::Approx(std::abs(real.links[3].delta) * 16.0 * 16.0).epsilon(1e-10));
}

TEST_CASE("bs-irs priors come from geometry") {
  ExperimentConfig cfg = default_config();
  cfg.users = 0;
  Pcg32 scen_rng(28, 0), nlos_rng(28, 1);
  const Scenario s = sample_scenario(cfg.scenario_params(), scen_rng);
  const ChannelRealization real = realize_channel(s, nlos_rng);
  for (std::size_t i = 1; i < real.links.size(); ++i) {
    const VlosGeometry& geo = *real.links[i].vlos;
    const Anchor& irs = s.anchors[i];
    const Anchor& bs = s.anchors.front();
    CHECK(geo.theta_br.value() ==
          cosine_of_direction(irs.position, bs.position, irs.array.direction).value());
    CHECK(geo.phi_br.value() ==
          cosine_of_direction(irs.position, bs.position, bs.array.direction).value());
    // the equivalent AoD stored on the link is phi_rm (-) theta_br
    CHECK(real.links[i].phi.value() ==
          doctest::Approx(cos_sub(geo.phi_rm, geo.theta_br).value()));
  }
}

TEST_SUITE_END();
