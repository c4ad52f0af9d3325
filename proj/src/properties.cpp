// SPDX-License-Identifier: Apache-2.0
//
// irsbeam: beam training and positioning simulator for IRS-assisted mmWave links
//
// Runtime property suite behind the `validate` subcommand: the module
// invariants, each checked on freshly drawn random instances.

#include <cmath>
#include <cstdio>
#include <functional>

#include "irsbeam/experiments.hpp"

namespace irsbeam {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

SensingMatrix random_sensing(int n_tx, int n_rx, int slots, Pcg32& rng) {
  const BeamCodebook tx = random_codebook(n_tx, slots, BeamSide::Transmit, rng);
  const BeamCodebook rx = random_codebook(n_rx, slots, BeamSide::Receive, rng);
  return SensingMatrix(tx.vectors, rx.vectors);
}

}  // namespace

std::vector<PropertyResult> run_property_suite(std::uint64_t seed) {
  std::vector<PropertyResult> results;
  const auto check = [&](const std::string& name, const std::function<std::string()>& fn) {
    PropertyResult r;
    r.name = name;
    try {
      r.detail = fn();
      r.pass = r.detail.empty();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = e.what();
    }
    results.push_back(r);
  };

  check("cosine wrap closure and inverse", [&] {
    Pcg32 rng(seed, 100);
    for (int i = 0; i < 10000; ++i) {
      const CosAngle a(rng.uniform(-1.0, 1.0)), b(rng.uniform(-1.0, 1.0));
      const CosAngle s = cos_sub(a, b);
      if (s.value() < -1.0 || s.value() >= 1.0) return std::string("range violated");
      const double back = cos_add(s, b).value();
      if (std::abs(CosAngle::wrap(back - a.value())) > 1e-12)
        return "inverse broken by " + num(back - a.value());
    }
    return std::string();
  });

  check("steering entries unit modulus, self product = n", [&] {
    Pcg32 rng(seed, 101);
    for (int i = 0; i < 200; ++i) {
      const int n = 1 + static_cast<int>(rng.next_u32() % 64);
      const Eigen::VectorXcd a = steering_vector(n, CosAngle(rng.uniform(-1.0, 1.0)));
      for (int k = 0; k < n; ++k)
        if (std::abs(std::abs(a(k)) - 1.0) > 1e-12) return std::string("modulus violated");
      if (std::abs(a.dot(a).real() - n) > 1e-9) return std::string("self product wrong");
    }
    return std::string();
  });

  check("segment-box test matches dense sampling", [&] {
    Pcg32 rng(seed, 102);
    for (int i = 0; i < 1000; ++i) {
      const Vec3 a{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
      const Vec3 b{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
      if (norm(a - b) < 1e-9) continue;
      const Box box({rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)},
                    {rng.uniform(0.1, 2), rng.uniform(0.1, 2), rng.uniform(0.1, 2)});
      bool sampled = false;
      for (int s = 0; s < 10000; ++s) {
        const double t = (s + 0.5) / 10000.0;
        const Vec3 p = a + (b - a) * t;
        if (std::abs(p.x - box.center.x) <= box.half_extents.x &&
            std::abs(p.y - box.center.y) <= box.half_extents.y &&
            std::abs(p.z - box.center.z) <= box.half_extents.z) {
          sampled = true;
          break;
        }
      }
      if (sampled && !segment_intersects_box(a, b, box))
        return std::string("missed a sampled intersection");
    }
    return std::string();
  });

  check("kron steering identity", [&] {
    Pcg32 rng(seed, 103);
    for (int i = 0; i < 200; ++i) {
      const int n_tx = 2 + static_cast<int>(rng.next_u32() % 15);
      const int n_rx = 2 + static_cast<int>(rng.next_u32() % 15);
      const SensingMatrix d = random_sensing(n_tx, n_rx, 1, rng);
      const CosAngle theta(rng.uniform(-1, 1)), phi(rng.uniform(-1, 1));
      const std::complex<double> via_kron =
          d.apply(kron_steering(theta, phi, n_rx, n_tx))(0);
      const std::complex<double> direct =
          d.rx().col(0).dot(steering_vector(n_rx, theta)) *
          steering_vector(n_tx, phi).dot(d.tx().col(0));
      if (std::abs(via_kron - direct) > 1e-12 * std::max(1.0, std::abs(direct)))
        return std::string("identity broken");
    }
    return std::string();
  });

  check("sensing row norms equal 1 for tx/rx codebooks", [&] {
    Pcg32 rng(seed, 104);
    const SensingMatrix d = random_sensing(16, 16, 32, rng);
    const Eigen::MatrixXcd dense = d.materialise();
    for (int n = 0; n < dense.rows(); ++n)
      if (std::abs(dense.row(n).norm() - 1.0) > 1e-12) return std::string("row norm wrong");
    return std::string();
  });

  check("oracle equivalence: parametric sounding vs assembled channel", [&] {
    Pcg32 rng(seed, 105);
    ExperimentConfig cfg = default_config();
    cfg.base_seed = seed;
    cfg.users = 0;
    Pcg32 scen_rng(seed, 106), nlos_rng(seed, 107);
    const Scenario scenario = sample_scenario(cfg.scenario_params(), scen_rng);
    const ChannelRealization real = realize_channel(scenario, nlos_rng);
    const BeamCodebook tx = random_codebook(cfg.bs_antennas, 16, BeamSide::Transmit, rng);
    const BeamCodebook rx = random_codebook(cfg.mt_antennas, 16, BeamSide::Receive, rng);
    Pcg32 no_noise(0, 0);
    const SoundingSession session =
        sound_step1(real, cfg.tx_power(), tx, rx, 0.0, no_noise);
    const Eigen::MatrixXcd h = assemble_channel(
        scenario, real, {}, std::vector<int>(scenario.anchors.size() - 1, 0));
    for (int n = 0; n < 16; ++n) {
      const std::complex<double> direct =
          std::sqrt(cfg.tx_power()) * rx.vectors.col(n).dot(h * tx.vectors.col(n));
      if (std::abs(direct - session.y(n)) > 1e-10)
        return "mismatch " + num(std::abs(direct - session.y(n)));
    }
    return std::string();
  });

  check("gradient matches central finite differences", [&] {
    Pcg32 rng(seed, 108);
    const double h = 1e-6;
    for (int i = 0; i < 100; ++i) {
      const SensingMatrix d = random_sensing(8, 8, 12, rng);
      Eigen::VectorXcd y(12);
      for (int n = 0; n < 12; ++n) y(n) = rng.cnormal(1.0);
      const CosAngle theta(rng.uniform(-0.9, 0.9)), phi(rng.uniform(-0.9, 0.9));
      const auto [gt, gp] = gradient_g(theta, phi, d, y);
      const double fd_t = (objective_g(CosAngle(theta.value() + h), phi, d, y) -
                           objective_g(CosAngle(theta.value() - h), phi, d, y)) /
                          (2 * h);
      const double fd_p = (objective_g(theta, CosAngle(phi.value() + h), d, y) -
                           objective_g(theta, CosAngle(phi.value() - h), d, y)) /
                          (2 * h);
      const double scale = std::max({1e-8, std::abs(fd_t), std::abs(fd_p)});
      if (std::abs(gt - fd_t) > 1e-5 * scale || std::abs(gp - fd_p) > 1e-5 * scale)
        return "gradient off by " + num(std::max(std::abs(gt - fd_t), std::abs(gp - fd_p)));
    }
    return std::string();
  });

  check("aod jacobian: finite differences and range invariance", [&] {
    Pcg32 rng(seed, 109);
    const double h = 1e-6;
    for (int i = 0; i < 100; ++i) {
      const Vec3 p{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(0, 5)};
      const Vec3 anchor{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(3, 5)};
      if (norm(p - anchor) < 0.5) continue;
      Vec3 axis{rng.normal(), rng.normal(), rng.normal()};
      axis = normalized(axis);
      const Vec3 jac = aod_jacobian(p, anchor, axis);
      const double fd[3] = {
          (aod_of_position(p + Vec3{h, 0, 0}, anchor, axis).value() -
           aod_of_position(p - Vec3{h, 0, 0}, anchor, axis).value()) /
              (2 * h),
          (aod_of_position(p + Vec3{0, h, 0}, anchor, axis).value() -
           aod_of_position(p - Vec3{0, h, 0}, anchor, axis).value()) /
              (2 * h),
          (aod_of_position(p + Vec3{0, 0, h}, anchor, axis).value() -
           aod_of_position(p - Vec3{0, 0, h}, anchor, axis).value()) /
              (2 * h)};
      const double scale = std::max({1e-8, std::abs(fd[0]), std::abs(fd[1]), std::abs(fd[2])});
      if (std::abs(jac.x - fd[0]) > 1e-5 * scale || std::abs(jac.y - fd[1]) > 1e-5 * scale ||
          std::abs(jac.z - fd[2]) > 1e-5 * scale)
        return std::string("jacobian mismatch");
      if (std::abs(dot(p - anchor, jac)) > 1e-9) return std::string("range invariance broken");
    }
    return std::string();
  });

  check("d_squared non-negative and monotone under appended rows", [&] {
    Pcg32 rng(seed, 110);
    for (int i = 0; i < 1000; ++i) {
      SensingMatrix d = random_sensing(8, 8, 4 + static_cast<int>(rng.next_u32() % 8), rng);
      const CosAngle theta(rng.uniform(-1, 1)), phi(rng.uniform(-1, 1));
      const CosAngle theta_alt(rng.uniform(-1, 1)), phi_alt(rng.uniform(-1, 1));
      const double before = d_squared(d, theta, phi, theta_alt, phi_alt);
      if (before < -1e-12) return std::string("negative d^2");
      const SensingMatrix extra = random_sensing(8, 8, 1, rng);
      d.append_slot(extra.tx().col(0), extra.rx().col(0));
      const double after = d_squared(d, theta, phi, theta_alt, phi_alt);
      if (after - before < -1e-12) return "monotonicity broken by " + num(after - before);
    }
    return std::string();
  });

  check("delta estimate solves the least-squares problem", [&] {
    Pcg32 rng(seed, 111);
    for (int i = 0; i < 200; ++i) {
      const SensingMatrix d = random_sensing(8, 8, 12, rng);
      Eigen::VectorXcd y(12);
      for (int n = 0; n < 12; ++n) y(n) = rng.cnormal(1.0);
      const CosAngle theta(rng.uniform(-1, 1)), phi(rng.uniform(-1, 1));
      const std::complex<double> delta = estimate_delta(theta, phi, d, y);
      // Independent route: dense normal equation on the materialised matrix.
      const Eigen::VectorXcd db =
          d.materialise() * kron_steering(theta, phi, 8, 8);
      const std::complex<double> lsq = db.dot(y) / db.squaredNorm();
      if (std::abs(delta - lsq) > 1e-10 * std::max(1.0, std::abs(lsq)))
        return std::string("normal-equation mismatch");
      const double base = (y - delta * db).squaredNorm();
      for (const double sign : {1.0, -1.0}) {
        const std::complex<double> perturbed = delta * (1.0 + sign * 1e-3);
        if ((y - perturbed * db).squaredNorm() <= base)
          return std::string("residual not optimal");
      }
    }
    return std::string();
  });

  check("residual ratio in [0,1]; scale equivariance", [&] {
    Pcg32 rng(seed, 112);
    for (int i = 0; i < 100; ++i) {
      const SensingMatrix d = random_sensing(8, 8, 12, rng);
      Eigen::VectorXcd y(12);
      for (int n = 0; n < 12; ++n) y(n) = rng.cnormal(1.0);
      const CosAngle theta(rng.uniform(-1, 1)), phi(rng.uniform(-1, 1));
      const std::complex<double> delta = estimate_delta(theta, phi, d, y);
      const double ratio = residual_ratio(y, delta, theta, phi, d);
      if (ratio < 0.0 || ratio > 1.0) return std::string("range violated");
      const std::complex<double> c = rng.cnormal(4.0);
      const std::complex<double> delta_scaled = estimate_delta(theta, phi, d, c * y);
      if (std::abs(delta_scaled - c * delta) > 1e-9 * std::max(1.0, std::abs(c * delta)))
        return std::string("delta not equivariant");
      const double ratio_scaled = residual_ratio(c * y, delta_scaled, theta, phi, d);
      if (std::abs(ratio_scaled - ratio) > 1e-9)
        return std::string("ratio not scale invariant");
    }
    return std::string();
  });

  check("blockage monotone in added obstacles", [&] {
    ExperimentConfig cfg = default_config();
    cfg.users = 40;
    Pcg32 rng(seed, 113);
    for (int i = 0; i < 50; ++i) {
      Scenario scenario = sample_scenario(cfg.scenario_params(), rng);
      const LinkState before = compute_blockage(scenario);
      scenario.obstacles.emplace_back(
          Vec3{rng.uniform(-10, 10), rng.uniform(-10, 10), 0.85}, Vec3{0.3, 0.2, 0.85});
      const LinkState after = compute_blockage(scenario);
      for (std::size_t l = 0; l < before.zeta.size(); ++l)
        if (before.zeta[l] == 0 && after.zeta[l] == 1)
          return std::string("an obstacle unblocked a link");
    }
    return std::string();
  });

  check("noiseless pipeline fixed point (ideal sessions)", [&] {
    // Sessions straight from the unified model: no noise, no NLoS, no Step-2
    // leakage, so the whole chain must reproduce the world exactly.
    ExperimentConfig cfg = default_config();
    cfg.users = 0;
    cfg.nlos_paths = 0;
    cfg.fine.stop_eps = 1e-16;  // run the search to full precision for the fixed point
    cfg.fine.max_iterations = 100;
    Pcg32 scen_rng(seed, 116), nlos_rng(seed, 117), cb_rng(seed, 118), none(0, 0);
    const Scenario scenario = sample_scenario(cfg.scenario_params(), scen_rng);
    const ChannelRealization real = realize_channel(scenario, nlos_rng);
    const double p_tx = cfg.tx_power();

    std::vector<AnchorObservation> obs(real.links.size());
    std::vector<SoundingSession> sessions(real.links.size());
    for (std::size_t l = 0; l < real.links.size(); ++l) {
      const LinkRecord& link = real.links[l];
      const BeamCodebook rx =
          random_codebook(cfg.mt_antennas, cfg.training_length, BeamSide::Receive, cb_rng);
      const BeamCodebook tx =
          l == 0 ? random_codebook(cfg.bs_antennas, cfg.training_length, BeamSide::Transmit,
                                   cb_rng)
                 : random_codebook(cfg.irs_elements, cfg.training_length, BeamSide::Reflect,
                                   cb_rng);
      SoundingSession& s = sessions[l];
      s.anchor_index = static_cast<int>(l) + 1;
      s.sensing = SensingMatrix(tx.vectors, rx.vectors);
      s.gain_scale = l == 0 ? std::sqrt(p_tx) : std::sqrt(p_tx * cfg.bs_antennas);
      s.gain_applied = true;
      s.y = synth_unified(1, s.gain_scale * link.delta, link.theta, link.phi, s.sensing, 0.0,
                          none);
      const PathEstimate est = estimate_path(s, cfg.grid_spec(), cfg.fine);
      obs[l].anchor_index = s.anchor_index;
      obs[l].anchor_position = scenario.anchors[l].position;
      obs[l].anchor_direction = scenario.anchors[l].array.direction;
      obs[l].aoa = est.theta;
      obs[l].aod = l == 0 ? est.phi : cos_add(est.phi, link.vlos->theta_br);
      obs[l].residual_ratio = est.residual_ratio;
      obs[l].delta = est.delta;
    }

    const auto bounds = std::make_pair(scenario.hall_min, scenario.hall_max);
    const ReliableSetResult rs =
        build_reliable_set(obs, cfg.policy, cfg.initial_position_guess(), cfg.taylor_stop_eps,
                           cfg.taylor_max_iterations, bounds);
    const double pos_err = norm(rs.fix.position - scenario.mt_position);
    if (pos_err > 1e-4) return "position error " + num(pos_err);

    std::vector<CosAngle> aoas;
    std::vector<Vec3> anchor_positions;
    for (const int idx : rs.anchors) {
      aoas.push_back(obs[idx - 1].aoa);
      anchor_positions.push_back(obs[idx - 1].anchor_position);
    }
    const Vec3 e_mt = estimate_mt_direction(rs.fix.position, aoas, anchor_positions);

    for (std::size_t l = 0; l < real.links.size(); ++l) {
      const LinkRecord& link = real.links[l];
      const auto [theta_s, phi_s] =
          refine_angles(rs.fix.position, e_mt, scenario.anchors[l].position,
                        scenario.anchors[l].array.direction);
      const double truth_phi = l == 0 ? link.phi.value() : link.vlos->phi_rm.value();
      if (std::abs(CosAngle::wrap(theta_s.value() - link.theta.value())) > 1e-6 ||
          std::abs(CosAngle::wrap(phi_s.value() - truth_phi)) > 1e-6)
        return std::string("refined angles off");
      const CosAngle phi_session =
          l == 0 ? phi_s : cos_sub(phi_s, link.vlos->theta_br);
      const double measured =
          std::abs(refined_delta(theta_s, phi_session, sessions[l])) * sessions[l].gain_scale;
      const double predicted = pathloss_from_position(
          rs.fix.position, scenario.anchors[l], scenario.anchors.front().position,
          scenario.wavelength, scenario.reflection_loss, p_tx, cfg.bs_antennas);
      if (decide_blockage(measured, predicted, cfg.policy.pathloss_threshold_db) != 1)
        return std::string("false blockage");
    }
    return std::string();
  });

  check("taylor iteration descends on clean instances", [&] {
    ExperimentConfig cfg = default_config();
    const auto anchors = cfg.anchors();
    Pcg32 rng(seed, 114);
    int descents = 0;
    const int total = 100;
    for (int i = 0; i < total; ++i) {
      const Vec3 truth{rng.uniform(-9, 9), rng.uniform(-9, 9), rng.uniform(1.2, 1.4)};
      std::vector<CosAngle> aods;
      std::vector<Vec3> positions, directions;
      for (const Anchor& a : anchors) {
        aods.push_back(aod_of_position(truth, a.position, a.array.direction));
        positions.push_back(a.position);
        directions.push_back(a.array.direction);
      }
      const Vec3 start = cfg.initial_position_guess();
      double start_cost = 0.0;
      for (std::size_t k = 0; k < aods.size(); ++k) {
        const double r =
            aods[k].value() - aod_of_position(start, positions[k], directions[k]).value();
        start_cost += r * r;
      }
      const TaylorResult fix = taylor_position(aods, positions, directions, start);
      if (fix.cost <= start_cost) ++descents;
    }
    if (descents < 95) return "descent on only " + std::to_string(descents) + "/100";
    return std::string();
  });

  check("kmeans splits separated scalars", [&] {
    Pcg32 rng(seed, 115);
    const std::vector<double> values = {0.0, 0.0, 0.0, 10.0, 10.0};
    const Kmeans1dResult r = kmeans_1d(values, 2, rng);
    for (int i = 0; i < 3; ++i)
      if (r.assignment[i] != 0) return std::string("low cluster wrong");
    for (int i = 3; i < 5; ++i)
      if (r.assignment[i] != 1) return std::string("high cluster wrong");
    return std::string();
  });

  return results;
}

}  // namespace irsbeam
