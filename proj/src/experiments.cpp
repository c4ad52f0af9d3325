// SPDX-License-Identifier: Apache-2.0
//
// irsbeam: beam training and positioning simulator for IRS-assisted mmWave links

#include "irsbeam/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

namespace irsbeam {

namespace {

// Per-trial substreams; the stream id encodes (trial, purpose) so results
// are independent of worker scheduling.
enum StreamPurpose : std::uint64_t {
  kScenarioStream = 0,
  kNlosStream = 1,
  kCodebookStream = 2,
  kNoiseStream = 3,
  kKmeansStream = 4,
  kBaselineStream = 5,
};

Pcg32 trial_rng(const ExperimentConfig& cfg, std::uint64_t trial, StreamPurpose purpose,
                std::uint64_t extra = 0) {
  return Pcg32(cfg.base_seed ^ extra, trial * 8 + purpose);
}

// ---------------------------------------------------------------------------
// Pre-configured sounding codebooks. Beam training deploys one codebook that
// was derived offline, so candidates are screened here once per shape: a
// coherence pre-filter over the projected steering dictionary followed by a
// short interference-only Monte Carlo that counts gross estimation errors.
// Results are cached; the screening streams depend only on the codebook seed.

struct CodebookPair {
  BeamCodebook tx;
  BeamCodebook rx;
};

double dictionary_coherence(const SensingMatrix& d, int grid_n, double lobe) {
  std::vector<double> angles(grid_n);
  for (int i = 0; i < grid_n; ++i) angles[i] = -1.0 + (2.0 * i + 1.0) / grid_n;
  const int cols = grid_n * grid_n;
  Eigen::MatrixXcd m(d.slots(), cols);
  for (int i = 0; i < grid_n; ++i) {
    const Eigen::VectorXcd u =
        d.rx_products(steering_vector(d.rx_elements(), CosAngle(angles[i])));
    for (int k = 0; k < grid_n; ++k) {
      const Eigen::VectorXcd v =
          d.tx_products(steering_vector(d.tx_elements(), CosAngle(angles[k])));
      Eigen::VectorXcd db = u.cwiseProduct(v);
      m.col(i * grid_n + k) = db / db.norm();
    }
  }
  const Eigen::MatrixXcd gram = m.adjoint() * m;
  double worst = 0.0;
  for (int a = 0; a < cols; ++a) {
    for (int b = a + 1; b < cols; ++b) {
      const double dt = std::abs(
          CosAngle::wrap(angles[a / grid_n] - angles[b / grid_n]));
      const double dp = std::abs(
          CosAngle::wrap(angles[a % grid_n] - angles[b % grid_n]));
      if (dt < lobe && dp < lobe) continue;  // same main lobe
      worst = std::max(worst, std::abs(gram(a, b)));
    }
  }
  return worst;
}

CodebookPair screen_codebook_pair(int tx_elements, BeamSide tx_side, int rx_elements,
                                  int length, std::uint64_t seed) {
  const int candidates = std::clamp(2048 / length, 8, 256);
  const int finalists = std::clamp(128 / length, 4, 8);
  const int probe_trials = std::clamp(32768 / length, 128, 4096);
  const double lobe = 2.0 / std::max(tx_elements, rx_elements);
  const int grid_n = length >= 64 ? 16 : 32;

  std::vector<CodebookPair> pool(candidates);
  std::vector<std::pair<double, int>> by_coherence;
  for (int c = 0; c < candidates; ++c) {
    Pcg32 rng(mix_seed(seed + 0x9E37 * c), 7771);
    pool[c].tx = random_codebook(tx_elements, length, tx_side, rng);
    pool[c].rx = random_codebook(rx_elements, length, BeamSide::Receive, rng);
    const SensingMatrix d(pool[c].tx.vectors, pool[c].rx.vectors);
    by_coherence.emplace_back(dictionary_coherence(d, grid_n, lobe), c);
  }
  std::sort(by_coherence.begin(), by_coherence.end());

  // Finalists duel on a paired interference-only Monte Carlo; the capped
  // square error weighs both how often and how badly a codebook fails.
  const GridSpec grid = GridSpec::for_arrays(tx_elements, rx_elements);
  const FineSearchConfig fine;
  int best_index = by_coherence.front().second;
  double best_score = std::numeric_limits<double>::infinity();
  for (int f = 0; f < finalists && f < candidates; ++f) {
    const int c = by_coherence[f].second;
    const SensingMatrix d(pool[c].tx.vectors, pool[c].rx.vectors);
    Pcg32 probe_rng(mix_seed(seed ^ 0xABCDEF), 4242);
    double score = 0.0;
    for (int t = 0; t < probe_trials; ++t) {
      const CosAngle theta(probe_rng.uniform(-1, 1)), phi(probe_rng.uniform(-1, 1));
      Pcg32 none(0, 0);
      Eigen::VectorXcd y = synth_unified(1, 1.0, theta, phi, d, 0.0, none);
      for (int l = 0; l < 4; ++l) {  // interference 20 dB below the path
        const std::complex<double> gain = probe_rng.cnormal(1e-2);
        const CosAngle tl(std::cos(probe_rng.uniform(0.0, 6.283185307179586)));
        const CosAngle pl(std::cos(probe_rng.uniform(0.0, 6.283185307179586)));
        y += synth_unified(1, gain, tl, pl, d, 0.0, none);
      }
      SoundingSession session;
      session.sensing = d;
      session.y = y;
      session.gain_scale = 1.0;
      session.gain_applied = true;
      const PathEstimate est = estimate_path(session, grid, fine);
      const double et = CosAngle::wrap(est.theta.value() - theta.value());
      const double ep = CosAngle::wrap(est.phi.value() - phi.value());
      score += std::min(et * et + ep * ep, 2e-2);
    }
    if (score < best_score) {
      best_score = score;
      best_index = c;
    }
  }
  return pool[best_index];
}

const CodebookPair& screened_pair(int tx_elements, BeamSide tx_side, int rx_elements,
                                  int length, std::uint64_t seed) {
  struct Key {
    int tx_elements, rx_elements, length;
    BeamSide tx_side;
    std::uint64_t seed;
    bool operator<(const Key& o) const {
      return std::tie(tx_elements, rx_elements, length, tx_side, seed) <
             std::tie(o.tx_elements, o.rx_elements, o.length, o.tx_side, o.seed);
    }
  };
  static std::mutex cache_mutex;
  static std::map<Key, CodebookPair> cache;
  const Key key{tx_elements, rx_elements, length, tx_side, seed};
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, screen_codebook_pair(tx_elements, tx_side, rx_elements, length,
                                                 seed)).first;
  return it->second;
}

// Ordered-result parallel loop; worker count never changes the outputs.
void parallel_for(std::uint64_t n, int workers, const std::function<void(std::uint64_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::uint64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const int count = static_cast<int>(std::min<std::uint64_t>(workers, n));
  pool.reserve(count);
  for (int w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::uint64_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string csv_banner(const ExperimentConfig& cfg) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "# config_hash=0x%016llx seed=%llu trials=%llu\n",
                static_cast<unsigned long long>(config_hash(cfg)),
                static_cast<unsigned long long>(cfg.base_seed),
                static_cast<unsigned long long>(cfg.trials));
  return buf;
}

std::string write_csv(const ExperimentConfig& cfg, const std::string& name,
                      const std::string& columns, const std::vector<std::string>& rows) {
  std::filesystem::create_directories(cfg.out_dir);
  const std::string path = (std::filesystem::path(cfg.out_dir) / name).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  out << csv_banner(cfg) << columns << "\n";
  for (const std::string& row : rows) out << row << "\n";
  return path;
}

double wrapped_sq_error(double estimate, double truth) {
  const double e = CosAngle::wrap(estimate - truth);
  return e * e;
}

const std::vector<double> kPowerSweepDbm = {0, 3, 6, 9, 12, 15, 18, 21, 24, 27, 30};
const std::vector<int> kTrainingLengths = {8, 16};

}  // namespace

TrialRecord run_trial(const ExperimentConfig& cfg, std::uint64_t trial_id) {
  TrialRecord rec;
  rec.trial_id = trial_id;

  Pcg32 scen_rng = trial_rng(cfg, trial_id, kScenarioStream);
  Pcg32 nlos_rng = trial_rng(cfg, trial_id, kNlosStream);
  Pcg32 noise_rng = trial_rng(cfg, trial_id, kNoiseStream);
  Pcg32 kmeans_rng = trial_rng(cfg, trial_id, kKmeansStream);
  const CodebookPair& direct_cb = screened_pair(cfg.bs_antennas, BeamSide::Transmit,
                                                cfg.mt_antennas, cfg.training_length,
                                                cfg.codebook_seed);
  const CodebookPair& bounce_cb = screened_pair(cfg.irs_elements, BeamSide::Reflect,
                                                cfg.mt_antennas, cfg.training_length,
                                                cfg.codebook_seed);

  const Scenario scenario = sample_scenario(cfg.scenario_params(), scen_rng);
  const ChannelRealization real = realize_channel(scenario, nlos_rng);
  rec.mt_true = scenario.mt_position;
  rec.mt_direction_true = scenario.mt_array.direction;

  const GridSpec grid = cfg.grid_spec();
  const double p_tx = cfg.tx_power();
  const double noise = cfg.noise_power();
  const int n_links = static_cast<int>(real.links.size());

  std::vector<SoundingSession> sessions;
  sessions.reserve(n_links);
  std::vector<AnchorObservation> observations(n_links);
  rec.links.resize(n_links);

  for (int l = 0; l < n_links; ++l) {
    const LinkRecord& link = real.links[l];
    LinkOutcome& out = rec.links[l];
    out.anchor_index = link.anchor_index;
    out.zeta_true = link.zeta;
    out.theta_true = link.theta.value();
    out.phi_true = (l == 0) ? link.phi.value() : link.vlos->phi_rm.value();

    SoundingSession session;
    if (l == 0) {
      session = sound_step1(real, p_tx, direct_cb.tx, direct_cb.rx, noise, noise_rng);
    } else {
      session = sound_step2(real, l, p_tx, cfg.bs_antennas, bounce_cb.tx, bounce_cb.rx,
                            noise, noise_rng,
                            cfg.step2_exact_leakage ? Step2Leakage::Exact
                                                    : Step2Leakage::SpatiallyFiltered);
    }
    out.received_power = session.y.squaredNorm() / session.y.size();

    AnchorObservation& obs = observations[l];
    obs.anchor_index = link.anchor_index;
    obs.anchor_position = scenario.anchors[l].position;
    obs.anchor_direction = scenario.anchors[l].array.direction;
    try {
      const PathEstimate est = estimate_path(session, grid, cfg.fine);
      out.estimate_ok = true;
      out.theta_ml = est.theta.value();
      // IRS links: rotate the equivalent AoD back by the known theta_BR.
      out.phi_ml =
          (l == 0) ? est.phi.value() : cos_add(est.phi, link.vlos->theta_br).value();
      out.residual_ratio = est.residual_ratio;
      out.delta_ml = est.delta;
      obs.aoa = est.theta;
      obs.aod = CosAngle(out.phi_ml);
      obs.residual_ratio = est.residual_ratio;
      obs.delta = est.delta;
      obs.valid = true;
    } catch (const std::exception& e) {
      obs.valid = false;
      if (rec.note.empty()) rec.note = std::string("estimate: ") + e.what();
    }
    sessions.push_back(std::move(session));
  }

  // Stage III: positioning, direction, refinement, blockage decision.
  try {
    // The constraint set for positioning is the MT position range: the hall
    // footprint at handheld altitude, not the full hall volume.
    const auto bounds = std::make_pair(
        Vec3{scenario.hall_min.x, scenario.hall_min.y, cfg.mt_z_min},
        Vec3{scenario.hall_max.x, scenario.hall_max.y, cfg.mt_z_max});
    const ReliableSetResult rs =
        build_reliable_set(observations, cfg.policy, cfg.initial_position_guess(),
                           cfg.taylor_stop_eps, cfg.taylor_max_iterations, bounds);
    rec.fix_ok = true;
    rec.low_confidence = rs.low_confidence;
    rec.mt_estimate = rs.fix.position;
    rec.reliable_set = rs.anchors;
    rec.position_error = norm(rec.mt_estimate - rec.mt_true);

    std::vector<CosAngle> aoas;
    std::vector<Vec3> anchor_positions;
    for (const int idx : rs.anchors) {
      aoas.push_back(observations[idx - 1].aoa);
      anchor_positions.push_back(observations[idx - 1].anchor_position);
    }
    rec.mt_direction_estimate =
        estimate_mt_direction(rec.mt_estimate, aoas, anchor_positions);

    for (int l = 0; l < n_links; ++l) {
      LinkOutcome& out = rec.links[l];
      const auto [theta_s, phi_s] =
          refine_angles(rec.mt_estimate, rec.mt_direction_estimate,
                        scenario.anchors[l].position, scenario.anchors[l].array.direction);
      out.theta_refined = theta_s.value();
      out.phi_refined = phi_s.value();
      const CosAngle phi_session =
          (l == 0) ? phi_s : cos_sub(phi_s, real.links[l].vlos->theta_br);
      out.delta_refined = refined_delta(theta_s, phi_session, sessions[l]);
      const double measured = std::abs(out.delta_refined) * sessions[l].gain_scale;
      const double predicted = pathloss_from_position(
          rec.mt_estimate, scenario.anchors[l], scenario.anchors.front().position,
          scenario.wavelength, scenario.reflection_loss, p_tx, cfg.bs_antennas);
      out.zeta_decided =
          decide_blockage(measured, predicted, cfg.policy.pathloss_threshold_db);
      if (out.zeta_decided != out.zeta_true) ++rec.position_aided_errors;
    }
  } catch (const std::exception& e) {
    rec.fix_ok = false;
    if (rec.note.empty()) rec.note = std::string("positioning: ") + e.what();
    rec.position_aided_errors = n_links;  // no fix, no decisions
  }

  // Blockage clustering baselines over the per-link features.
  std::vector<double> residuals(n_links), powers(n_links);
  for (int l = 0; l < n_links; ++l) {
    residuals[l] = rec.links[l].residual_ratio;
    powers[l] = rec.links[l].received_power;
  }
  const Kmeans1dResult by_residual = kmeans_1d(residuals, 2, kmeans_rng);
  const Kmeans1dResult by_power = kmeans_1d(powers, 2, kmeans_rng);
  for (int l = 0; l < n_links; ++l) {
    // Residual feature: low cluster = unblocked. Power feature: low = blocked.
    const int pred_residual =
        by_residual.degenerate ? 1 : (by_residual.assignment[l] == 0 ? 1 : 0);
    const int pred_power = by_power.degenerate ? 1 : (by_power.assignment[l] == 0 ? 0 : 1);
    if (pred_residual != rec.links[l].zeta_true) ++rec.kmeans_residual_errors;
    if (pred_power != rec.links[l].zeta_true) ++rec.kmeans_power_errors;
  }
  return rec;
}

namespace {

// BS-MT link world used by the beam-training-only figures: obstacle-free
// (zeta = 1), random MT pose, optional NLoS interference.
struct BsLinkWorld {
  Scenario scenario;
  ChannelRealization realization;
};

BsLinkWorld sample_bs_link_world(const ExperimentConfig& cfg, std::uint64_t trial, int nlos) {
  ExperimentConfig local = cfg;
  local.users = 0;
  local.nlos_paths = nlos;
  Pcg32 scen_rng = trial_rng(cfg, trial, kScenarioStream);
  Pcg32 nlos_rng = trial_rng(cfg, trial, kNlosStream);
  BsLinkWorld world;
  world.scenario = sample_scenario(local.scenario_params(), scen_rng);
  world.realization = realize_channel(world.scenario, nlos_rng);
  return world;
}

struct Fig5Point {
  double sum_sq_theta = 0.0;
  double sum_sq_phi = 0.0;
  double sum_crb_theta = 0.0;
  double sum_crb_phi = 0.0;
};

}  // namespace

std::vector<std::string> run_fig5(const ExperimentConfig& cfg) {
  std::vector<std::string> rows;
  for (const int n_train : kTrainingLengths) {
    for (const int nlos : {0, cfg.nlos_paths}) {
      for (const double dbm : kPowerSweepDbm) {
        ExperimentConfig point = cfg;
        point.tx_power_dbm = dbm;
        point.training_length = n_train;
        const double p_tx = point.tx_power();
        const double noise = point.noise_power();

        const CodebookPair& cb = screened_pair(point.bs_antennas, BeamSide::Transmit,
                                               point.mt_antennas, n_train,
                                               point.codebook_seed);
        std::vector<Fig5Point> partial(cfg.trials);
        parallel_for(cfg.trials, cfg.workers, [&](std::uint64_t t) {
          const BsLinkWorld world = sample_bs_link_world(point, t, nlos);
          Pcg32 noise_rng = trial_rng(point, t, kNoiseStream);
          const SoundingSession session =
              sound_step1(world.realization, p_tx, cb.tx, cb.rx, noise, noise_rng);
          const PathEstimate est = estimate_path(session, point.grid_spec(), point.fine);
          const LinkRecord& truth = world.realization.links.front();
          Fig5Point& p = partial[t];
          p.sum_sq_theta = wrapped_sq_error(est.theta.value(), truth.theta.value());
          p.sum_sq_phi = wrapped_sq_error(est.phi.value(), truth.phi.value());
          const auto [crb_t, crb_p] =
              crb_numeric(session.sensing, session.gain_scale * truth.delta, truth.theta,
                          truth.phi, noise);
          p.sum_crb_theta = crb_t;
          p.sum_crb_phi = crb_p;
        });

        Fig5Point total;
        for (const Fig5Point& p : partial) {
          total.sum_sq_theta += p.sum_sq_theta;
          total.sum_sq_phi += p.sum_sq_phi;
          total.sum_crb_theta += p.sum_crb_theta;
          total.sum_crb_phi += p.sum_crb_phi;
        }
        const double n = static_cast<double>(cfg.trials);
        rows.push_back(fmt(dbm) + "," + std::to_string(n_train) + "," +
                       (nlos == 0 ? "los" : "los_nlos") + "," + fmt(total.sum_sq_theta / n) +
                       "," + fmt(total.sum_sq_phi / n) + "," + fmt(total.sum_crb_theta / n) +
                       "," + fmt(total.sum_crb_phi / n) + "," +
                       std::to_string(cfg.trials));
      }
    }
  }
  return {write_csv(cfg, "fig5.csv",
                    "power_dbm,training_length,channel,mse_aoa,mse_aod,crb_aoa,crb_aod,trials",
                    rows)};
}

std::vector<std::string> run_fig6(const ExperimentConfig& cfg) {
  std::vector<std::string> rows;
  for (const int users : {20, 50, 100}) {
    ExperimentConfig point = cfg;
    point.users = users;
    const ScenarioParams params = point.scenario_params();
    const int n_links = static_cast<int>(params.anchors.size());

    std::vector<int> blocked_per_trial(cfg.trials, 0);
    parallel_for(cfg.trials, cfg.workers, [&](std::uint64_t t) {
      Pcg32 scen_rng = trial_rng(point, t, kScenarioStream);
      const Scenario scenario = sample_scenario(params, scen_rng);
      const LinkState state = compute_blockage(scenario);
      int blocked = 0;
      for (const int z : state.zeta) blocked += (z == 0) ? 1 : 0;
      blocked_per_trial[t] = blocked;
    });

    std::vector<int> histogram(n_links + 1, 0);
    for (const int b : blocked_per_trial) ++histogram[b];
    for (int j = 0; j <= n_links; ++j)
      rows.push_back(std::to_string(users) + "," + std::to_string(j) + "," +
                     fmt(static_cast<double>(histogram[j]) / cfg.trials) + "," +
                     std::to_string(cfg.trials));
  }
  return {write_csv(cfg, "fig6.csv", "users,blocked_links,probability,draws", rows)};
}

namespace {

const std::vector<int> kFig7TrainingLengths = {8, 16, 32, 64, 128, 256};

}  // namespace

std::vector<std::string> run_fig7(const ExperimentConfig& cfg) {
  std::vector<std::string> rows;

  // one pre-configured codebook pair per training length
  std::vector<const CodebookPair*> pairs;
  for (const int n : kFig7TrainingLengths)
    pairs.push_back(&screened_pair(cfg.bs_antennas, BeamSide::Transmit, cfg.mt_antennas, n,
                                   cfg.codebook_seed));

  for (const double dbm : {-20.0, 0.0}) {
    ExperimentConfig point = cfg;
    point.tx_power_dbm = dbm;
    const double p_tx = point.tx_power();
    const double noise = point.noise_power();
    const DftCodebook dft_tx = make_dft_codebook(point.bs_antennas);
    const DftCodebook dft_rx = make_dft_codebook(point.mt_antennas);

    struct Fig7Trial {
      std::vector<int> random_miss;
      int exhaustive_miss = 0;
    };
    std::vector<Fig7Trial> partial(cfg.trials);

    parallel_for(cfg.trials, cfg.workers, [&](std::uint64_t t) {
      const BsLinkWorld world = sample_bs_link_world(point, t, point.nlos_paths);
      Pcg32 noise_rng = trial_rng(point, t, kNoiseStream);
      Pcg32 sweep_rng = trial_rng(point, t, kBaselineStream);

      const Eigen::MatrixXcd h =
          assemble_channel(world.scenario, world.realization, {},
                           std::vector<int>(world.scenario.anchors.size() - 1, 0));
      const auto oracle = best_true_pair(h, dft_tx, dft_rx);

      Fig7Trial& out = partial[t];
      out.random_miss.resize(kFig7TrainingLengths.size());
      for (std::size_t i = 0; i < kFig7TrainingLengths.size(); ++i) {
        const SoundingSession session = sound_step1(world.realization, p_tx, pairs[i]->tx,
                                                    pairs[i]->rx, noise, noise_rng);
        const PathEstimate est = estimate_path(session, point.grid_spec(), point.fine);
        const int tx_beam = quantize_to_codebook(est.phi, dft_tx);
        const int rx_beam = quantize_to_codebook(est.theta, dft_rx);
        out.random_miss[i] = (tx_beam != oracle.first || rx_beam != oracle.second) ? 1 : 0;
      }
      const auto swept =
          exhaustive_sweep(std::sqrt(p_tx) * h, dft_tx, dft_rx, noise, sweep_rng);
      out.exhaustive_miss = (swept != oracle) ? 1 : 0;
    });

    std::vector<int> random_total(kFig7TrainingLengths.size(), 0);
    int exhaustive_total = 0;
    for (const Fig7Trial& p : partial) {
      for (std::size_t i = 0; i < kFig7TrainingLengths.size(); ++i)
        random_total[i] += p.random_miss[i];
      exhaustive_total += p.exhaustive_miss;
    }
    for (std::size_t i = 0; i < kFig7TrainingLengths.size(); ++i)
      rows.push_back(fmt(dbm) + ",random," + std::to_string(kFig7TrainingLengths[i]) + "," +
                     fmt(static_cast<double>(random_total[i]) / cfg.trials) + "," +
                     std::to_string(cfg.trials));
    rows.push_back(fmt(dbm) + ",exhaustive," +
                   std::to_string(point.bs_antennas * point.mt_antennas) + "," +
                   fmt(static_cast<double>(exhaustive_total) / cfg.trials) + "," +
                   std::to_string(cfg.trials));
  }
  return {write_csv(cfg, "fig7.csv",
                    "power_dbm,method,training_length,misalignment_rate,trials", rows)};
}

std::vector<std::string> run_fig8(const ExperimentConfig& cfg) {
  std::vector<std::string> rows;
  for (const int n_train : kTrainingLengths) {
    for (const double dbm : kPowerSweepDbm) {
      ExperimentConfig point = cfg;
      point.tx_power_dbm = dbm;
      point.training_length = n_train;

      std::vector<TrialRecord> records(cfg.trials);
      parallel_for(cfg.trials, cfg.workers,
                   [&](std::uint64_t t) { records[t] = run_trial(point, t); });

      // Confident fixes only: low-confidence outputs are flagged precisely
      // because the consistency test could not vouch for them.
      double sum_sq = 0.0;
      std::uint64_t fixes = 0;
      for (const TrialRecord& r : records) {
        if (!r.fix_ok || r.low_confidence) continue;
        sum_sq += r.position_error * r.position_error;
        ++fixes;
      }
      const double rmse = fixes > 0 ? std::sqrt(sum_sq / fixes) : -1.0;
      rows.push_back(fmt(dbm) + "," + std::to_string(n_train) + "," + fmt(rmse) + "," +
                     std::to_string(fixes) + "," + std::to_string(cfg.trials));
    }
  }
  return {write_csv(cfg, "fig8.csv", "power_dbm,training_length,rmse_m,fixes,trials", rows)};
}

std::vector<std::string> run_fig9(const ExperimentConfig& cfg) {
  std::vector<std::string> rows;
  for (const int n_train : kTrainingLengths) {
    for (const double dbm : kPowerSweepDbm) {
      ExperimentConfig point = cfg;
      point.tx_power_dbm = dbm;
      point.training_length = n_train;

      std::vector<TrialRecord> records(cfg.trials);
      parallel_for(cfg.trials, cfg.workers,
                   [&](std::uint64_t t) { records[t] = run_trial(point, t); });

      std::uint64_t links = 0, pos_err = 0, res_err = 0, pow_err = 0;
      for (const TrialRecord& r : records) {
        links += r.links.size();
        pos_err += r.position_aided_errors;
        res_err += r.kmeans_residual_errors;
        pow_err += r.kmeans_power_errors;
      }
      const double denom = static_cast<double>(links);
      rows.push_back(fmt(dbm) + "," + std::to_string(n_train) + ",position_aided," +
                     fmt(pos_err / denom) + "," + std::to_string(cfg.trials));
      rows.push_back(fmt(dbm) + "," + std::to_string(n_train) + ",kmeans_residual," +
                     fmt(res_err / denom) + "," + std::to_string(cfg.trials));
      rows.push_back(fmt(dbm) + "," + std::to_string(n_train) + ",kmeans_power," +
                     fmt(pow_err / denom) + "," + std::to_string(cfg.trials));
    }
  }
  return {write_csv(cfg, "fig9.csv", "power_dbm,training_length,method,error_rate,trials",
                    rows)};
}

std::vector<std::string> run_fig10(const ExperimentConfig& cfg) {
  std::vector<std::string> rows;
  for (const int n_train : kTrainingLengths) {
    for (const double dbm : kPowerSweepDbm) {
      ExperimentConfig point = cfg;
      point.tx_power_dbm = dbm;
      point.training_length = n_train;

      std::vector<TrialRecord> records(cfg.trials);
      parallel_for(cfg.trials, cfg.workers,
                   [&](std::uint64_t t) { records[t] = run_trial(point, t); });

      // Unblocked links only, and only from trials with a usable fix so the
      // raw/refined comparison stays paired.
      double ml_theta = 0.0, ml_phi = 0.0, ref_theta = 0.0, ref_phi = 0.0;
      std::uint64_t used = 0;
      for (const TrialRecord& r : records) {
        if (!r.fix_ok) continue;
        for (const LinkOutcome& link : r.links) {
          if (link.zeta_true != 1 || !link.estimate_ok) continue;
          ml_theta += wrapped_sq_error(link.theta_ml, link.theta_true);
          ml_phi += wrapped_sq_error(link.phi_ml, link.phi_true);
          ref_theta += wrapped_sq_error(link.theta_refined, link.theta_true);
          ref_phi += wrapped_sq_error(link.phi_refined, link.phi_true);
          ++used;
        }
      }
      const double denom = used > 0 ? static_cast<double>(used) : 1.0;
      rows.push_back(fmt(dbm) + "," + std::to_string(n_train) + ",ml," +
                     fmt(ml_theta / denom) + "," + fmt(ml_phi / denom) + "," +
                     std::to_string(used));
      rows.push_back(fmt(dbm) + "," + std::to_string(n_train) + ",refined," +
                     fmt(ref_theta / denom) + "," + fmt(ref_phi / denom) + "," +
                     std::to_string(used));
    }
  }
  return {write_csv(cfg, "fig10.csv",
                    "power_dbm,training_length,estimator,mse_aoa,mse_aod,links", rows)};
}

std::vector<std::string> run_contour(const ExperimentConfig& cfg) {
  const std::vector<int> lengths = {4, 8, 12, 16};
  const int grid_n = 128;
  const int full_length = lengths.back();

  Pcg32 cb_rng(cfg.base_seed ^ mix_seed(cfg.codebook_seed), kCodebookStream);
  const BeamCodebook rx = random_codebook(cfg.mt_antennas, full_length, BeamSide::Receive, cb_rng);
  const BeamCodebook tx = random_codebook(cfg.bs_antennas, full_length, BeamSide::Transmit, cb_rng);
  const SensingMatrix full(tx.vectors, rx.vectors);

  Pcg32 no_noise(0, 0);
  const Eigen::VectorXcd y_full =
      synth_unified(1, 1.0, CosAngle(0.0), CosAngle(0.0), full, 0.0, no_noise);

  std::vector<std::string> grid_rows, peak_rows;
  for (const int n : lengths) {
    const SensingMatrix d = full.prefix(n);
    const Eigen::VectorXcd y = y_full.head(n);
    const Eigen::MatrixXd g = objective_grid(d, y, grid_n, grid_n);

    for (int i = 0; i < grid_n; ++i)
      for (int k = 0; k < grid_n; ++k)
        grid_rows.push_back(std::to_string(n) + "," +
                            fmt(-1.0 + (2.0 * (i + 1) - 1.0) / grid_n) + "," +
                            fmt(-1.0 + (2.0 * (k + 1) - 1.0) / grid_n) + "," + fmt(g(i, k)));

    // Top-two strict local maxima (cyclic, 8-neighbour so diagonal ridge
    // shoulders of the main lobe do not masquerade as a second peak),
    // polished by the fine search.
    struct Peak {
      double value;
      int i, k;
    };
    std::vector<Peak> peaks;
    for (int i = 0; i < grid_n; ++i) {
      const int im = (i + grid_n - 1) % grid_n, ip = (i + 1) % grid_n;
      for (int k = 0; k < grid_n; ++k) {
        const int km = (k + grid_n - 1) % grid_n, kp = (k + 1) % grid_n;
        const double c = g(i, k);
        if (c > g(im, k) && c > g(ip, k) && c > g(i, km) && c > g(i, kp) &&
            c > g(im, km) && c > g(im, kp) && c > g(ip, km) && c > g(ip, kp))
          peaks.push_back({c, i, k});
      }
    }
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
      if (a.value != b.value) return a.value > b.value;
      if (a.i != b.i) return a.i < b.i;
      return a.k < b.k;
    });

    double values[2] = {0.0, 0.0};
    double thetas[2] = {0.0, 0.0};
    double phis[2] = {0.0, 0.0};
    for (int p = 0; p < 2 && p < static_cast<int>(peaks.size()); ++p) {
      const CosAngle t0(-1.0 + (2.0 * (peaks[p].i + 1) - 1.0) / grid_n);
      const CosAngle p0(-1.0 + (2.0 * (peaks[p].k + 1) - 1.0) / grid_n);
      const FineSearchResult fine = fine_search(t0, p0, d, y, cfg.fine);
      values[p] = objective_g(fine.theta, fine.phi, d, y);
      thetas[p] = fine.theta.value();
      phis[p] = fine.phi.value();
    }
    peak_rows.push_back(std::to_string(n) + "," + fmt(values[0]) + "," + fmt(values[1]) + "," +
                        fmt(values[0] - values[1]) + "," + fmt(thetas[0]) + "," +
                        fmt(phis[0]) + "," + fmt(thetas[1]) + "," + fmt(phis[1]));
  }

  std::vector<std::string> written;
  written.push_back(
      write_csv(cfg, "contour_grid.csv", "training_length,theta,phi,g", grid_rows));
  written.push_back(write_csv(cfg, "contour_peaks.csv",
                              "training_length,peak1,peak2,gap,theta1,phi1,theta2,phi2",
                              peak_rows));
  return written;
}

}  // namespace irsbeam
