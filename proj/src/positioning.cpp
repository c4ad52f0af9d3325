// SPDX-License-Identifier: Apache-2.0
//
// irsbeam: beam training and positioning simulator for IRS-assisted mmWave links

#include "irsbeam/positioning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace irsbeam {

CosAngle aod_of_position(const Vec3& p, const Vec3& anchor_position,
                         const Vec3& anchor_direction) {
  return cosine_of_direction(p, anchor_position, anchor_direction);
}

Vec3 aod_jacobian(const Vec3& p, const Vec3& anchor_position, const Vec3& anchor_direction) {
  const Vec3 d = p - anchor_position;
  const double r = norm(d);
  if (r < 1e-15) throw std::invalid_argument("aod_jacobian: degenerate geometry");
  const double proj = dot(d, anchor_direction);
  return (anchor_direction * r - d * (proj / r)) / (r * r);
}

namespace {

Vec3 clamp_to_box(const Vec3& p, const Vec3& lo, const Vec3& hi) {
  return {std::clamp(p.x, lo.x, hi.x), std::clamp(p.y, lo.y, hi.y),
          std::clamp(p.z, lo.z, hi.z)};
}

double aod_cost(const std::vector<CosAngle>& aods, const std::vector<Vec3>& positions,
                const std::vector<Vec3>& directions, const Vec3& p) {
  double cost = 0.0;
  for (std::size_t i = 0; i < aods.size(); ++i) {
    const double r = aods[i].value() - aod_of_position(p, positions[i], directions[i]).value();
    cost += r * r;
  }
  return cost;
}

}  // namespace

TaylorResult taylor_position(const std::vector<CosAngle>& aods,
                             const std::vector<Vec3>& anchor_positions,
                             const std::vector<Vec3>& anchor_directions, const Vec3& initial,
                             double stop_eps, int max_iterations,
                             const std::optional<std::pair<Vec3, Vec3>>& bounds) {
  const std::size_t n = aods.size();
  if (n < 3 || anchor_positions.size() != n || anchor_directions.size() != n)
    throw std::invalid_argument("taylor_position: need >= 3 consistent anchors");

  TaylorResult result;
  result.position = initial;
  double cost = aod_cost(aods, anchor_positions, anchor_directions, result.position);

  // Natural problem scale; a Gauss-Newton step longer than this is an
  // artefact of a badly conditioned iterate, not a useful update.
  double trust = 0.0;
  for (const Vec3& p : anchor_positions) trust = std::max(trust, norm(initial - p));
  trust = std::max(2.0 * trust, 1.0);

  const auto normal_matrices = [&](const Vec3& p, Eigen::Matrix3d& ata, Eigen::Vector3d& atb) {
    ata.setZero();
    atb.setZero();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 j = aod_jacobian(p, anchor_positions[i], anchor_directions[i]);
      const Eigen::Vector3d jc(j.x, j.y, j.z);
      const double resid =
          aods[i].value() - aod_of_position(p, anchor_positions[i], anchor_directions[i]).value();
      ata += jc * jc.transpose();
      atb += jc * resid;
    }
  };

  for (int it = 0; it < max_iterations; ++it) {
    result.iterations = it + 1;

    Eigen::Matrix3d ata;
    Eigen::Vector3d atb;
    normal_matrices(result.position, ata, atb);

    // Truncated pseudo-inverse step: near-null directions of A A^T carry no
    // usable information at this iterate (the symmetric anchor layout makes
    // the hall centre exactly degenerate) and are dropped instead of letting
    // them blow the step up.
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(ata);
    const double lambda_max = eig.eigenvalues().maxCoeff();
    if (!(lambda_max > 0.0))
      throw std::runtime_error("taylor_position: ill-conditioned geometry");
    Eigen::Vector3d step = Eigen::Vector3d::Zero();
    for (int c = 0; c < 3; ++c) {
      if (eig.eigenvalues()(c) >= 1e-12 * lambda_max) {
        const Eigen::Vector3d v = eig.eigenvectors().col(c);
        step += v * (v.dot(atb) / eig.eigenvalues()(c));
      }
    }
    if (step.norm() > trust) step *= trust / step.norm();

    // Half-step damping: plain Gauss-Newton can overshoot from a rough guess.
    Vec3 candidate = result.position;
    double new_cost = cost;
    double scale = 1.0;
    for (int half = 0; half < 40; ++half) {
      candidate = result.position + Vec3{step(0), step(1), step(2)} * scale;
      if (bounds) candidate = clamp_to_box(candidate, bounds->first, bounds->second);
      new_cost = aod_cost(aods, anchor_positions, anchor_directions, candidate);
      if (new_cost <= cost) break;
      scale *= 0.5;
    }
    const double moved = norm(candidate - result.position);
    if (new_cost <= cost) {
      result.position = candidate;
      cost = new_cost;
    }
    if (moved < stop_eps) {
      result.converged = true;
      break;
    }
  }
  result.cost = cost;

  // The degeneracy verdict belongs to the solution, not to waypoints: truly
  // degenerate constellations (collinear anchors, coaxial cones) stay rank
  // deficient where the iteration ends.
  Eigen::Matrix3d ata;
  Eigen::Vector3d atb;
  normal_matrices(result.position, ata, atb);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(ata);
  if (!(eig.eigenvalues().maxCoeff() > 0.0) ||
      eig.eigenvalues().minCoeff() < 1e-12 * eig.eigenvalues().maxCoeff())
    throw std::runtime_error("taylor_position: ill-conditioned geometry");
  result.predicted_error = std::sqrt(result.cost / static_cast<double>(n) *
                                     eig.eigenvalues().cwiseInverse().sum());
  return result;
}

ReliableSetResult build_reliable_set(const std::vector<AnchorObservation>& observations,
                                     const SelectionPolicy& policy, const Vec3& initial,
                                     double stop_eps, int max_iterations,
                                     const std::optional<std::pair<Vec3, Vec3>>& bounds) {
  std::vector<const AnchorObservation*> usable;
  for (const AnchorObservation& o : observations)
    if (o.valid) usable.push_back(&o);
  if (usable.size() < 3)
    throw std::runtime_error("build_reliable_set: insufficient anchors");

  std::sort(usable.begin(), usable.end(), [](const auto* a, const auto* b) {
    if (a->residual_ratio != b->residual_ratio) return a->residual_ratio < b->residual_ratio;
    return a->anchor_index < b->anchor_index;
  });

  // The cone least-squares cost is multimodal and the hall centre is an
  // exactly degenerate start under the symmetric anchor layout, so each
  // prefix is solved from a small deterministic start set (plus the previous
  // prefix's solution) and the lowest-cost converged result wins.
  std::vector<Vec3> starts = {initial};
  if (bounds) {
    const Vec3 c = (bounds->first + bounds->second) / 2.0;
    const Vec3 q = (bounds->second - bounds->first) / 4.0;
    for (const double sx : {-1.0, 1.0})
      for (const double sy : {-1.0, 1.0})
        starts.push_back({c.x + sx * q.x, c.y + sy * q.y, initial.z});
  }

  std::vector<CosAngle> aods;
  std::vector<Vec3> positions, directions;
  std::optional<ReliableSetResult> chosen;
  std::optional<ReliableSetResult> fallback;  // smallest k that ran at all
  bool chosen_beyond_minimum = false;

  for (std::size_t k = 0; k < usable.size(); ++k) {
    aods.push_back(usable[k]->aod);
    positions.push_back(usable[k]->anchor_position);
    directions.push_back(usable[k]->anchor_direction);
    if (k + 1 < 3) continue;

    // One extra start from a coarse scan of the cost surface; the cone
    // least-squares problem is multimodal and gradient steps alone can
    // settle in the wrong intersection.
    std::optional<Vec3> scan_start;
    if (bounds) {
      double best_scan = std::numeric_limits<double>::infinity();
      constexpr int kScan = 9;
      for (int ix = 0; ix < kScan; ++ix) {
        for (int iy = 0; iy < kScan; ++iy) {
          const Vec3 p{bounds->first.x + (bounds->second.x - bounds->first.x) *
                                             (ix + 0.5) / kScan,
                       bounds->first.y + (bounds->second.y - bounds->first.y) *
                                             (iy + 0.5) / kScan,
                       initial.z};
          const double c = aod_cost(aods, positions, directions, p);
          if (c < best_scan) {
            best_scan = c;
            scan_start = p;
          }
        }
      }
    }

    std::optional<TaylorResult> fix;
    const auto try_start = [&](const Vec3& start) {
      try {
        const TaylorResult run = taylor_position(aods, positions, directions, start, stop_eps,
                                                 max_iterations, bounds);
        if (!fix || run.cost < fix->cost) fix = run;
      } catch (const std::runtime_error&) {
      }
    };
    for (const Vec3& start : starts) try_start(start);
    if (scan_start) try_start(*scan_start);
    if (!fix) continue;  // degenerate subset; larger prefixes may still work
    // warm start for the next prefix, replacing the previous warm slot
    if (starts.size() > (bounds ? 5u : 1u)) starts.back() = fix->position;
    else starts.push_back(fix->position);

    ReliableSetResult candidate;
    candidate.fix = *fix;
    for (std::size_t i = 0; i <= k; ++i) candidate.anchors.push_back(usable[i]->anchor_index);
    if (!fallback) fallback = candidate;
    if (fix->cost / static_cast<double>(k + 1) <= policy.cost_threshold) {
      chosen = candidate;
      chosen_beyond_minimum = k + 1 >= 5;
    }
  }

  if (chosen) {
    // Three cones generically intersect exactly, so a k = 3 pass carries no
    // evidence; a confident fix needs consistency beyond the minimum AND an
    // anchor geometry whose linearised covariance supports the answer.
    chosen->low_confidence = !chosen_beyond_minimum ||
                             chosen->fix.predicted_error > policy.max_predicted_error;
    return *chosen;
  }
  if (!fallback) throw std::runtime_error("build_reliable_set: no solvable anchor subset");
  fallback->low_confidence = true;
  return *fallback;
}

Vec3 estimate_mt_direction(const Vec3& position, const std::vector<CosAngle>& aoas,
                           const std::vector<Vec3>& anchor_positions, double step,
                           int max_iterations) {
  const std::size_t n = aoas.size();
  if (n < 3 || anchor_positions.size() != n)
    throw std::invalid_argument("estimate_mt_direction: need >= 3 consistent anchors");

  std::vector<Vec3> bearings(n);
  for (std::size_t i = 0; i < n; ++i) bearings[i] = normalized(position - anchor_positions[i]);

  const auto cost = [&](const Vec3& e) {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = CosAngle::wrap(dot(bearings[i], e) - aoas[i].value());
      c += r * r;
    }
    return c;
  };
  // Gradient of the wrapped least-squares cost, with the wrap treated as
  // identity near the solution: P (P^T e (-) aoa).
  const auto gradient = [&](const Vec3& e) {
    Vec3 g{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i)
      g += bearings[i] * CosAngle::wrap(dot(bearings[i], e) - aoas[i].value());
    return g;
  };

  // Start on the agreement cone of the most reliable bearing (the first
  // entry): scan a ring of unit vectors satisfying bearing . e = aoa exactly
  // and keep the best-scoring one.
  const Vec3 u = bearings.front();
  Vec3 w1 = cross(u, Vec3{0.0, 0.0, 1.0});
  if (norm(w1) < 1e-9) w1 = cross(u, Vec3{1.0, 0.0, 0.0});
  w1 = normalized(w1);
  const Vec3 w2 = cross(u, w1);
  const double c0 = aoas.front().value();
  const double s0 = std::sqrt(std::max(0.0, 1.0 - c0 * c0));
  Vec3 e = u;
  double best = std::numeric_limits<double>::infinity();
  constexpr int kRing = 16;
  for (int i = 0; i < kRing; ++i) {
    const double w = 2.0 * 3.14159265358979323846 * i / kRing;
    const Vec3 cand = u * c0 + (w1 * std::cos(w) + w2 * std::sin(w)) * s0;
    const double c = cost(cand);
    if (c < best) {
      best = c;
      e = cand;
    }
  }

  double cur = cost(e);
  double lambda = step;
  for (int it = 0; it < max_iterations; ++it) {
    const Vec3 g = gradient(e);
    if (norm(g) < 1e-15) break;
    Vec3 next = e;
    double next_cost = cur;
    bool improved = false;
    for (int half = 0; half < 40; ++half) {
      const Vec3 d = e - g * lambda;
      const double dn = norm(d);
      if (dn < 1e-12) {
        lambda *= 0.5;
        continue;
      }
      next = d / dn;
      next_cost = cost(next);
      if (next_cost <= cur) {
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) break;
    const double moved = norm(next - e);
    e = next;
    cur = next_cost;
    if (moved < 1e-12) break;
    lambda = std::min(lambda * 1.5, step * 64.0);
  }
  return e;
}

std::pair<CosAngle, CosAngle> refine_angles(const Vec3& position, const Vec3& mt_direction,
                                            const Vec3& anchor_position,
                                            const Vec3& anchor_direction) {
  return {cosine_of_direction(position, anchor_position, mt_direction),
          cosine_of_direction(position, anchor_position, anchor_direction)};
}

std::complex<double> refined_delta(CosAngle theta, CosAngle phi, const SoundingSession& session) {
  return estimate_delta(theta, phi, session.sensing, session.y) / session.gain_scale;
}

double pathloss_from_position(const Vec3& position, const Anchor& anchor, const Vec3& bs_position,
                              double wavelength, double reflection_loss, double tx_power,
                              int bs_elements) {
  if (anchor.kind == AnchorKind::Bs) {
    const double d = norm(position - anchor.position);
    if (d <= 0.0) throw std::invalid_argument("pathloss_from_position: degenerate geometry");
    return std::sqrt(tx_power) * std::abs(los_gain(d, wavelength));
  }
  const double d_br = norm(anchor.position - bs_position);
  const double d_rm = norm(position - anchor.position);
  if (d_br <= 0.0 || d_rm <= 0.0)
    throw std::invalid_argument("pathloss_from_position: degenerate geometry");
  return std::sqrt(tx_power * bs_elements) *
         std::abs(vlos_gain(d_br, d_rm, reflection_loss, wavelength));
}

int decide_blockage(double measured_gain, double predicted_gain, double pathloss_threshold_db) {
  if (predicted_gain <= 0.0)
    throw std::invalid_argument("decide_blockage: predicted gain must be positive");
  if (measured_gain <= 0.0) return 0;
  const double gap_db = std::abs(20.0 * std::log10(measured_gain / predicted_gain));
  return gap_db <= pathloss_threshold_db ? 1 : 0;
}

}  // namespace irsbeam
