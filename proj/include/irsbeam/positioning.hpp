// SPDX-License-Identifier: Apache-2.0
//
// irsbeam: beam training and positioning simulator for IRS-assisted mmWave links

#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "irsbeam/channel.hpp"
#include "irsbeam/estimator.hpp"
#include "irsbeam/geometry.hpp"

namespace irsbeam {

// Beam-training output of one anchor link, mapped into anchor coordinates:
// for IRS links `aod` is already un-rotated by the known theta_BR, so it is
// the AoD at the IRS toward the MT.
struct AnchorObservation {
  int anchor_index = 1;  // eta, 1-based; 1 = BS
  Vec3 anchor_position;
  Vec3 anchor_direction;
  CosAngle aod;
  CosAngle aoa;
  double residual_ratio = 1.0;
  std::complex<double> delta;  // physical-gain estimate
  bool valid = true;           // false when the link estimate failed
};

// Reliable-set and blockage thresholds. `cost_threshold` is xi_th in the
// acceptance rule xi_phi(p)/|N| <= xi_th (default sqrt(xi_th) = 0.005).
// `max_predicted_error` masks fixes whose linearised covariance says the
// anchor geometry cannot support the answer (GDOP gate).
struct SelectionPolicy {
  double cost_threshold = 2.5e-5;
  double pathloss_threshold_db = 6.0;
  double max_predicted_error = 0.5;  // metres
};

struct TaylorResult {
  Vec3 position;
  double cost = 0.0;  // xi_phi at the returned position
  int iterations = 0;
  bool converged = false;
  // sqrt(cost/|N| * trace((A A^T)^-1)): first-order position uncertainty from
  // the bearing residual level and the anchor geometry.
  double predicted_error = 0.0;
};

struct RefinedLink {
  int anchor_index = 1;
  CosAngle theta;
  CosAngle phi;
  std::complex<double> delta;  // physical gain at refined angles
  int zeta = 1;
};

struct PositionFix {
  Vec3 position;
  std::vector<int> reliable_set;  // anchor indices, sorted by residual ratio
  double cost = 0.0;
  bool low_confidence = false;
  bool converged = false;
  int iterations = 0;
  Vec3 mt_direction{1.0, 0.0, 0.0};
  std::vector<RefinedLink> refined;
};

// Cosine AoD seen from `anchor` toward position p.
CosAngle aod_of_position(const Vec3& p, const Vec3& anchor_position, const Vec3& anchor_direction);

// Gradient of aod_of_position with respect to p; orthogonal to (p - p_eta)
// since a cosine bearing is range-invariant.
Vec3 aod_jacobian(const Vec3& p, const Vec3& anchor_position, const Vec3& anchor_direction);

// Gauss-Newton iteration on the least-squares AoD cost, with half-step
// damping on cost increase and optional projection into the hall box. Throws
// on ill-conditioned anchor geometry.
TaylorResult taylor_position(const std::vector<CosAngle>& aods,
                             const std::vector<Vec3>& anchor_positions,
                             const std::vector<Vec3>& anchor_directions, const Vec3& initial,
                             double stop_eps = 1e-6, int max_iterations = 100,
                             const std::optional<std::pair<Vec3, Vec3>>& bounds = std::nullopt);

// Iterative reliable-set construction: anchors sorted by residual ratio,
// the largest prefix whose normalised cost passes the threshold wins.
struct ReliableSetResult {
  std::vector<int> anchors;  // anchor indices in the chosen prefix
  TaylorResult fix;
  bool low_confidence = false;
};
ReliableSetResult build_reliable_set(const std::vector<AnchorObservation>& observations,
                                     const SelectionPolicy& policy, const Vec3& initial,
                                     double stop_eps = 1e-6, int max_iterations = 100,
                                     const std::optional<std::pair<Vec3, Vec3>>& bounds = std::nullopt);

// Projected gradient descent for the MT array direction on the unit sphere.
Vec3 estimate_mt_direction(const Vec3& position, const std::vector<CosAngle>& aoas,
                           const std::vector<Vec3>& anchor_positions, double step = 0.05,
                           int max_iterations = 200);

// Position-refined angle pair for one anchor.
std::pair<CosAngle, CosAngle> refine_angles(const Vec3& position, const Vec3& mt_direction,
                                            const Vec3& anchor_position,
                                            const Vec3& anchor_direction);

// Gain re-estimate at the refined angles, session gain scale divided out.
std::complex<double> refined_delta(CosAngle theta, CosAngle phi, const SoundingSession& session);

// Pathloss magnitude predicted from the position estimate (Eq.-of-decision
// form, transmit power and BS beamforming gain included).
double pathloss_from_position(const Vec3& position, const Anchor& anchor, const Vec3& bs_position,
                              double wavelength, double reflection_loss, double tx_power,
                              int bs_elements);

// 1 iff the pathloss gap between the measured and position-predicted gains
// is within the threshold; a zero measured gain always decides blocked.
int decide_blockage(double measured_gain, double predicted_gain, double pathloss_threshold_db);

}  // namespace irsbeam
