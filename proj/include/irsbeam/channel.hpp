// SPDX-License-Identifier: Apache-2.0
//
// irsbeam: beam training and positioning simulator for IRS-assisted mmWave links

#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "irsbeam/geometry.hpp"
#include "irsbeam/rng.hpp"

namespace irsbeam {

enum class AnchorKind { Bs, Irs };

// BS/AP or IRS with known position and ULA direction. Anchor 1 is the BS.
struct Anchor {
  AnchorKind kind = AnchorKind::Bs;
  Vec3 position;
  ArrayGeometry array;
  int index = 1;  // eta, 1-based
};

// Knobs for drawing one Monte-Carlo world. `users` counts MT holders
// including the one carrying the MT under test, so `users - 1` cuboids act
// as obstacles.
struct ScenarioParams {
  std::vector<Anchor> anchors;  // anchors[0] must be the BS
  Vec3 hall_min{-10.0, -10.0, 0.0};
  Vec3 hall_max{10.0, 10.0, 5.0};
  int users = 100;
  Vec3 obstacle_size{0.6, 0.4, 1.7};
  double mt_z_min = 1.2;
  double mt_z_max = 1.4;
  int mt_array_size = 16;
  double wavelength = 0.010707;
  double reflection_loss = 0.05011872336272722;  // 13 dB
  double tx_power = 1e-3;                        // watts
  double noise_power = 3.9810717055349695e-12;   // -84 dBm
  int nlos_count = 4;
  double nlos_gap_db = 20.0;
  int rejection_budget = 10000;
};

// One sampled world: anchors, user obstacles, the MT and its array.
struct Scenario {
  std::vector<Anchor> anchors;
  std::vector<Box> obstacles;  // the MT's own holder cuboid is excluded
  Vec3 mt_position;
  ArrayGeometry mt_array;
  double wavelength = 0.010707;
  double reflection_loss = 1.0;
  double tx_power = 1.0;
  double noise_power = 0.0;
  int nlos_count = 0;
  double nlos_gap_db = 20.0;
  Vec3 hall_min{-10.0, -10.0, 0.0};
  Vec3 hall_max{10.0, 10.0, 5.0};
};

// Per-link blockage indicators; zeta[0] is the BS-MT segment, zeta[i] (i>=1)
// the joint visibility of BS-IRS_i and IRS_i-MT.
struct LinkState {
  std::vector<int> zeta;
};

struct NlosPath {
  std::complex<double> delta;
  CosAngle theta;  // AoA at the MT
  CosAngle phi;    // AoD at the BS
};

// Raw geometry of one IRS bounce; kept alongside the equivalent angle since
// the BS-IRS leg is known a priori.
struct VlosGeometry {
  CosAngle theta_br;  // AoA at the IRS from the BS
  CosAngle phi_br;    // AoD at the BS toward the IRS
  CosAngle theta_rm;  // AoA at the MT from the IRS
  CosAngle phi_rm;    // AoD at the IRS toward the MT
  double d_br = 0.0;
  double d_rm = 0.0;
};

// Path parameters of one LoS/VLoS link. Gains are transmit-power-free; the
// sqrt(P_Tx) / sqrt(P_Tx N_B) factors are applied exactly once, in the
// sounding layer.
struct LinkRecord {
  int anchor_index = 1;
  int zeta = 1;
  std::complex<double> delta;  // LoS: delta_1; VLoS: delta_bar of the bounce
  CosAngle theta;              // AoA at the MT
  CosAngle phi;                // LoS: AoD at BS; VLoS: equivalent AoD phi_rm (-) theta_br
  double distance = 0.0;       // LoS: d_BM; VLoS: d_BR + d_RM
  std::optional<VlosGeometry> vlos;
};

struct ChannelRealization {
  std::vector<LinkRecord> links;  // links[0] is the BS link
  std::vector<NlosPath> nlos;
};

// Draws MT position/orientation and the non-overlapping user cuboids.
// Throws std::runtime_error when the rejection budget is exhausted.
Scenario sample_scenario(const ScenarioParams& params, Pcg32& rng);

// Evaluates the segment-vs-obstacle tests for every link.
LinkState compute_blockage(const Scenario& scenario);

// Free-space LoS gain lambda * exp(-j*2*pi*d/lambda) / (4*pi*d), power-free.
std::complex<double> los_gain(double distance, double wavelength);

// IRS bounce gain sqrt(xi) * lambda * exp(-j*2*pi*(d1+d2)/lambda) / (4*pi*(d1+d2)).
std::complex<double> vlos_gain(double d_br, double d_rm, double reflection_loss,
                               double wavelength);

// Equivalent gain of an IRS path under reflection vector g:
// delta_bar * a_R^H(phi_rm (-) theta_br) * g.
std::complex<double> effective_irs_gain(const Eigen::VectorXcd& g, CosAngle phi_rm,
                                        CosAngle theta_br, std::complex<double> delta_bar);

// NLoS path draws: CN(0, |delta1|^2 * 10^(-gap/10)) gains, angles as cosines
// of physical angles drawn U(0, 2*pi).
std::vector<NlosPath> sample_nlos(int count, double abs_delta1, double gap_db, Pcg32& rng);

// Full path-parameter synthesis for one world: blockage, LoS/VLoS gains and
// angles (including the known BS-IRS priors), and the NLoS list.
ChannelRealization realize_channel(const Scenario& scenario, Pcg32& rng);

// Dense N_M x N_B channel matrix; the brute-force oracle behind the
// parametric sounding synthesis. `reflection[i]` and `activation[i]` refer to
// the i-th IRS (anchor index i+2).
Eigen::MatrixXcd assemble_channel(const Scenario& scenario, const ChannelRealization& realization,
                                  const std::vector<Eigen::VectorXcd>& reflection,
                                  const std::vector<int>& activation);

}  // namespace irsbeam
