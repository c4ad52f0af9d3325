// SPDX-License-Identifier: Apache-2.0
//
// irsbeam: beam training and positioning simulator for IRS-assisted mmWave links

#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "irsbeam/channel.hpp"
#include "irsbeam/geometry.hpp"
#include "irsbeam/rng.hpp"

namespace irsbeam {

enum class BeamSide { Transmit, Receive, Reflect };

// Random beamforming codebook; beams are the columns. Transmit/receive beams
// carry the 1/sqrt(n) phase-shifter amplitude, reflect beams are unit-modulus
// (passive elements).
struct BeamCodebook {
  Eigen::MatrixXcd vectors;  // n x N
  BeamSide side = BeamSide::Transmit;

  int elements() const { return static_cast<int>(vectors.rows()); }
  int length() const { return static_cast<int>(vectors.cols()); }
};

BeamCodebook random_codebook(int elements, int length, BeamSide side, Pcg32& rng);

// Sensing matrix with rows t_n (kron) r_n^*, stored in factored form
// (tx column t_n, rx column r_n per slot). The factored form is what every
// hot path uses; materialise() produces the dense N x (n_tx * n_rx) matrix
// for oracle checks.
class SensingMatrix {
 public:
  SensingMatrix() = default;
  SensingMatrix(Eigen::MatrixXcd tx, Eigen::MatrixXcd rx);

  int slots() const { return static_cast<int>(tx_.cols()); }
  int tx_elements() const { return static_cast<int>(tx_.rows()); }
  int rx_elements() const { return static_cast<int>(rx_.rows()); }

  const Eigen::MatrixXcd& tx() const { return tx_; }
  const Eigen::MatrixXcd& rx() const { return rx_; }

  // Per-slot inner products against steering vectors:
  //   rx_products(a)[n]  = r_n^H a      (m^H a_rx terms)
  //   tx_products(a)[n]  = a^H t_n      (a_tx^H f terms)
  // so that (D b(theta, phi))[n] = rx_products(a_rx)[n] * tx_products(a_tx)[n].
  Eigen::VectorXcd rx_products(const Eigen::VectorXcd& a) const { return rx_.adjoint() * a; }
  Eigen::VectorXcd tx_products(const Eigen::VectorXcd& a) const {
    return (a.adjoint() * tx_).transpose();
  }

  // D * b for an arbitrary vectorised n_rx x n_tx matrix b.
  Eigen::VectorXcd apply(const Eigen::VectorXcd& b) const;

  // Appends one slot (used by the training-length monotonicity analysis).
  void append_slot(const Eigen::VectorXcd& tx, const Eigen::VectorXcd& rx);

  // Keeps the first `n` slots.
  SensingMatrix prefix(int n) const;

  Eigen::MatrixXcd materialise() const;

 private:
  Eigen::MatrixXcd tx_;  // n_tx x N
  Eigen::MatrixXcd rx_;  // n_rx x N
};

// b(theta, phi) = vec(a_rx(theta) * a_tx^H(phi)), column-major.
Eigen::VectorXcd kron_steering(CosAngle theta, CosAngle phi, int n_rx, int n_tx);

// One link's training burst: the unified model y = zeta * delta * D * b + n
// with delta carrying the physical path gain and `gain_scale` the
// sqrt(P_Tx) or sqrt(P_Tx * N_B) factor applied exactly once here.
struct SoundingSession {
  int anchor_index = 1;
  SensingMatrix sensing;
  Eigen::VectorXcd y;
  double gain_scale = 1.0;
  double noise_power = 0.0;
  bool gain_applied = false;  // audit: the power factor must be applied exactly once
};

// Step 1: all IRSs deactivated, random Tx/Rx beams, LoS + NLoS synthesis.
SoundingSession sound_step1(const ChannelRealization& realization, double tx_power,
                            const BeamCodebook& tx_codebook, const BeamCodebook& rx_codebook,
                            double noise_power, Pcg32& rng);

// How the direct-path residual enters an IRS sounding burst. Exact keeps the
// full leakage term through the BS beam's sidelobes; SpatiallyFiltered takes
// the beamforming null as ideal (a_B^H(phi) a_B(phi_BR) = 0 for the direct
// path), which is what the reference experiment results assume. NLoS leakage
// stays exact in both modes.
enum class Step2Leakage { Exact, SpatiallyFiltered };

// Step 2: IRS `irs_index` (1-based among IRSs) active with random reflect
// beams, the BS beam fixed on a_B(phi_BR)/sqrt(N_B); leakage enters through
// the spatial filtering factor a_B^H(phi) a_B(phi_BR)/sqrt(N_B) per `model`.
SoundingSession sound_step2(const ChannelRealization& realization, int irs_index,
                            double tx_power, int bs_elements,
                            const BeamCodebook& reflect_codebook,
                            const BeamCodebook& rx_codebook, double noise_power, Pcg32& rng,
                            Step2Leakage model = Step2Leakage::Exact);

// Direct synthesis of the unified measurement model; the estimator tests'
// generator.
Eigen::VectorXcd synth_unified(int zeta, std::complex<double> delta, CosAngle theta,
                               CosAngle phi, const SensingMatrix& sensing, double noise_power,
                               Pcg32& rng);

// Fixture dump/restore (CSV text: dimensions, factors, measurements).
void save_session(const SoundingSession& session, const std::string& path);
SoundingSession load_session(const std::string& path);

}  // namespace irsbeam
