// SPDX-License-Identifier: Apache-2.0
//
// irsbeam: beam training and positioning simulator for IRS-assisted mmWave links

#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "irsbeam/sounding.hpp"

namespace irsbeam {

// Separation metric of two angle hypotheses under a sensing matrix:
// ||D b||^2 - |b~^H D^H D b|^2 / ||D b~||^2, computed as a projection
// residual so it is non-negative by construction.
double d_squared(const SensingMatrix& d, CosAngle theta, CosAngle phi, CosAngle theta_alt,
                 CosAngle phi_alt);

struct PepQuery {
  std::complex<double> delta;
  double noise_power = 1.0;
  const SensingMatrix* sensing = nullptr;
  CosAngle theta, phi;
  CosAngle theta_alt, phi_alt;
};

// Pairwise error probability that the alternative pair outranks the truth.
// The default follows the proof: Pe = Q(threshold / std) with threshold
// |delta|^2 d^2 and std sqrt(2 sigma^2 |delta|^2 d^2). `display_form`
// selects the displayed Q(|delta|^2 d^2 / (2 sigma^2)) variant instead,
// which disagrees dimensionally with the derivation and is kept only for
// comparison plots.
double pep_theoretical(const PepQuery& query, bool display_form = false);

// Empirical frequency of the misranking event g(alt; y) > g(truth; y) under
// y = delta D b + n.
double pep_monte_carlo(const PepQuery& query, int trials, Pcg32& rng);

// Cramer-Rao bounds on (theta, phi) for the single-path complex-Gaussian
// model, from the 4x4 Fisher information of (Re delta, Im delta, theta, phi).
std::pair<double, double> crb_numeric(const SensingMatrix& d, std::complex<double> delta,
                                      CosAngle theta, CosAngle phi, double noise_power);

// DFT codebook on the uniform cosine grid psi_k = -1 + (2k-1)/n, beams
// normalised to unit norm.
struct DftCodebook {
  BeamCodebook beams;
  std::vector<double> angles;
};
DftCodebook make_dft_codebook(int n);

// Nearest codeword under wrapped distance, ties to the lower index.
int quantize_to_codebook(CosAngle psi, const DftCodebook& codebook);

// One noisy power measurement per beam pair, argmax selection. The caller
// folds sqrt(P_Tx) into `h`.
std::pair<int, int> exhaustive_sweep(const Eigen::MatrixXcd& h, const DftCodebook& tx,
                                     const DftCodebook& rx, double noise_power, Pcg32& rng);

// Noiseless argmax pair, the oracle for the misalignment metric.
std::pair<int, int> best_true_pair(const Eigen::MatrixXcd& h, const DftCodebook& tx,
                                   const DftCodebook& rx);

struct Kmeans1dResult {
  std::vector<int> assignment;    // cluster ids ordered by centroid (0 = lowest mean)
  std::vector<double> centroids;  // ascending
  bool degenerate = false;        // all inputs identical
};

// Lloyd iterations on scalars with multi-start; deterministic under the rng.
Kmeans1dResult kmeans_1d(const std::vector<double>& values, int k, Pcg32& rng, int restarts = 8);

}  // namespace irsbeam
