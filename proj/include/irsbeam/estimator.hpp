// SPDX-License-Identifier: Apache-2.0
//
// irsbeam: beam training and positioning simulator for IRS-assisted mmWave links

#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "irsbeam/sounding.hpp"

namespace irsbeam {

// Coarse-search grid; theta_i = -1 + (2i-1)/Z, treated cyclically in both
// axes because cosine-angle arithmetic is modular.
struct GridSpec {
  int z_theta = 64;
  int z_phi = 64;
  int n_peaks = 5;

  // One grid cell well inside a steering main lobe for the given arrays.
  static GridSpec for_arrays(int n_tx, int n_rx, int n_peaks = 5);
};

struct FineSearchConfig {
  double step = 1e-2;        // on the unit-norm measurement
  double stop_eps = 1e-12;   // on the squared wrapped step length
  int max_iterations = 50;
};

struct FineSearchResult {
  CosAngle theta;
  CosAngle phi;
  int iterations = 0;
  bool converged = false;
};

// Joint ML estimate of one path from a sounding session.
struct PathEstimate {
  std::complex<double> delta;  // physical path gain, session gain_scale divided out
  CosAngle theta;
  CosAngle phi;
  double residual_ratio = 1.0;  // in [0, 1]
  double objective = 0.0;       // g(theta, phi) at the estimate
  int coarse_candidates = 0;
  int fine_iterations = 0;
  bool converged = true;
};

// g(theta, phi) = |b^H D^H y|^2 / ||D b||^2, the P1 objective.
double objective_g(CosAngle theta, CosAngle phi, const SensingMatrix& d,
                   const Eigen::VectorXcd& y);

// Analytic (d g / d theta, d g / d phi).
std::pair<double, double> gradient_g(CosAngle theta, CosAngle phi, const SensingMatrix& d,
                                     const Eigen::VectorXcd& y);

// g evaluated on the whole quantisation grid at once (separable form);
// row i, column k correspond to theta_i = -1 + (2i+1)/Z_theta and
// phi_k = -1 + (2k+1)/Z_phi.
Eigen::MatrixXd objective_grid(const SensingMatrix& d, const Eigen::VectorXcd& y, int z_theta,
                               int z_phi);

// Strict 4-neighbour local maxima of g over the cyclic grid, best first,
// at most n_peaks; falls back to the global grid argmax when the objective
// has no strict maximum (e.g. y = 0).
std::vector<std::pair<CosAngle, CosAngle>> coarse_search(const SensingMatrix& d,
                                                         const Eigen::VectorXcd& y,
                                                         const GridSpec& grid);

// Wrap-around gradient ascent from `start`, with backtracking halving of the
// step whenever it would decrease g; the returned point never scores below
// the start.
FineSearchResult fine_search(CosAngle theta0, CosAngle phi0, const SensingMatrix& d,
                             const Eigen::VectorXcd& y, const FineSearchConfig& cfg);

// Closed-form conditional gain b^H D^H y / ||D b||^2.
std::complex<double> estimate_delta(CosAngle theta, CosAngle phi, const SensingMatrix& d,
                                    const Eigen::VectorXcd& y);

// ||y - delta D b||^2 / ||y||^2, the reliability score of the estimate.
double residual_ratio(const Eigen::VectorXcd& y, std::complex<double> delta, CosAngle theta,
                      CosAngle phi, const SensingMatrix& d);

// Full per-link pipeline: coarse search, fine search per candidate, best-g
// selection, gain and residual ratio.
PathEstimate estimate_path(const SoundingSession& session, const GridSpec& grid,
                           const FineSearchConfig& cfg);

}  // namespace irsbeam
