// SPDX-License-Identifier: Apache-2.0
//
// irsbeam: beam training and positioning simulator for IRS-assisted mmWave links

#include "irsbeam/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "irsbeam/estimator.hpp"

namespace irsbeam {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::VectorXcd projected_steering(const SensingMatrix& d, CosAngle theta, CosAngle phi) {
  return d.rx_products(steering_vector(d.rx_elements(), theta))
      .cwiseProduct(d.tx_products(steering_vector(d.tx_elements(), phi)));
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace

double d_squared(const SensingMatrix& d, CosAngle theta, CosAngle phi, CosAngle theta_alt,
                 CosAngle phi_alt) {
  const Eigen::VectorXcd db = projected_steering(d, theta, phi);
  const Eigen::VectorXcd db_alt = projected_steering(d, theta_alt, phi_alt);
  const double alt_norm_sq = db_alt.squaredNorm();
  if (db.squaredNorm() <= 0.0 || alt_norm_sq <= 0.0)
    throw std::runtime_error("d_squared: zero-norm projected steering");
  // Residual of db after projecting out the alternative direction.
  const Eigen::VectorXcd residual = db - db_alt * (db_alt.dot(db) / alt_norm_sq);
  return residual.squaredNorm();
}

double pep_theoretical(const PepQuery& query, bool display_form) {
  if (query.sensing == nullptr) throw std::invalid_argument("pep_theoretical: missing sensing");
  const double d2 =
      d_squared(*query.sensing, query.theta, query.phi, query.theta_alt, query.phi_alt);
  const double mag_sq = std::norm(query.delta);
  if (d2 <= 0.0 || mag_sq <= 0.0) return 0.5;
  if (query.noise_power <= 0.0) return 0.0;
  if (display_form) return q_function(mag_sq * d2 / (2.0 * query.noise_power));
  const double threshold = mag_sq * d2;
  const double std_dev = std::sqrt(2.0 * query.noise_power * mag_sq * d2);
  return q_function(threshold / std_dev);
}

double pep_monte_carlo(const PepQuery& query, int trials, Pcg32& rng) {
  if (query.sensing == nullptr) throw std::invalid_argument("pep_monte_carlo: missing sensing");
  if (trials < 1000) throw std::invalid_argument("pep_monte_carlo: trials must be >= 1000");
  const SensingMatrix& d = *query.sensing;

  const Eigen::VectorXcd db = projected_steering(d, query.theta, query.phi);
  const Eigen::VectorXcd db_alt = projected_steering(d, query.theta_alt, query.phi_alt);
  const double den = db.squaredNorm();
  const double den_alt = db_alt.squaredNorm();
  if (den <= 0.0 || den_alt <= 0.0)
    throw std::runtime_error("pep_monte_carlo: zero-norm projected steering");

  int errors = 0;
  Eigen::VectorXcd y(d.slots());
  for (int t = 0; t < trials; ++t) {
    for (int n = 0; n < d.slots(); ++n)
      y(n) = query.delta * db(n) + rng.cnormal(query.noise_power);
    const double g_true = std::norm(db.dot(y)) / den;
    const double g_alt = std::norm(db_alt.dot(y)) / den_alt;
    if (g_alt > g_true) ++errors;
  }
  return static_cast<double>(errors) / trials;
}

std::pair<double, double> crb_numeric(const SensingMatrix& d, std::complex<double> delta,
                                      CosAngle theta, CosAngle phi, double noise_power) {
  if (noise_power <= 0.0) throw std::invalid_argument("crb_numeric: noise power must be > 0");
  const int n_rx = d.rx_elements();
  const int n_tx = d.tx_elements();

  Eigen::VectorXcd a_rx = steering_vector(n_rx, theta);
  Eigen::VectorXcd a_tx = steering_vector(n_tx, phi);
  Eigen::VectorXcd da_rx = a_rx, da_tx = a_tx;
  for (int k = 0; k < n_rx; ++k) da_rx(k) *= std::complex<double>(0.0, kPi * k);
  for (int k = 0; k < n_tx; ++k) da_tx(k) *= std::complex<double>(0.0, kPi * k);

  const Eigen::VectorXcd db = d.rx_products(a_rx).cwiseProduct(d.tx_products(a_tx));
  const Eigen::VectorXcd db_theta = d.rx_products(da_rx).cwiseProduct(d.tx_products(a_tx));
  const Eigen::VectorXcd db_phi = d.rx_products(a_rx).cwiseProduct(d.tx_products(da_tx));

  // Columns of the mean Jacobian for (Re delta, Im delta, theta, phi).
  std::vector<Eigen::VectorXcd> jac = {db, std::complex<double>(0.0, 1.0) * db,
                                       delta * db_theta, delta * db_phi};
  Eigen::Matrix4d fim;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) fim(i, j) = (2.0 / noise_power) * jac[i].dot(jac[j]).real();

  Eigen::FullPivLU<Eigen::Matrix4d> lu(fim);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) throw std::runtime_error("crb_numeric: unidentifiable configuration");
  const Eigen::Matrix4d inv = lu.inverse();
  return {inv(2, 2), inv(3, 3)};
}

DftCodebook make_dft_codebook(int n) {
  DftCodebook cb;
  cb.beams.side = BeamSide::Transmit;
  cb.beams.vectors.resize(n, n);
  cb.angles.resize(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int k = 0; k < n; ++k) {
    cb.angles[k] = -1.0 + (2.0 * (k + 1) - 1.0) / n;
    cb.beams.vectors.col(k) = steering_vector(n, CosAngle(cb.angles[k])) * scale;
  }
  return cb;
}

int quantize_to_codebook(CosAngle psi, const DftCodebook& codebook) {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < codebook.angles.size(); ++k) {
    const double dist = std::abs(cos_sub(psi, CosAngle(codebook.angles[k])).value());
    if (dist < best_dist) {
      best_dist = dist;
      best = static_cast<int>(k);
    }
  }
  return best;
}

std::pair<int, int> exhaustive_sweep(const Eigen::MatrixXcd& h, const DftCodebook& tx,
                                     const DftCodebook& rx, double noise_power, Pcg32& rng) {
  const Eigen::MatrixXcd gains = rx.beams.vectors.adjoint() * h * tx.beams.vectors;
  int best_tx = 0, best_rx = 0;
  double best_power = -1.0;
  for (int l = 0; l < gains.cols(); ++l) {
    for (int k = 0; k < gains.rows(); ++k) {
      const std::complex<double> y =
          gains(k, l) + (noise_power > 0.0 ? rng.cnormal(noise_power)
                                           : std::complex<double>(0.0));
      const double p = std::norm(y);
      if (p > best_power) {
        best_power = p;
        best_tx = l;
        best_rx = k;
      }
    }
  }
  return {best_tx, best_rx};
}

std::pair<int, int> best_true_pair(const Eigen::MatrixXcd& h, const DftCodebook& tx,
                                   const DftCodebook& rx) {
  const Eigen::MatrixXcd gains = rx.beams.vectors.adjoint() * h * tx.beams.vectors;
  int best_tx = 0, best_rx = 0;
  double best_power = -1.0;
  for (int l = 0; l < gains.cols(); ++l) {
    for (int k = 0; k < gains.rows(); ++k) {
      const double p = std::norm(gains(k, l));
      if (p > best_power) {
        best_power = p;
        best_tx = l;
        best_rx = k;
      }
    }
  }
  return {best_tx, best_rx};
}

Kmeans1dResult kmeans_1d(const std::vector<double>& values, int k, Pcg32& rng, int restarts) {
  const int n = static_cast<int>(values.size());
  if (k < 1 || n < 1) throw std::invalid_argument("kmeans_1d: empty input");

  Kmeans1dResult result;
  result.assignment.assign(n, 0);

  std::vector<double> distinct(values);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (static_cast<int>(distinct.size()) < k) {
    result.degenerate = true;
    result.centroids.assign(distinct.begin(), distinct.end());
    while (static_cast<int>(result.centroids.size()) < k)
      result.centroids.push_back(distinct.back());
    return result;
  }

  double best_objective = std::numeric_limits<double>::infinity();
  std::vector<double> centroids(k), best_centroids;
  std::vector<int> assignment(n), best_assignment;

  for (int restart = 0; restart < restarts; ++restart) {
    // Seed centroids with k distinct sample values.
    std::vector<double> seed;
    while (static_cast<int>(seed.size()) < k) {
      const double v = values[rng.next_u32() % n];
      if (std::find(seed.begin(), seed.end(), v) == seed.end()) seed.push_back(v);
    }
    centroids = seed;

    double objective = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      objective = 0.0;
      for (int i = 0; i < n; ++i) {
        int cls = 0;
        double dist = std::abs(values[i] - centroids[0]);
        for (int c = 1; c < k; ++c) {
          const double dc = std::abs(values[i] - centroids[c]);
          if (dc < dist) {
            dist = dc;
            cls = c;
          }
        }
        assignment[i] = cls;
        objective += dist * dist;
      }
      bool moved = false;
      for (int c = 0; c < k; ++c) {
        double sum = 0.0;
        int count = 0;
        for (int i = 0; i < n; ++i)
          if (assignment[i] == c) {
            sum += values[i];
            ++count;
          }
        if (count > 0) {
          const double mean = sum / count;
          if (mean != centroids[c]) moved = true;
          centroids[c] = mean;
        }
      }
      if (!moved) break;
    }
    if (objective < best_objective) {
      best_objective = objective;
      best_centroids = centroids;
      best_assignment = assignment;
    }
  }

  // Relabel so cluster ids follow ascending centroid order.
  std::vector<int> order(k);
  for (int c = 0; c < k; ++c) order[c] = c;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return best_centroids[a] < best_centroids[b]; });
  std::vector<int> rank(k);
  for (int c = 0; c < k; ++c) rank[order[c]] = c;

  result.centroids.resize(k);
  for (int c = 0; c < k; ++c) result.centroids[c] = best_centroids[order[c]];
  for (int i = 0; i < n; ++i) result.assignment[i] = rank[best_assignment[i]];
  return result;
}

}  // namespace irsbeam
