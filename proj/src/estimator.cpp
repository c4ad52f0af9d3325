// SPDX-License-Identifier: Apache-2.0
//
// irsbeam: beam training and positioning simulator for IRS-assisted mmWave links

#include "irsbeam/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace irsbeam {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Element-wise derivative factor of a steering vector: a(psi) (.) [0, j*pi, ...].
Eigen::VectorXcd steering_derivative(int n, CosAngle psi) {
  Eigen::VectorXcd a = steering_vector(n, psi);
  for (int k = 0; k < n; ++k) a(k) *= std::complex<double>(0.0, kPi * k);
  return a;
}

struct SlotProducts {
  Eigen::VectorXcd db;  // (D b)[n]
  double den = 0.0;     // ||D b||^2
};

SlotProducts slot_products(CosAngle theta, CosAngle phi, const SensingMatrix& d) {
  SlotProducts p;
  const Eigen::VectorXcd u = d.rx_products(steering_vector(d.rx_elements(), theta));
  const Eigen::VectorXcd v = d.tx_products(steering_vector(d.tx_elements(), phi));
  p.db = u.cwiseProduct(v);
  p.den = p.db.squaredNorm();
  return p;
}

}  // namespace

GridSpec GridSpec::for_arrays(int n_tx, int n_rx, int n_peaks) {
  GridSpec g;
  g.z_theta = 4 * std::max(n_tx, n_rx);
  g.z_phi = g.z_theta;
  g.n_peaks = n_peaks;
  return g;
}

double objective_g(CosAngle theta, CosAngle phi, const SensingMatrix& d,
                   const Eigen::VectorXcd& y) {
  const SlotProducts p = slot_products(theta, phi, d);
  if (p.den <= 0.0) throw std::runtime_error("objective_g: zero-norm projected steering");
  return std::norm(p.db.dot(y)) / p.den;
}

std::pair<double, double> gradient_g(CosAngle theta, CosAngle phi, const SensingMatrix& d,
                                     const Eigen::VectorXcd& y) {
  const int n_rx = d.rx_elements();
  const int n_tx = d.tx_elements();
  const Eigen::VectorXcd u = d.rx_products(steering_vector(n_rx, theta));
  const Eigen::VectorXcd v = d.tx_products(steering_vector(n_tx, phi));
  const Eigen::VectorXcd du = d.rx_products(steering_derivative(n_rx, theta));
  const Eigen::VectorXcd dv = d.tx_products(steering_derivative(n_tx, phi));

  const Eigen::VectorXcd db = u.cwiseProduct(v);
  const Eigen::VectorXcd db_theta = du.cwiseProduct(v);
  const Eigen::VectorXcd db_phi = u.cwiseProduct(dv);

  const double den = db.squaredNorm();
  if (den <= 0.0) throw std::runtime_error("gradient_g: zero-norm projected steering");
  const std::complex<double> c = db.dot(y);        // b^H D^H y
  const double num = std::norm(c);

  const auto component = [&](const Eigen::VectorXcd& db_d) {
    const std::complex<double> c_d = db_d.dot(y);  // b_d^H D^H y
    const std::complex<double> cross = db.dot(db_d);
    return 2.0 * (c * std::conj(c_d) / den - num / (den * den) * cross).real();
  };
  return {component(db_theta), component(db_phi)};
}

Eigen::MatrixXd objective_grid(const SensingMatrix& d, const Eigen::VectorXcd& y, int z_theta,
                               int z_phi) {
  const int n_rx = d.rx_elements();
  const int n_tx = d.tx_elements();
  Eigen::MatrixXcd a_rx(n_rx, z_theta), a_tx(n_tx, z_phi);
  for (int i = 0; i < z_theta; ++i)
    a_rx.col(i) = steering_vector(n_rx, CosAngle(-1.0 + (2.0 * (i + 1) - 1.0) / z_theta));
  for (int k = 0; k < z_phi; ++k)
    a_tx.col(k) = steering_vector(n_tx, CosAngle(-1.0 + (2.0 * (k + 1) - 1.0) / z_phi));

  // U(n, i) = r_n^H a_rx(theta_i), V(n, k) = a_tx(phi_k)^H t_n; then
  // g(i, k) = |sum_n conj(U V) y|^2 / sum_n |U V|^2, all grid points at once.
  const Eigen::MatrixXcd u = d.rx().adjoint() * a_rx;                // N x zt
  const Eigen::MatrixXcd v = (a_tx.adjoint() * d.tx()).transpose();  // N x zp
  const Eigen::MatrixXcd s =
      u.conjugate().transpose() * (y.asDiagonal() * v.conjugate());  // zt x zp
  const Eigen::MatrixXd q = u.cwiseAbs2().transpose() * v.cwiseAbs2();
  return s.cwiseAbs2().cwiseQuotient(q);
}

std::vector<std::pair<CosAngle, CosAngle>> coarse_search(const SensingMatrix& d,
                                                         const Eigen::VectorXcd& y,
                                                         const GridSpec& grid) {
  if (grid.z_theta < 4 || grid.z_phi < 4)
    throw std::invalid_argument("coarse_search: quantisation levels must be >= 4");
  const int zt = grid.z_theta;
  const int zp = grid.z_phi;

  Eigen::VectorXd theta_vals(zt), phi_vals(zp);
  for (int i = 0; i < zt; ++i) theta_vals(i) = -1.0 + (2.0 * (i + 1) - 1.0) / zt;
  for (int k = 0; k < zp; ++k) phi_vals(k) = -1.0 + (2.0 * (k + 1) - 1.0) / zp;
  const Eigen::MatrixXd g = objective_grid(d, y, zt, zp);

  struct Peak {
    double value;
    int i, k;
  };
  std::vector<Peak> peaks;
  for (int i = 0; i < zt; ++i) {
    const int im = (i + zt - 1) % zt, ip = (i + 1) % zt;
    for (int k = 0; k < zp; ++k) {
      const int km = (k + zp - 1) % zp, kp = (k + 1) % zp;
      const double c = g(i, k);
      if (c > g(im, k) && c > g(ip, k) && c > g(i, km) && c > g(i, kp))
        peaks.push_back({c, i, k});
    }
  }
  const auto order = [&](const Peak& a, const Peak& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.i != b.i) return a.i < b.i;
    return a.k < b.k;
  };
  std::sort(peaks.begin(), peaks.end(), order);
  if (peaks.empty()) {
    // Flat objective (e.g. y = 0): fall back to the global grid argmax.
    Peak best{g(0, 0), 0, 0};
    for (int i = 0; i < zt; ++i)
      for (int k = 0; k < zp; ++k)
        if (order({g(i, k), i, k}, best)) best = {g(i, k), i, k};
    peaks.push_back(best);
  }
  if (static_cast<int>(peaks.size()) > grid.n_peaks) peaks.resize(grid.n_peaks);

  std::vector<std::pair<CosAngle, CosAngle>> out;
  out.reserve(peaks.size());
  for (const Peak& p : peaks)
    out.emplace_back(CosAngle(theta_vals(p.i)), CosAngle(phi_vals(p.k)));
  return out;
}

FineSearchResult fine_search(CosAngle theta0, CosAngle phi0, const SensingMatrix& d,
                             const Eigen::VectorXcd& y, const FineSearchConfig& cfg) {
  FineSearchResult r;
  r.theta = theta0;
  r.phi = phi0;

  // The angles are invariant to scaling y, so the search runs on the
  // unit-norm measurement; that makes cfg.step meaningful across SNRs.
  const double y_norm = y.norm();
  if (y_norm <= 0.0) {
    r.converged = true;
    return r;
  }
  const Eigen::VectorXcd yn = y / y_norm;

  double g_cur = objective_g(r.theta, r.phi, d, yn);
  double step = cfg.step;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    r.iterations = it + 1;
    const auto [gt, gp] = gradient_g(r.theta, r.phi, d, yn);
    if (gt == 0.0 && gp == 0.0) {
      r.converged = true;
      break;
    }
    CosAngle theta_new = r.theta, phi_new = r.phi;
    double g_new = g_cur;
    bool improved = false;
    for (int half = 0; half < 60; ++half) {
      theta_new = cos_add(r.theta, CosAngle(step * gt));
      phi_new = cos_add(r.phi, CosAngle(step * gp));
      g_new = objective_g(theta_new, phi_new, d, yn);
      if (g_new >= g_cur) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) {
      // No ascent direction at floating-point resolution.
      r.converged = true;
      break;
    }
    const double dt = cos_sub(theta_new, r.theta).value();
    const double dp = cos_sub(phi_new, r.phi).value();
    r.theta = theta_new;
    r.phi = phi_new;
    g_cur = g_new;
    if (dt * dt + dp * dp <= cfg.stop_eps) {
      r.converged = true;
      break;
    }
    step = std::min(step * 1.5, cfg.step * 64.0);
  }
  return r;
}

std::complex<double> estimate_delta(CosAngle theta, CosAngle phi, const SensingMatrix& d,
                                    const Eigen::VectorXcd& y) {
  const SlotProducts p = slot_products(theta, phi, d);
  if (p.den <= 0.0) throw std::runtime_error("estimate_delta: zero-norm projected steering");
  return p.db.dot(y) / p.den;
}

double residual_ratio(const Eigen::VectorXcd& y, std::complex<double> delta, CosAngle theta,
                      CosAngle phi, const SensingMatrix& d) {
  const double energy = y.squaredNorm();
  if (energy <= 0.0) throw std::invalid_argument("residual_ratio: zero measurement");
  const SlotProducts p = slot_products(theta, phi, d);
  const double ratio = (y - delta * p.db).squaredNorm() / energy;
  return std::clamp(ratio, 0.0, 1.0);
}

PathEstimate estimate_path(const SoundingSession& session, const GridSpec& grid,
                           const FineSearchConfig& cfg) {
  if (!session.gain_applied || session.gain_scale <= 0.0)
    throw std::invalid_argument("estimate_path: session has no power scaling applied");

  const auto candidates = coarse_search(session.sensing, session.y, grid);

  PathEstimate best;
  best.coarse_candidates = static_cast<int>(candidates.size());
  double best_g = -1.0;
  for (const auto& [theta0, phi0] : candidates) {
    const FineSearchResult fr = fine_search(theta0, phi0, session.sensing, session.y, cfg);
    const double g = objective_g(fr.theta, fr.phi, session.sensing, session.y);
    const bool better =
        g > best_g ||
        (g == best_g && (fr.theta.value() < best.theta.value() ||
                         (fr.theta.value() == best.theta.value() &&
                          fr.phi.value() < best.phi.value())));
    if (better) {
      best_g = g;
      best.theta = fr.theta;
      best.phi = fr.phi;
      best.fine_iterations = fr.iterations;
      best.converged = fr.converged;
    }
  }

  best.objective = best_g;
  const std::complex<double> delta_scaled =
      estimate_delta(best.theta, best.phi, session.sensing, session.y);
  best.residual_ratio = residual_ratio(session.y, delta_scaled, best.theta, best.phi,
                                       session.sensing);
  best.delta = delta_scaled / session.gain_scale;
  return best;
}

}  // namespace irsbeam
