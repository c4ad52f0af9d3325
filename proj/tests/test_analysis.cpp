// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "irsbeam/analysis.hpp"
#include "irsbeam/estimator.hpp"

using namespace irsbeam;

namespace {

SensingMatrix random_sensing(int n_tx, int n_rx, int slots, Pcg32& rng) {
  const BeamCodebook tx = random_codebook(n_tx, slots, BeamSide::Transmit, rng);
  const BeamCodebook rx = random_codebook(n_rx, slots, BeamSide::Receive, rng);
  return SensingMatrix(tx.vectors, rx.vectors);
}

PepQuery make_query(const SensingMatrix& d, std::complex<double> delta, double sigma2,
                    double theta, double phi, double theta_alt, double phi_alt) {
  PepQuery q;
  q.sensing = &d;
  q.delta = delta;
  q.noise_power = sigma2;
  q.theta = CosAngle(theta);
  q.phi = CosAngle(phi);
  q.theta_alt = CosAngle(theta_alt);
  q.phi_alt = CosAngle(phi_alt);
  return q;
}

}  // namespace

TEST_SUITE_BEGIN("analysis");

TEST_CASE("separation metric d^2") {
  Pcg32 rng(71, 0);
  for (int i = 0; i < 200; ++i) {
    const SensingMatrix d = random_sensing(8, 8, 6 + (i % 8), rng);
    const CosAngle theta(rng.uniform(-1, 1)), phi(rng.uniform(-1, 1));
    const CosAngle ta(rng.uniform(-1, 1)), pa(rng.uniform(-1, 1));
    CHECK(d_squared(d, theta, phi, theta, phi) < 1e-20);
    const double val = d_squared(d, theta, phi, ta, pa);
    CHECK(val >= -1e-12);

    // independent dense route
    const Eigen::MatrixXcd dm = d.materialise();
    const Eigen::VectorXcd db = dm * kron_steering(theta, phi, 8, 8);
    const Eigen::VectorXcd da = dm * kron_steering(ta, pa, 8, 8);
    const double direct = db.squaredNorm() - std::norm(da.dot(db)) / da.squaredNorm();
    CHECK(val == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("pep forms and limits") {
  Pcg32 rng(72, 0);
  const SensingMatrix d = random_sensing(16, 16, 16, rng);
  // identical pair: no separation, coin flip
  CHECK(pep_theoretical(make_query(d, 1.0, 1.0, 0.2, 0.3, 0.2, 0.3)) ==
        doctest::Approx(0.5));
  // vanishing noise: vanishing error probability
  CHECK(pep_theoretical(make_query(d, 1e-3, 0.0, 0.2, 0.3, 0.4, -0.1)) == 0.0);

  // monotone decreasing in |delta| and in the separation
  double previous = 1.0;
  for (double mag = 1e-3; mag < 1e-1; mag *= 2.0) {
    const double pe = pep_theoretical(make_query(d, mag, 1e-4, 0.2, 0.3, 0.4, -0.1));
    CHECK(pe <= previous + 1e-15);
    previous = pe;
  }

  Pcg32 mc(73, 0);
  CHECK(pep_monte_carlo(make_query(d, 1e-2, 0.0, 0.2, 0.3, 0.4, -0.1), 1000, mc) == 0.0);
  CHECK(pep_monte_carlo(make_query(d, 0.0, 1.0, 0.2, 0.3, 0.4, -0.1), 20000, mc) ==
        doctest::Approx(0.5).epsilon(0.05));

  // proof-derived form tracks the empirical probability; one operating point
  // here, the sweep lives in the acceptance suite
  const double theta = 0.2, phi = 0.3;
  const double theta_alt = theta + 0.04, phi_alt = phi - 0.04;
  PepQuery q = make_query(d, 1.0, 0.0, theta, phi, theta_alt, phi_alt);
  const double dd = d_squared(d, q.theta, q.phi, q.theta_alt, q.phi_alt);
  // choose sigma^2 for Pe = 0.2: |delta| d / sqrt(2 sigma^2) = Q^-1(0.2)
  const double target_arg = 0.8416212335729143;  // Q^-1(0.2)
  q.noise_power = std::norm(q.delta) * dd / (2.0 * target_arg * target_arg);
  const double theo = pep_theoretical(q);
  CHECK(theo == doctest::Approx(0.2).epsilon(1e-6));
  Pcg32 mc2(74, 0);
  CHECK(pep_monte_carlo(q, 30000, mc2) == doctest::Approx(theo).epsilon(0.15));

  // the displayed form differs dimensionally from the derived one
  CHECK(pep_theoretical(q, true) != doctest::Approx(theo).epsilon(1e-3));

  // appending rows never hurts (paired Monte Carlo)
  Pcg32 grow_rng(75, 0);
  const SensingMatrix small = random_sensing(8, 8, 4, grow_rng);
  SensingMatrix big = small;
  const SensingMatrix extra = random_sensing(8, 8, 8, grow_rng);
  for (int n = 0; n < 8; ++n) big.append_slot(extra.tx().col(n), extra.rx().col(n));
  PepQuery qs = make_query(small, 1.0, 0.0, 0.1, -0.2, 0.18, -0.12);
  const double dd_small = d_squared(small, qs.theta, qs.phi, qs.theta_alt, qs.phi_alt);
  qs.noise_power = dd_small / (2.0 * 0.5 * 0.5);
  PepQuery qb = qs;
  qb.sensing = &big;
  Pcg32 mc3(76, 0), mc4(76, 0);
  CHECK(pep_monte_carlo(qb, 20000, mc4) <= pep_monte_carlo(qs, 20000, mc3) + 0.02);
}

TEST_CASE("numeric crb") {
  Pcg32 rng(77, 0);
  const SensingMatrix d = random_sensing(16, 16, 16, rng);
  const CosAngle theta(0.15), phi(-0.35);
  const std::complex<double> delta(2e-4, 1e-4);
  const double sigma2 = 1e-9;

  const auto [crb_t, crb_p] = crb_numeric(d, delta, theta, phi, sigma2);
  CHECK(crb_t > 0.0);
  CHECK(crb_p > 0.0);

  // Fisher scaling: doubling the gain quarters the bounds
  const auto [crb_t2, crb_p2] = crb_numeric(d, 2.0 * delta, theta, phi, sigma2);
  CHECK(crb_t2 == doctest::Approx(crb_t / 4.0).epsilon(1e-9));
  CHECK(crb_p2 == doctest::Approx(crb_p / 4.0).epsilon(1e-9));

  // FIM columns against finite differences of the mean vector
  const double h = 1e-7;
  const auto mean = [&](std::complex<double> dl, double th, double ph) {
    return (dl * d.apply(kron_steering(CosAngle(th), CosAngle(ph), 16, 16))).eval();
  };
  const Eigen::VectorXcd base = mean(delta, theta.value(), phi.value());
  const Eigen::VectorXcd d_theta =
      (mean(delta, theta.value() + h, phi.value()) -
       mean(delta, theta.value() - h, phi.value())) /
      (2 * h);
  const Eigen::VectorXcd d_phi =
      (mean(delta, theta.value(), phi.value() + h) -
       mean(delta, theta.value(), phi.value() - h)) /
      (2 * h);
  // analytic columns reproduced through the implementation's own bound:
  // rebuild the 2x2 angle block of the FIM from the FD columns and compare
  // the resulting bound after eliminating the complex gain nuisance
  const Eigen::VectorXcd d_re = mean(delta + std::complex<double>(h, 0), theta.value(),
                                     phi.value()) / (2 * h) -
                                mean(delta - std::complex<double>(h, 0), theta.value(),
                                     phi.value()) / (2 * h);
  const Eigen::VectorXcd d_im = mean(delta + std::complex<double>(0, h), theta.value(),
                                     phi.value()) / (2 * h) -
                                mean(delta - std::complex<double>(0, h), theta.value(),
                                     phi.value()) / (2 * h);
  std::vector<Eigen::VectorXcd> jac = {d_re, d_im, d_theta, d_phi};
  Eigen::Matrix4d fim;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) fim(i, j) = (2.0 / sigma2) * jac[i].dot(jac[j]).real();
  const Eigen::Matrix4d inv = fim.inverse();
  CHECK(inv(2, 2) == doctest::Approx(crb_t).epsilon(1e-4));
  CHECK(inv(3, 3) == doctest::Approx(crb_p).epsilon(1e-4));

  CHECK_THROWS(crb_numeric(d, 0.0, theta, phi, sigma2));  // gain zero: unidentifiable
}

TEST_CASE("dft codebook and quantisation") {
  const DftCodebook cb = make_dft_codebook(16);
  REQUIRE(cb.angles.size() == 16);
  CHECK(cb.angles.front() == doctest::Approx(-1.0 + 1.0 / 16));
  for (int k = 0; k < 16; ++k)
    CHECK(cb.beams.vectors.col(k).norm() == doctest::Approx(1.0).epsilon(1e-12));
  // neighbouring beams are orthogonal
  CHECK(std::abs(cb.beams.vectors.col(0).dot(cb.beams.vectors.col(5))) < 1e-12);

  CHECK(quantize_to_codebook(CosAngle(cb.angles[7]), cb) == 7);
  // midpoint ties resolve to the lower index
  const double midpoint = (cb.angles[3] + cb.angles[4]) / 2.0;
  CHECK(quantize_to_codebook(CosAngle(midpoint), cb) == 3);
  // the seam at -1 is equidistant to the first and last codewords: lower wins
  CHECK(quantize_to_codebook(CosAngle(-1.0), cb) == 0);

  Pcg32 rng(78, 0);
  for (int i = 0; i < 1000; ++i) {
    const CosAngle psi(rng.uniform(-1, 1));
    const int k = quantize_to_codebook(psi, cb);
    CHECK(std::abs(cos_sub(psi, CosAngle(cb.angles[k])).value()) <= 1.0 / 16 + 1e-12);
  }
}

TEST_CASE("beam sweeps") {
  Pcg32 rng(79, 0);
  const DftCodebook tx = make_dft_codebook(16);
  const DftCodebook rx = make_dft_codebook(16);

  // rank-one channel: the noiseless best pair quantises the path angles
  const CosAngle theta(0.338), phi(-0.521);  // strictly inside grid cells
  const Eigen::MatrixXcd h =
      steering_vector(16, theta) * steering_vector(16, phi).adjoint();
  const auto oracle = best_true_pair(h, tx, rx);
  CHECK(oracle.first == quantize_to_codebook(phi, tx));
  CHECK(oracle.second == quantize_to_codebook(theta, rx));

  // positive scaling leaves the oracle unchanged; zero noise sweep agrees
  const auto scaled = best_true_pair(1e6 * h, tx, rx);
  CHECK(scaled == oracle);
  Pcg32 none(0, 0);
  CHECK(exhaustive_sweep(h, tx, rx, 0.0, none) == oracle);
}

TEST_CASE("scalar k-means") {
  Pcg32 rng(80, 0);
  const std::vector<double> values = {0.0, 0.0, 0.0, 10.0, 10.0};
  const Kmeans1dResult r = kmeans_1d(values, 2, rng);
  CHECK(!r.degenerate);
  CHECK(r.assignment == std::vector<int>{0, 0, 0, 1, 1});
  CHECK(r.centroids[0] == doctest::Approx(0.0));
  CHECK(r.centroids[1] == doctest::Approx(10.0));

  // deterministic under the seed
  Pcg32 rng_a(81, 3), rng_b(81, 3);
  std::vector<double> noisy;
  for (int i = 0; i < 40; ++i) noisy.push_back(rng.uniform(0, 1));
  CHECK(kmeans_1d(noisy, 2, rng_a).assignment == kmeans_1d(noisy, 2, rng_b).assignment);

  // final objective never exceeds the single-cluster objective
  double mean = 0.0;
  for (const double v : noisy) mean += v;
  mean /= noisy.size();
  double single = 0.0;
  for (const double v : noisy) single += (v - mean) * (v - mean);
  const Kmeans1dResult split = kmeans_1d(noisy, 2, rng);
  double objective = 0.0;
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    const double c = split.centroids[split.assignment[i]];
    objective += (noisy[i] - c) * (noisy[i] - c);
  }
  CHECK(objective <= single);

  const Kmeans1dResult degenerate = kmeans_1d({3.0, 3.0, 3.0}, 2, rng);
  CHECK(degenerate.degenerate);
}

TEST_SUITE_END();
