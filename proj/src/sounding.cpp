// SPDX-License-Identifier: Apache-2.0
//
// irsbeam: beam training and positioning simulator for IRS-assisted mmWave links

#include "irsbeam/sounding.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace irsbeam {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

BeamCodebook random_codebook(int elements, int length, BeamSide side, Pcg32& rng) {
  if (elements < 1 || length < 1)
    throw std::invalid_argument("random_codebook: elements and length must be >= 1");
  const double amplitude =
      side == BeamSide::Reflect ? 1.0 : 1.0 / std::sqrt(static_cast<double>(elements));
  BeamCodebook cb;
  cb.side = side;
  cb.vectors.resize(elements, length);
  for (int n = 0; n < length; ++n)
    for (int k = 0; k < elements; ++k)
      cb.vectors(k, n) = std::polar(amplitude, rng.uniform(0.0, 2.0 * kPi));
  return cb;
}

SensingMatrix::SensingMatrix(Eigen::MatrixXcd tx, Eigen::MatrixXcd rx)
    : tx_(std::move(tx)), rx_(std::move(rx)) {
  if (tx_.cols() != rx_.cols())
    throw std::invalid_argument("SensingMatrix: tx/rx slot counts differ");
}

Eigen::VectorXcd SensingMatrix::apply(const Eigen::VectorXcd& b) const {
  const int n_rx = rx_elements();
  const int n_tx = tx_elements();
  if (b.size() != static_cast<Eigen::Index>(n_rx) * n_tx)
    throw std::invalid_argument("SensingMatrix::apply: dimension mismatch");
  // (t kron r^*)^T b = r^H B t with B the unvectorised n_rx x n_tx matrix.
  const Eigen::Map<const Eigen::MatrixXcd> bm(b.data(), n_rx, n_tx);
  Eigen::VectorXcd out(slots());
  for (int n = 0; n < slots(); ++n) out(n) = rx_.col(n).dot(bm * tx_.col(n));
  return out;
}

void SensingMatrix::append_slot(const Eigen::VectorXcd& tx, const Eigen::VectorXcd& rx) {
  if (tx_.size() == 0) {
    tx_ = tx;
    rx_ = rx;
    return;
  }
  if (tx.size() != tx_.rows() || rx.size() != rx_.rows())
    throw std::invalid_argument("SensingMatrix::append_slot: dimension mismatch");
  tx_.conservativeResize(Eigen::NoChange, tx_.cols() + 1);
  rx_.conservativeResize(Eigen::NoChange, rx_.cols() + 1);
  tx_.col(tx_.cols() - 1) = tx;
  rx_.col(rx_.cols() - 1) = rx;
}

SensingMatrix SensingMatrix::prefix(int n) const {
  if (n < 1 || n > slots()) throw std::invalid_argument("SensingMatrix::prefix: bad length");
  return SensingMatrix(tx_.leftCols(n), rx_.leftCols(n));
}

Eigen::MatrixXcd SensingMatrix::materialise() const {
  const int n_rx = rx_elements();
  const int n_tx = tx_elements();
  Eigen::MatrixXcd d(slots(), static_cast<Eigen::Index>(n_rx) * n_tx);
  for (int n = 0; n < slots(); ++n)
    for (int j = 0; j < n_tx; ++j)
      for (int i = 0; i < n_rx; ++i)
        d(n, static_cast<Eigen::Index>(j) * n_rx + i) = tx_(j, n) * std::conj(rx_(i, n));
  return d;
}

Eigen::VectorXcd kron_steering(CosAngle theta, CosAngle phi, int n_rx, int n_tx) {
  const Eigen::VectorXcd a_rx = steering_vector(n_rx, theta);
  const Eigen::VectorXcd a_tx = steering_vector(n_tx, phi);
  Eigen::VectorXcd b(static_cast<Eigen::Index>(n_rx) * n_tx);
  for (int j = 0; j < n_tx; ++j)
    for (int i = 0; i < n_rx; ++i)
      b(static_cast<Eigen::Index>(j) * n_rx + i) = a_rx(i) * std::conj(a_tx(j));
  return b;
}

namespace {

// Parametric measurement of one rank-one path through factored slots:
// coefficient * (r_n^H a_rx) * (a_tx^H t_n) accumulated into y.
void add_path(Eigen::VectorXcd& y, const SensingMatrix& d, std::complex<double> coefficient,
              const Eigen::VectorXcd& a_rx, const Eigen::VectorXcd& a_tx) {
  y += coefficient * d.rx_products(a_rx).cwiseProduct(d.tx_products(a_tx));
}

Eigen::VectorXcd noise_vector(int n, double noise_power, Pcg32& rng) {
  Eigen::VectorXcd w(n);
  for (int i = 0; i < n; ++i) w(i) = rng.cnormal(noise_power);
  return w;
}

}  // namespace

SoundingSession sound_step1(const ChannelRealization& realization, double tx_power,
                            const BeamCodebook& tx_codebook, const BeamCodebook& rx_codebook,
                            double noise_power, Pcg32& rng) {
  if (tx_codebook.length() != rx_codebook.length())
    throw std::invalid_argument("sound_step1: codebook lengths differ");
  const int n_bs = tx_codebook.elements();
  const int n_mt = rx_codebook.elements();
  const int slots = tx_codebook.length();

  SoundingSession s;
  s.anchor_index = 1;
  s.sensing = SensingMatrix(tx_codebook.vectors, rx_codebook.vectors);
  s.gain_scale = std::sqrt(tx_power);
  s.noise_power = noise_power;
  s.gain_applied = true;

  s.y = Eigen::VectorXcd::Zero(slots);
  const LinkRecord& los = realization.links.front();
  if (los.zeta != 0) {
    add_path(s.y, s.sensing, s.gain_scale * los.delta, steering_vector(n_mt, los.theta),
             steering_vector(n_bs, los.phi));
  }
  for (const NlosPath& p : realization.nlos)
    add_path(s.y, s.sensing, s.gain_scale * p.delta, steering_vector(n_mt, p.theta),
             steering_vector(n_bs, p.phi));

  // m_n^H w_n with ||m_n|| = 1 is white CN(0, noise_power); synthesised directly.
  if (noise_power > 0.0) s.y += noise_vector(slots, noise_power, rng);
  return s;
}

SoundingSession sound_step2(const ChannelRealization& realization, int irs_index,
                            double tx_power, int bs_elements,
                            const BeamCodebook& reflect_codebook,
                            const BeamCodebook& rx_codebook, double noise_power, Pcg32& rng,
                            Step2Leakage model) {
  if (irs_index < 1 || irs_index >= static_cast<int>(realization.links.size()))
    throw std::invalid_argument("sound_step2: unknown IRS index");
  if (reflect_codebook.length() != rx_codebook.length())
    throw std::invalid_argument("sound_step2: codebook lengths differ");

  const LinkRecord& link = realization.links[irs_index];
  const VlosGeometry& geo = *link.vlos;
  const int n_irs = reflect_codebook.elements();
  const int n_mt = rx_codebook.elements();
  const int slots = reflect_codebook.length();

  SoundingSession s;
  s.anchor_index = irs_index + 1;
  s.sensing = SensingMatrix(reflect_codebook.vectors, rx_codebook.vectors);
  s.gain_scale = std::sqrt(tx_power * bs_elements);
  s.noise_power = noise_power;
  s.gain_applied = true;

  s.y = Eigen::VectorXcd::Zero(slots);
  if (link.zeta != 0) {
    add_path(s.y, s.sensing, s.gain_scale * link.delta, steering_vector(n_mt, link.theta),
             steering_vector(n_irs, link.phi));
  }

  // LoS/NLoS leakage through the fixed BS beam a_B(phi_BR)/sqrt(N_B). For a
  // path with AoD phi the per-slot Tx factor is the constant
  // a_B^H(phi) a_B(phi_BR)/sqrt(N_B); only the Rx random beam varies.
  const Eigen::VectorXcd bs_beam =
      steering_vector(bs_elements, geo.phi_br) / std::sqrt(static_cast<double>(bs_elements));
  const double root_p = std::sqrt(tx_power);
  const auto leak = [&](std::complex<double> delta, CosAngle theta, CosAngle phi) {
    const std::complex<double> filter = steering_vector(bs_elements, phi).dot(bs_beam);
    s.y += (root_p * delta * filter) *
           s.sensing.rx_products(steering_vector(n_mt, theta));
  };
  const LinkRecord& los = realization.links.front();
  if (model == Step2Leakage::Exact && los.zeta != 0) leak(los.delta, los.theta, los.phi);
  for (const NlosPath& p : realization.nlos) leak(p.delta, p.theta, p.phi);

  if (noise_power > 0.0) s.y += noise_vector(slots, noise_power, rng);
  return s;
}

Eigen::VectorXcd synth_unified(int zeta, std::complex<double> delta, CosAngle theta,
                               CosAngle phi, const SensingMatrix& sensing, double noise_power,
                               Pcg32& rng) {
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(sensing.slots());
  if (zeta != 0) {
    add_path(y, sensing, delta, steering_vector(sensing.rx_elements(), theta),
             steering_vector(sensing.tx_elements(), phi));
  }
  if (noise_power > 0.0) y += noise_vector(sensing.slots(), noise_power, rng);
  return y;
}

void save_session(const SoundingSession& session, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_session: cannot open " + path);
  char buf[64];
  const auto put = [&](std::complex<double> v) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g", v.real(), v.imag());
    out << buf;
  };
  out << "anchor_index," << session.anchor_index << "\n";
  out << "gain_scale,";
  std::snprintf(buf, sizeof(buf), "%.17g", session.gain_scale);
  out << buf << "\n";
  out << "noise_power,";
  std::snprintf(buf, sizeof(buf), "%.17g", session.noise_power);
  out << buf << "\n";
  out << "dims," << session.sensing.tx_elements() << "," << session.sensing.rx_elements() << ","
      << session.sensing.slots() << "\n";
  for (int n = 0; n < session.sensing.slots(); ++n) {
    out << "tx";
    for (int k = 0; k < session.sensing.tx_elements(); ++k) {
      out << ",";
      put(session.sensing.tx()(k, n));
    }
    out << "\nrx";
    for (int k = 0; k < session.sensing.rx_elements(); ++k) {
      out << ",";
      put(session.sensing.rx()(k, n));
    }
    out << "\ny,";
    put(session.y(n));
    out << "\n";
  }
}

SoundingSession load_session(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_session: cannot open " + path);
  std::string line;
  const auto next_fields = [&](const std::string& tag) {
    if (!std::getline(in, line)) throw std::runtime_error("load_session: truncated file");
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) fields.push_back(item);
    if (fields.empty() || fields.front() != tag)
      throw std::runtime_error("load_session: expected record " + tag);
    return fields;
  };

  SoundingSession s;
  s.anchor_index = std::stoi(next_fields("anchor_index").at(1));
  s.gain_scale = std::stod(next_fields("gain_scale").at(1));
  s.noise_power = std::stod(next_fields("noise_power").at(1));
  const auto dims = next_fields("dims");
  const int n_tx = std::stoi(dims.at(1));
  const int n_rx = std::stoi(dims.at(2));
  const int slots = std::stoi(dims.at(3));

  Eigen::MatrixXcd tx(n_tx, slots), rx(n_rx, slots);
  s.y.resize(slots);
  for (int n = 0; n < slots; ++n) {
    const auto t = next_fields("tx");
    for (int k = 0; k < n_tx; ++k)
      tx(k, n) = {std::stod(t.at(1 + 2 * k)), std::stod(t.at(2 + 2 * k))};
    const auto r = next_fields("rx");
    for (int k = 0; k < n_rx; ++k)
      rx(k, n) = {std::stod(r.at(1 + 2 * k)), std::stod(r.at(2 + 2 * k))};
    const auto yv = next_fields("y");
    s.y(n) = {std::stod(yv.at(1)), std::stod(yv.at(2))};
  }
  s.sensing = SensingMatrix(std::move(tx), std::move(rx));
  s.gain_applied = true;
  return s;
}

}  // namespace irsbeam
