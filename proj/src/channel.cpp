// SPDX-License-Identifier: Apache-2.0
//
// irsbeam: beam training and positioning simulator for IRS-assisted mmWave links

#include "irsbeam/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace irsbeam {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool boxes_overlap_xy(const Vec3& c1, const Vec3& c2, const Vec3& half) {
  return std::abs(c1.x - c2.x) < 2.0 * half.x && std::abs(c1.y - c2.y) < 2.0 * half.y;
}

Vec3 random_unit_vector(Pcg32& rng) {
  for (;;) {
    const Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    const double n = norm(v);
    if (n > 1e-6) return v / n;
  }
}

}  // namespace

Scenario sample_scenario(const ScenarioParams& params, Pcg32& rng) {
  if (params.anchors.empty() || params.anchors.front().kind != AnchorKind::Bs)
    throw std::invalid_argument("sample_scenario: anchors[0] must be the BS");

  Scenario s;
  s.anchors = params.anchors;
  s.wavelength = params.wavelength;
  s.reflection_loss = params.reflection_loss;
  s.tx_power = params.tx_power;
  s.noise_power = params.noise_power;
  s.nlos_count = params.nlos_count;
  s.nlos_gap_db = params.nlos_gap_db;
  s.hall_min = params.hall_min;
  s.hall_max = params.hall_max;

  const Vec3 half = params.obstacle_size / 2.0;
  const double floor_z = params.hall_min.z;

  // Holder cuboids stand on the floor; placement is rejected until the new
  // cuboid overlaps no previously placed one (in the x-y plane, since all
  // share the same height band).
  std::vector<Vec3> centers;
  const int boxes = std::max(params.users, 0);
  centers.reserve(boxes);
  for (int i = 0; i < boxes; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < params.rejection_budget; ++attempt) {
      const Vec3 c{rng.uniform(params.hall_min.x, params.hall_max.x),
                   rng.uniform(params.hall_min.y, params.hall_max.y), floor_z + half.z};
      bool clash = false;
      for (const Vec3& other : centers) {
        if (boxes_overlap_xy(c, other, half)) {
          clash = true;
          break;
        }
      }
      if (!clash) {
        centers.push_back(c);
        placed = true;
        break;
      }
    }
    if (!placed)
      throw std::runtime_error("sample_scenario: rejection budget exhausted, user density too high");
  }

  // The MT rides in the first holder; that cuboid never occludes its own
  // links. With users == 0 the MT is placed directly (no holder either).
  if (!centers.empty()) {
    s.mt_position = Vec3{centers.front().x, centers.front().y,
                         rng.uniform(params.mt_z_min, params.mt_z_max)};
    for (std::size_t i = 1; i < centers.size(); ++i) s.obstacles.emplace_back(centers[i], half);
  } else {
    s.mt_position = Vec3{rng.uniform(params.hall_min.x, params.hall_max.x),
                         rng.uniform(params.hall_min.y, params.hall_max.y),
                         rng.uniform(params.mt_z_min, params.mt_z_max)};
  }

  s.mt_array = ArrayGeometry(params.mt_array_size, random_unit_vector(rng));
  return s;
}

LinkState compute_blockage(const Scenario& scenario) {
  LinkState state;
  state.zeta.resize(scenario.anchors.size(), 1);

  const auto clear = [&](const Vec3& a, const Vec3& b) {
    for (const Box& box : scenario.obstacles)
      if (segment_intersects_box(a, b, box)) return false;
    return true;
  };

  const Vec3& bs = scenario.anchors.front().position;
  state.zeta[0] = clear(bs, scenario.mt_position) ? 1 : 0;
  for (std::size_t i = 1; i < scenario.anchors.size(); ++i) {
    const Vec3& irs = scenario.anchors[i].position;
    state.zeta[i] = (clear(bs, irs) && clear(irs, scenario.mt_position)) ? 1 : 0;
  }
  return state;
}

std::complex<double> los_gain(double distance, double wavelength) {
  if (distance <= 0.0) throw std::invalid_argument("los_gain: distance must be positive");
  const double magnitude = wavelength / (4.0 * kPi * distance);
  return std::polar(magnitude, -2.0 * kPi * distance / wavelength);
}

std::complex<double> vlos_gain(double d_br, double d_rm, double reflection_loss,
                               double wavelength) {
  if (d_br <= 0.0 || d_rm <= 0.0)
    throw std::invalid_argument("vlos_gain: distances must be positive");
  if (reflection_loss <= 0.0 || reflection_loss > 1.0)
    throw std::invalid_argument("vlos_gain: reflection loss must be in (0, 1]");
  const double total = d_br + d_rm;
  const double magnitude = std::sqrt(reflection_loss) * wavelength / (4.0 * kPi * total);
  return std::polar(magnitude, -2.0 * kPi * total / wavelength);
}

std::complex<double> effective_irs_gain(const Eigen::VectorXcd& g, CosAngle phi_rm,
                                        CosAngle theta_br, std::complex<double> delta_bar) {
  const Eigen::VectorXcd a = steering_vector(static_cast<int>(g.size()),
                                             cos_sub(phi_rm, theta_br));
  return delta_bar * a.dot(g);  // Eigen::dot conjugates the left operand
}

std::vector<NlosPath> sample_nlos(int count, double abs_delta1, double gap_db, Pcg32& rng) {
  std::vector<NlosPath> paths;
  paths.reserve(std::max(count, 0));
  const double variance = abs_delta1 * abs_delta1 * std::pow(10.0, -gap_db / 10.0);
  for (int l = 0; l < count; ++l) {
    NlosPath p;
    p.delta = rng.cnormal(variance);
    p.theta = CosAngle(std::cos(rng.uniform(0.0, 2.0 * kPi)));
    p.phi = CosAngle(std::cos(rng.uniform(0.0, 2.0 * kPi)));
    paths.push_back(p);
  }
  return paths;
}

ChannelRealization realize_channel(const Scenario& scenario, Pcg32& rng) {
  const LinkState blockage = compute_blockage(scenario);
  const Anchor& bs = scenario.anchors.front();
  const Vec3& mt = scenario.mt_position;
  const Vec3& e_mt = scenario.mt_array.direction;

  ChannelRealization r;
  r.links.reserve(scenario.anchors.size());

  LinkRecord los;
  los.anchor_index = 1;
  los.zeta = blockage.zeta[0];
  los.distance = norm(mt - bs.position);
  los.delta = los_gain(los.distance, scenario.wavelength);
  los.theta = cosine_of_direction(mt, bs.position, e_mt);
  los.phi = cosine_of_direction(mt, bs.position, bs.array.direction);
  r.links.push_back(los);

  for (std::size_t i = 1; i < scenario.anchors.size(); ++i) {
    const Anchor& irs = scenario.anchors[i];
    VlosGeometry geo;
    geo.d_br = norm(irs.position - bs.position);
    geo.d_rm = norm(mt - irs.position);
    geo.theta_br = cosine_of_direction(irs.position, bs.position, irs.array.direction);
    geo.phi_br = cosine_of_direction(irs.position, bs.position, bs.array.direction);
    geo.theta_rm = cosine_of_direction(mt, irs.position, e_mt);
    geo.phi_rm = cosine_of_direction(mt, irs.position, irs.array.direction);

    LinkRecord link;
    link.anchor_index = static_cast<int>(i) + 1;
    link.zeta = blockage.zeta[i];
    link.distance = geo.d_br + geo.d_rm;
    link.delta = vlos_gain(geo.d_br, geo.d_rm, scenario.reflection_loss, scenario.wavelength);
    link.theta = geo.theta_rm;
    link.phi = cos_sub(geo.phi_rm, geo.theta_br);
    link.vlos = geo;
    r.links.push_back(link);
  }

  r.nlos = sample_nlos(scenario.nlos_count, std::abs(r.links.front().delta),
                       scenario.nlos_gap_db, rng);
  return r;
}

Eigen::MatrixXcd assemble_channel(const Scenario& scenario, const ChannelRealization& realization,
                                  const std::vector<Eigen::VectorXcd>& reflection,
                                  const std::vector<int>& activation) {
  const int n_mt = scenario.mt_array.size;
  const int n_bs = scenario.anchors.front().array.size;
  const int n_irs = static_cast<int>(scenario.anchors.size()) - 1;
  if (static_cast<int>(activation.size()) != n_irs)
    throw std::invalid_argument("assemble_channel: activation size must match IRS count");

  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n_mt, n_bs);

  const LinkRecord& los = realization.links.front();
  if (los.zeta != 0) {
    h += los.delta * steering_vector(n_mt, los.theta) *
         steering_vector(n_bs, los.phi).adjoint();
  }
  for (const NlosPath& p : realization.nlos)
    h += p.delta * steering_vector(n_mt, p.theta) * steering_vector(n_bs, p.phi).adjoint();

  for (int i = 0; i < n_irs; ++i) {
    if (!activation[i]) continue;
    const LinkRecord& link = realization.links[i + 1];
    if (link.zeta == 0) continue;
    const VlosGeometry& geo = *link.vlos;
    const int n_r = scenario.anchors[i + 1].array.size;
    if (i >= static_cast<int>(reflection.size()) || reflection[i].size() != n_r)
      throw std::invalid_argument("assemble_channel: missing reflection vector for active IRS");
    const std::complex<double> gain =
        effective_irs_gain(reflection[i], geo.phi_rm, geo.theta_br, link.delta);
    h += gain * steering_vector(n_mt, geo.theta_rm) *
         steering_vector(n_bs, geo.phi_br).adjoint();
  }
  return h;
}

}  // namespace irsbeam
