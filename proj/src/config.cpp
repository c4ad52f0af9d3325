// SPDX-License-Identifier: Apache-2.0
//
// irsbeam: beam training and positioning simulator for IRS-assisted mmWave links

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "irsbeam/experiments.hpp"

namespace irsbeam {

double ExperimentConfig::wavelength() const { return 299792458.0 / (frequency_ghz * 1e9); }

double ExperimentConfig::noise_power() const { return std::pow(10.0, (noise_dbm - 30.0) / 10.0); }

double ExperimentConfig::tx_power() const { return std::pow(10.0, (tx_power_dbm - 30.0) / 10.0); }

double ExperimentConfig::reflection_loss() const {
  return std::pow(10.0, -reflection_loss_db / 10.0);
}

GridSpec ExperimentConfig::grid_spec() const {
  GridSpec g = GridSpec::for_arrays(std::max(bs_antennas, irs_elements), mt_antennas, peaks);
  if (grid_theta > 0) g.z_theta = grid_theta;
  if (grid_phi > 0) g.z_phi = grid_phi;
  return g;
}

std::vector<Anchor> ExperimentConfig::anchors() const {
  if (irs_positions.size() != irs_directions.size())
    throw std::invalid_argument("config: irs position/direction counts differ");
  std::vector<Anchor> out;
  out.reserve(irs_positions.size() + 1);
  out.push_back({AnchorKind::Bs, bs_position, ArrayGeometry(bs_antennas, bs_direction), 1});
  for (std::size_t i = 0; i < irs_positions.size(); ++i)
    out.push_back({AnchorKind::Irs, irs_positions[i],
                   ArrayGeometry(irs_elements, irs_directions[i]), static_cast<int>(i) + 2});
  return out;
}

ScenarioParams ExperimentConfig::scenario_params() const {
  ScenarioParams p;
  p.anchors = anchors();
  p.hall_min = hall_min;
  p.hall_max = hall_max;
  p.users = users;
  p.obstacle_size = obstacle_size;
  p.mt_z_min = mt_z_min;
  p.mt_z_max = mt_z_max;
  p.mt_array_size = mt_antennas;
  p.wavelength = wavelength();
  p.reflection_loss = reflection_loss();
  p.tx_power = tx_power();
  p.noise_power = noise_power();
  p.nlos_count = nlos_paths;
  p.nlos_gap_db = nlos_gap_db;
  return p;
}

Vec3 ExperimentConfig::initial_position_guess() const {
  return {(hall_min.x + hall_max.x) / 2.0, (hall_min.y + hall_max.y) / 2.0,
          (mt_z_min + mt_z_max) / 2.0};
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.irs_positions = {{5, -10, 3.5}, {5, 10, 3.5},  {0, -10, 3.5}, {0, 10, 3.5},
                       {-5, -10, 3.5}, {-5, 10, 3.5}, {-10, 5, 3.5}, {10, 5, 3.5},
                       {-10, 0, 3.5}, {10, 0, 3.5},  {-10, -5, 3.5}, {10, -5, 3.5}};
  cfg.irs_directions = {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 0},
                        {0, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 0}, {0, 1, 0}, {0, 1, 0}};
  return cfg;
}

namespace {

std::vector<double> parse_numbers(const std::string& value, std::size_t expect,
                                  const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(value);
  double v;
  while (ss >> v) out.push_back(v);
  if (out.size() != expect)
    throw std::invalid_argument("config: key '" + key + "' expects " + std::to_string(expect) +
                                " numbers");
  return out;
}

Vec3 parse_vec3(const std::string& value, const std::string& key) {
  const auto v = parse_numbers(value, 3, key);
  return {v[0], v[1], v[2]};
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg = default_config();
  std::string section;
  bool irs_list_reset = false;

  std::stringstream stream(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config: malformed section at line " +
                                    std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      if (section != "scenario" && section != "sounding" && section != "estimator" &&
          section != "positioning" && section != "run")
        throw std::invalid_argument("config: unknown section '" + section + "'");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key = value at line " +
                                  std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto num = [&] { return std::stod(value); };
    const auto integer = [&] { return static_cast<int>(std::stoll(value)); };
    const auto u64 = [&] { return static_cast<std::uint64_t>(std::stoull(value)); };

    bool known = true;
    if (section == "scenario") {
      if (key == "hall_min") cfg.hall_min = parse_vec3(value, key);
      else if (key == "hall_max") cfg.hall_max = parse_vec3(value, key);
      else if (key == "users") cfg.users = integer();
      else if (key == "nlos_paths") cfg.nlos_paths = integer();
      else if (key == "nlos_gap_db") cfg.nlos_gap_db = num();
      else if (key == "reflection_loss_db") cfg.reflection_loss_db = num();
      else if (key == "noise_dbm") cfg.noise_dbm = num();
      else if (key == "frequency_ghz") cfg.frequency_ghz = num();
      else if (key == "tx_power_dbm") cfg.tx_power_dbm = num();
      else if (key == "bs_antennas") cfg.bs_antennas = integer();
      else if (key == "mt_antennas") cfg.mt_antennas = integer();
      else if (key == "irs_elements") cfg.irs_elements = integer();
      else if (key == "mt_z_min") cfg.mt_z_min = num();
      else if (key == "mt_z_max") cfg.mt_z_max = num();
      else if (key == "obstacle_size") cfg.obstacle_size = parse_vec3(value, key);
      else if (key == "bs_position") cfg.bs_position = parse_vec3(value, key);
      else if (key == "bs_direction") cfg.bs_direction = parse_vec3(value, key);
      else if (key == "irs") {
        if (!irs_list_reset) {
          cfg.irs_positions.clear();
          cfg.irs_directions.clear();
          irs_list_reset = true;
        }
        const auto v = parse_numbers(value, 6, key);
        cfg.irs_positions.push_back({v[0], v[1], v[2]});
        cfg.irs_directions.push_back({v[3], v[4], v[5]});
      } else known = false;
    } else if (section == "sounding") {
      if (key == "training_length") cfg.training_length = integer();
      else if (key == "codebook_seed") cfg.codebook_seed = u64();
      else if (key == "step2_exact_leakage") cfg.step2_exact_leakage = integer() != 0;
      else known = false;
    } else if (section == "estimator") {
      if (key == "grid_theta") cfg.grid_theta = integer();
      else if (key == "grid_phi") cfg.grid_phi = integer();
      else if (key == "peaks") cfg.peaks = integer();
      else if (key == "fine_step") cfg.fine.step = num();
      else if (key == "fine_stop_eps") cfg.fine.stop_eps = num();
      else if (key == "fine_max_iterations") cfg.fine.max_iterations = integer();
      else known = false;
    } else if (section == "positioning") {
      if (key == "cost_threshold_sqrt") cfg.policy.cost_threshold = num() * num();
      else if (key == "pathloss_threshold_db") cfg.policy.pathloss_threshold_db = num();
      else if (key == "taylor_stop_eps") cfg.taylor_stop_eps = num();
      else if (key == "taylor_max_iterations") cfg.taylor_max_iterations = integer();
      else known = false;
    } else if (section == "run") {
      if (key == "trials") cfg.trials = u64();
      else if (key == "base_seed") cfg.base_seed = u64();
      else if (key == "workers") cfg.workers = integer();
      else if (key == "out_dir") cfg.out_dir = value;
      else known = false;
    } else {
      throw std::invalid_argument("config: key outside any section at line " +
                                  std::to_string(line_no));
    }
    if (!known)
      throw std::invalid_argument("config: unknown key '" + key + "' in section [" + section +
                                  "]");
  }

  if (cfg.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (cfg.users < 0) throw std::invalid_argument("config: users must be >= 0");
  if (cfg.workers < 1) throw std::invalid_argument("config: workers must be >= 1");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string canonical_config_text(const ExperimentConfig& cfg) {
  std::string out;
  char buf[256];
  const auto put = [&](const char* key, const char* fmt, auto... args) {
    std::snprintf(buf, sizeof(buf), fmt, args...);
    out += key;
    out += '=';
    out += buf;
    out += '\n';
  };
  const auto put_vec = [&](const char* key, const Vec3& v) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g", v.x, v.y, v.z);
    out += key;
    out += '=';
    out += buf;
    out += '\n';
  };
  put_vec("hall_min", cfg.hall_min);
  put_vec("hall_max", cfg.hall_max);
  put("users", "%d", cfg.users);
  put("nlos_paths", "%d", cfg.nlos_paths);
  put("nlos_gap_db", "%.17g", cfg.nlos_gap_db);
  put("reflection_loss_db", "%.17g", cfg.reflection_loss_db);
  put("noise_dbm", "%.17g", cfg.noise_dbm);
  put("frequency_ghz", "%.17g", cfg.frequency_ghz);
  put("tx_power_dbm", "%.17g", cfg.tx_power_dbm);
  put("bs_antennas", "%d", cfg.bs_antennas);
  put("mt_antennas", "%d", cfg.mt_antennas);
  put("irs_elements", "%d", cfg.irs_elements);
  put("mt_z_min", "%.17g", cfg.mt_z_min);
  put("mt_z_max", "%.17g", cfg.mt_z_max);
  put_vec("obstacle_size", cfg.obstacle_size);
  put_vec("bs_position", cfg.bs_position);
  put_vec("bs_direction", cfg.bs_direction);
  for (std::size_t i = 0; i < cfg.irs_positions.size(); ++i) {
    put_vec(("irs_position_" + std::to_string(i)).c_str(), cfg.irs_positions[i]);
    put_vec(("irs_direction_" + std::to_string(i)).c_str(), cfg.irs_directions[i]);
  }
  put("training_length", "%d", cfg.training_length);
  put("codebook_seed", "%llu", static_cast<unsigned long long>(cfg.codebook_seed));
  put("step2_exact_leakage", "%d", cfg.step2_exact_leakage ? 1 : 0);
  put("grid_theta", "%d", cfg.grid_spec().z_theta);
  put("grid_phi", "%d", cfg.grid_spec().z_phi);
  put("peaks", "%d", cfg.peaks);
  put("fine_step", "%.17g", cfg.fine.step);
  put("fine_stop_eps", "%.17g", cfg.fine.stop_eps);
  put("fine_max_iterations", "%d", cfg.fine.max_iterations);
  put("cost_threshold", "%.17g", cfg.policy.cost_threshold);
  put("pathloss_threshold_db", "%.17g", cfg.policy.pathloss_threshold_db);
  put("taylor_stop_eps", "%.17g", cfg.taylor_stop_eps);
  put("taylor_max_iterations", "%d", cfg.taylor_max_iterations);
  put("trials", "%llu", static_cast<unsigned long long>(cfg.trials));
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string text = canonical_config_text(cfg);
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace irsbeam
