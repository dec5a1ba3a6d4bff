#include "cpmsim/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace cpmsim {

namespace {

using nlohmann::json;

NetworkConfig parse_network(const json& j) {
  NetworkConfig base;
  int k = j.value("k", base.tx_count);
  int s = j.value("s", base.band_count);
  double snr_db = j.value("snr_db", base.snr_db);
  double sir_db = j.value("sir_db", base.sir_db);
  int n_bits = j.value("n_bits", base.n_bits);
  double epsilon = j.value("epsilon", base.epsilon);
  double sigma2 = j.value("sigma2", base.sigma2);
  NetworkConfig cfg =
      NetworkConfig::make(k, s, snr_db, sir_db, n_bits, epsilon, sigma2);
  if (j.contains("p_max")) {
    cfg.p_max = j.at("p_max").get<double>();
    cfg.validate();  // must agree with snr_db
  }
  cfg.gain_min_factor = j.value("gain_min_factor", cfg.gain_min_factor);
  cfg.gain_max_factor = j.value("gain_max_factor", cfg.gain_max_factor);
  cfg.local_csi_noise_std =
      j.value("local_csi_noise_std", cfg.local_csi_noise_std);
  cfg.validate();
  return cfg;
}

}  // namespace

Scenario load_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("config parse error: ") + e.what());
  }
  try {
    Scenario sc;
    if (j.contains("network")) sc.network = parse_network(j.at("network"));
    const json& sweep = j.at("sweep");
    sc.sweep.name = sweep.at("name").get<std::string>();
    sc.sweep.values = sweep.at("values").get<std::vector<double>>();
    for (const auto& name : j.at("schemes"))
      sc.schemes.push_back(scheme_from_name(name.get<std::string>()));
    sc.trials = j.value("trials", sc.trials);
    sc.seed = j.value("seed", sc.seed);
    sc.frame_length = j.value("frame_length", sc.frame_length);
    sc.discount_exploration =
        j.value("discount_exploration", sc.discount_exploration);
    if (j.contains("brd")) {
      const json& brd = j.at("brd");
      sc.brd.grid_points = brd.value("grid_points", sc.brd.grid_points);
      sc.brd.max_rounds = brd.value("max_rounds", sc.brd.max_rounds);
      sc.brd.convergence_tol =
          brd.value("convergence_tol", sc.brd.convergence_tol);
    }
    sc.validate();
    return sc;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config error: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("config error: ") + e.what());
  }
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return load_scenario(buf.str());
}

Scenario fig1_scenario(int trials, std::uint64_t seed) {
  Scenario sc;
  sc.network = NetworkConfig::make(4, 2, 30.0, 10.0, 8, 0.01);
  sc.sweep.name = "snr_db";
  sc.sweep.values = {10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0};
  sc.schemes = {Scheme::perfect_brd, Scheme::cpm_brd, Scheme::iwfa};
  sc.trials = trials;
  sc.seed = seed;
  return sc;
}

std::vector<Scenario> fig2_scenarios(int trials, std::uint64_t seed) {
  struct Setting {
    int n_bits;
    double epsilon;
    const char* suffix;
  };
  const Setting settings[] = {
      {8, 0.01, "_n8_e0.01"},
      {4, 0.05, "_n4_e0.05"},
      {1, 0.05, "_n1_e0.05"},
  };
  std::vector<Scenario> out;
  for (const Setting& s : settings) {
    Scenario sc;
    sc.network = NetworkConfig::make(2, 1, 30.0, 10.0, s.n_bits, s.epsilon);
    sc.sweep.name = "sir_db";
    sc.sweep.values = {0.0, 5.0, 10.0, 15.0, 20.0};
    sc.schemes = {Scheme::cpm_brd};
    sc.trials = trials;
    sc.seed = seed;
    sc.scheme_label_suffix = s.suffix;
    out.push_back(std::move(sc));
  }
  return out;
}

}  // namespace cpmsim
