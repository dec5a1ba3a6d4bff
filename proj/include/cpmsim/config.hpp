#pragma once

#include <string>

#include "cpmsim/experiment.hpp"

namespace cpmsim {

// Parses a scenario from its JSON form. Expected shape:
//
// {
//   "network": {"k": 2, "s": 1, "snr_db": 30.0, "sir_db": 10.0,
//               "n_bits": 8, "epsilon": 0.01, "sigma2": 1.0,
//               "gain_min_factor": 0.01, "gain_max_factor": 5.0,
//               "local_csi_noise_std": 0.0},
//   "sweep": {"name": "sir_db", "values": [0, 5, 10, 15, 20]},
//   "schemes": ["cpm_brd", "perfect_brd", "iwfa"],
//   "trials": 10000,
//   "seed": 1,
//   "frame_length": 1000,
//   "brd": {"grid_points": 64, "max_rounds": 100}
// }
//
// All fields have defaults except sweep and schemes. Throws
// std::runtime_error with a description on malformed input.
Scenario load_scenario(const std::string& json_text);
Scenario load_scenario_file(const std::string& path);

// Built-in scenarios behind the fig1/fig2 CLI subcommands.
Scenario fig1_scenario(int trials, std::uint64_t seed);
// One scenario per feedback setting (n_bits, epsilon); records are meant to
// be merged into a single CSV, so each carries a scheme label suffix.
std::vector<Scenario> fig2_scenarios(int trials, std::uint64_t seed);

}  // namespace cpmsim
