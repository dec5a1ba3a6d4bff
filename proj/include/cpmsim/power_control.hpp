#pragma once

#include <span>
#include <vector>

#include "cpmsim/channel_model.hpp"
#include "cpmsim/cpm_exchange.hpp"

namespace cpmsim {

// Per-transmitter, per-band transmit powers of the exploitation phase.
// Feasibility: powers >= 0 and sum over bands <= p_max per transmitter.
struct PowerProfile {
  int tx_count = 0;
  int band_count = 0;
  std::vector<double> powers;  // tx*S + band

  PowerProfile() = default;
  PowerProfile(int tx_count, int band_count);

  double power(int tx, int band) const {
    return powers[static_cast<std::size_t>(tx * band_count + band)];
  }
  double& power(int tx, int band) {
    return powers[static_cast<std::size_t>(tx * band_count + band)];
  }
  double total_power(int tx) const;
  bool budget_ok(double p_max, double tol = 1e-9) const;
};

struct BrdSettings {
  int grid_points = 64;      // per-band discretization of [0, P_max]
  int max_rounds = 100;
  double convergence_tol = -1.0;  // <= 0 means 1e-6 * p_max

  double effective_tol(double p_max) const {
    return convergence_tol > 0.0 ? convergence_tol : 1e-6 * p_max;
  }
  void validate() const;  // throws on grid_points < 2 or max_rounds < 1
};

// SINR of pair `tx` on `band`: direct power over noise plus cross power.
double sinr(int tx, int band, const PowerProfile& profile,
            const ChannelMatrix& gains, double sigma2);

// Sum over bands and pairs of log2(1 + SINR).
double sum_rate(const PowerProfile& profile, const ChannelMatrix& gains,
                double sigma2);

struct WaterFillResult {
  std::vector<double> powers;
  double water_level = 0.0;
  bool degenerate = false;  // all direct gains zero with positive budget
};

// Single-user water-filling: p_s = max(0, mu - n_s/g_s) with mu set so the
// budget is met exactly (KKT to 1e-9). Bands with zero gain get zero power.
WaterFillResult water_fill(std::span<const double> direct_gains,
                           std::span<const double> interference_plus_noise,
                           double budget);

struct BrdResult {
  PowerProfile profile;
  bool converged = false;
  int rounds = 0;
  // sum_rate on the optimized matrix after each single-player update;
  // non-decreasing by construction.
  std::vector<double> objective_trace;
};

// Offline Gauss-Seidel best-response dynamics on one channel matrix
// (typically an estimate): starting from the uniform profile
// p_i^s = P_max/S, each player in turn replaces its own band allocation by
// the budget-feasible grid point maximizing the sum-rate. Ties break toward
// the lowest total power, then lexicographically.
BrdResult team_brd(const ChannelMatrix& gains, const NetworkConfig& config,
                   const BrdSettings& settings);
BrdResult team_brd(const CsiEstimate& estimate, const NetworkConfig& config,
                   const BrdSettings& settings);

// Each transmitter runs team_brd on its own estimate; the network profile
// takes row i from transmitter i's solution.
BrdResult distributed_team_brd(const std::vector<CsiEstimate>& estimates,
                               const NetworkConfig& config,
                               const BrdSettings& settings);

struct IwfaResult {
  PowerProfile profile;
  bool converged = false;
  int rounds = 0;
};

// Iterative water-filling: sequential rounds where each transmitter measures
// its per-band interference-plus-noise under the current profile and
// water-fills its budget against it. grid_points is unused here.
IwfaResult iwfa(const ChannelMatrix& truth, const NetworkConfig& config,
                const BrdSettings& settings);

}  // namespace cpmsim
