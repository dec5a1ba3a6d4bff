#include "cpmsim/power_control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cpmsim {

PowerProfile::PowerProfile(int tx_count_, int band_count_)
    : tx_count(tx_count_),
      band_count(band_count_),
      powers(static_cast<std::size_t>(tx_count_) * band_count_, 0.0) {}

double PowerProfile::total_power(int tx) const {
  double acc = 0.0;
  for (int s = 0; s < band_count; ++s) acc += power(tx, s);
  return acc;
}

bool PowerProfile::budget_ok(double p_max, double tol) const {
  for (int i = 0; i < tx_count; ++i) {
    if (total_power(i) > p_max + tol) return false;
    for (int s = 0; s < band_count; ++s)
      if (power(i, s) < 0.0) return false;
  }
  return true;
}

void BrdSettings::validate() const {
  if (grid_points < 2) throw std::invalid_argument("grid_points must be >= 2");
  if (max_rounds < 1) throw std::invalid_argument("max_rounds must be >= 1");
}

double sinr(int tx, int band, const PowerProfile& profile,
            const ChannelMatrix& gains, double sigma2) {
  double interference = sigma2;
  for (int j = 0; j < profile.tx_count; ++j)
    if (j != tx) interference += gains.gain(j, tx, band) * profile.power(j, band);
  return gains.gain(tx, tx, band) * profile.power(tx, band) / interference;
}

double sum_rate(const PowerProfile& profile, const ChannelMatrix& gains,
                double sigma2) {
  double rate = 0.0;
  for (int band = 0; band < profile.band_count; ++band)
    for (int i = 0; i < profile.tx_count; ++i)
      rate += std::log2(1.0 + sinr(i, band, profile, gains, sigma2));
  return rate;
}

WaterFillResult water_fill(std::span<const double> direct_gains,
                           std::span<const double> interference_plus_noise,
                           double budget) {
  const std::size_t s = direct_gains.size();
  if (interference_plus_noise.size() != s)
    throw std::invalid_argument("water_fill: size mismatch");
  if (budget < 0.0) throw std::invalid_argument("budget must be >= 0");
  WaterFillResult res;
  res.powers.assign(s, 0.0);

  // Bands sorted by floor height n/g; dead bands (g == 0) never fill.
  std::vector<std::size_t> live;
  for (std::size_t b = 0; b < s; ++b) {
    if (!(interference_plus_noise[b] > 0.0))
      throw std::invalid_argument("interference_plus_noise must be positive");
    if (direct_gains[b] < 0.0)
      throw std::invalid_argument("direct gains must be >= 0");
    if (direct_gains[b] > 0.0) live.push_back(b);
  }
  if (live.empty()) {
    res.degenerate = budget > 0.0;
    return res;
  }

  std::vector<double> floor(live.size());
  for (std::size_t idx = 0; idx < live.size(); ++idx)
    floor[idx] = interference_plus_noise[live[idx]] / direct_gains[live[idx]];
  std::sort(floor.begin(), floor.end());

  // With the m lowest bands active, mu = (budget + sum of their floors)/m;
  // valid once mu does not reach the next band's floor.
  double prefix = 0.0;
  double mu = 0.0;
  for (std::size_t m = 1; m <= floor.size(); ++m) {
    prefix += floor[m - 1];
    mu = (budget + prefix) / static_cast<double>(m);
    if (m == floor.size() || mu <= floor[m]) break;
  }

  res.water_level = mu;
  for (std::size_t b : live) {
    double p = mu - interference_plus_noise[b] / direct_gains[b];
    res.powers[b] = std::max(0.0, p);
  }
  return res;
}

namespace {

// Per-candidate evaluation state for one player's best response: everything
// that does not depend on the candidate is folded into per-(rx, band)
// constants.
struct BestResponseWorkspace {
  // base[rx*S + s] = sigma2 + interference at rx on band s from all players
  // other than the responding one and rx itself.
  std::vector<double> base;
  // direct[rx*S + s] = g_rr * p_r for rx != player (their useful power).
  std::vector<double> direct;
  // cross[rx*S + s] = gain player -> rx on band s.
  std::vector<double> cross;
  // own_direct[s] = g_ii for the responding player.
  std::vector<double> own_direct;
};

void fill_workspace(BestResponseWorkspace& ws, int player,
                    const PowerProfile& profile, const ChannelMatrix& gains,
                    double sigma2) {
  const int k = profile.tx_count;
  const int s = profile.band_count;
  ws.base.assign(static_cast<std::size_t>(k) * s, 0.0);
  ws.direct.assign(static_cast<std::size_t>(k) * s, 0.0);
  ws.cross.assign(static_cast<std::size_t>(k) * s, 0.0);
  ws.own_direct.assign(static_cast<std::size_t>(s), 0.0);
  for (int rx = 0; rx < k; ++rx) {
    for (int band = 0; band < s; ++band) {
      double base = sigma2;
      for (int tx = 0; tx < k; ++tx) {
        if (tx == rx || tx == player) continue;
        base += gains.gain(tx, rx, band) * profile.power(tx, band);
      }
      std::size_t idx = static_cast<std::size_t>(rx * s + band);
      ws.base[idx] = base;
      ws.direct[idx] = gains.gain(rx, rx, band) * profile.power(rx, band);
      ws.cross[idx] = gains.gain(player, rx, band);
    }
  }
  for (int band = 0; band < s; ++band)
    ws.own_direct[static_cast<std::size_t>(band)] =
        gains.gain(player, player, band);
}

double candidate_rate(const BestResponseWorkspace& ws, int player, int k,
                      int s, std::span<const double> own_powers) {
  double rate = 0.0;
  for (int band = 0; band < s; ++band) {
    std::size_t own_idx = static_cast<std::size_t>(player * s + band);
    rate += std::log2(1.0 + ws.own_direct[static_cast<std::size_t>(band)] *
                                own_powers[static_cast<std::size_t>(band)] /
                                ws.base[own_idx]);
    for (int rx = 0; rx < k; ++rx) {
      if (rx == player) continue;
      std::size_t idx = static_cast<std::size_t>(rx * s + band);
      rate += std::log2(1.0 + ws.direct[idx] /
                                  (ws.base[idx] +
                                   ws.cross[idx] *
                                       own_powers[static_cast<std::size_t>(band)]));
    }
  }
  return rate;
}

// Enumerates all budget-feasible points of the per-band power grid and
// returns the best response. Tie-break: higher rate, then lower total power,
// then lexicographically smaller power vector.
struct BestCandidate {
  double rate = -std::numeric_limits<double>::infinity();
  double total = std::numeric_limits<double>::infinity();
  std::vector<double> powers;
};

void enumerate_grid(const BestResponseWorkspace& ws, int player, int k, int s,
                    double p_max, double step, int grid_points, int band,
                    double used, std::vector<double>& current,
                    BestCandidate& best) {
  if (band == s) {
    double rate = candidate_rate(ws, player, k, s, current);
    constexpr double kRateTol = 1e-12;
    if (rate > best.rate + kRateTol) {
      best.rate = rate;
      best.total = used;
      best.powers = current;
    } else if (rate > best.rate - kRateTol) {
      if (used < best.total - 1e-15 ||
          (std::abs(used - best.total) <= 1e-15 && current < best.powers)) {
        best.rate = std::max(best.rate, rate);
        best.total = used;
        best.powers = current;
      }
    }
    return;
  }
  for (int g = 0; g < grid_points; ++g) {
    double p = step * g;
    if (used + p > p_max * (1.0 + 1e-12)) break;
    current[static_cast<std::size_t>(band)] = p;
    enumerate_grid(ws, player, k, s, p_max, step, grid_points, band + 1,
                   used + p, current, best);
  }
  current[static_cast<std::size_t>(band)] = 0.0;
}

}  // namespace

BrdResult team_brd(const ChannelMatrix& gains, const NetworkConfig& config,
                   const BrdSettings& settings) {
  settings.validate();
  const int k = config.tx_count;
  const int s = config.band_count;
  if (gains.tx_count != k || gains.band_count != s)
    throw std::invalid_argument("channel matrix does not match config");

  BrdResult res;
  res.profile = PowerProfile(k, s);
  // Uniform start: p_i^s = P_max / S.
  for (int i = 0; i < k; ++i)
    for (int band = 0; band < s; ++band)
      res.profile.power(i, band) = config.p_max / s;

  const double tol = settings.effective_tol(config.p_max);
  const double step =
      config.p_max / static_cast<double>(settings.grid_points - 1);
  BestResponseWorkspace ws;
  std::vector<double> candidate(static_cast<std::size_t>(s), 0.0);

  for (int round = 0; round < settings.max_rounds; ++round) {
    double max_change = 0.0;
    for (int player = 0; player < k; ++player) {
      fill_workspace(ws, player, res.profile, gains, config.sigma2);
      // The incumbent allocation competes against the grid, so a player
      // only moves when the move improves the objective. This keeps the
      // dynamics monotone even from an off-grid starting profile.
      BestCandidate best;
      best.powers.resize(static_cast<std::size_t>(s));
      best.total = 0.0;
      for (int band = 0; band < s; ++band) {
        best.powers[static_cast<std::size_t>(band)] =
            res.profile.power(player, band);
        best.total += res.profile.power(player, band);
      }
      best.rate = candidate_rate(ws, player, k, s, best.powers);
      enumerate_grid(ws, player, k, s, config.p_max, step,
                     settings.grid_points, 0, 0.0, candidate, best);
      for (int band = 0; band < s; ++band) {
        double& p = res.profile.power(player, band);
        max_change =
            std::max(max_change,
                     std::abs(p - best.powers[static_cast<std::size_t>(band)]));
        p = best.powers[static_cast<std::size_t>(band)];
      }
      res.objective_trace.push_back(
          sum_rate(res.profile, gains, config.sigma2));
    }
    res.rounds = round + 1;
    if (max_change <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

BrdResult team_brd(const CsiEstimate& estimate, const NetworkConfig& config,
                   const BrdSettings& settings) {
  return team_brd(estimate.values, config, settings);
}

BrdResult distributed_team_brd(const std::vector<CsiEstimate>& estimates,
                               const NetworkConfig& config,
                               const BrdSettings& settings) {
  const int k = config.tx_count;
  if (static_cast<int>(estimates.size()) != k)
    throw std::invalid_argument("need one estimate per transmitter");
  BrdResult res;
  res.profile = PowerProfile(k, config.band_count);
  res.converged = true;
  for (int i = 0; i < k; ++i) {
    BrdResult own = team_brd(estimates[static_cast<std::size_t>(i)], config,
                             settings);
    for (int band = 0; band < config.band_count; ++band)
      res.profile.power(i, band) = own.profile.power(i, band);
    res.converged = res.converged && own.converged;
    res.rounds = std::max(res.rounds, own.rounds);
  }
  return res;
}

IwfaResult iwfa(const ChannelMatrix& truth, const NetworkConfig& config,
                const BrdSettings& settings) {
  settings.validate();
  const int k = config.tx_count;
  const int s = config.band_count;
  if (truth.tx_count != k || truth.band_count != s)
    throw std::invalid_argument("channel matrix does not match config");

  IwfaResult res;
  res.profile = PowerProfile(k, s);
  const double tol = settings.effective_tol(config.p_max);
  std::vector<double> direct(static_cast<std::size_t>(s));
  std::vector<double> noise(static_cast<std::size_t>(s));

  for (int round = 0; round < settings.max_rounds; ++round) {
    double max_change = 0.0;
    for (int i = 0; i < k; ++i) {
      for (int band = 0; band < s; ++band) {
        direct[static_cast<std::size_t>(band)] = truth.gain(i, i, band);
        double n = config.sigma2;
        for (int j = 0; j < k; ++j)
          if (j != i) n += truth.gain(j, i, band) * res.profile.power(j, band);
        noise[static_cast<std::size_t>(band)] = n;
      }
      WaterFillResult wf = water_fill(direct, noise, config.p_max);
      for (int band = 0; band < s; ++band) {
        double& p = res.profile.power(i, band);
        max_change = std::max(
            max_change, std::abs(p - wf.powers[static_cast<std::size_t>(band)]));
        p = wf.powers[static_cast<std::size_t>(band)];
      }
    }
    res.rounds = round + 1;
    if (max_change <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace cpmsim
