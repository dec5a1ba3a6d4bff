#include "cpmsim/cpm_exchange.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace cpmsim {

namespace {

constexpr double kMaxConditionNumber = 1e8;
constexpr double kRowSumTol = 1e-9;

double condition_number(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  double smin = svd.singularValues().minCoeff();
  double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

}  // namespace

ExplorationSchedule build_schedule(int tx_count) {
  if (tx_count < 1) throw std::invalid_argument("tx_count must be >= 1");
  return ExplorationSchedule{tx_count, tx_count * tx_count};
}

ModulationMatrix ModulationMatrix::build(
    int owner, const Eigen::MatrixXd& coeffs,
    std::span<const GainBounds> bounds_into_owner, double p_max) {
  const auto k = coeffs.rows();
  if (coeffs.cols() != k || k < 1)
    throw std::invalid_argument("combination matrix must be square");
  if (static_cast<std::size_t>(k) != bounds_into_owner.size())
    throw std::invalid_argument("bounds size mismatch");
  for (Eigen::Index t = 0; t < k; ++t) {
    double row_sum = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
      if (coeffs(t, c) < 0.0)
        throw std::invalid_argument("combination weights must be nonnegative");
      row_sum += coeffs(t, c);
    }
    if (std::abs(row_sum - 1.0) > kRowSumTol)
      throw std::invalid_argument("combination matrix rows must sum to 1");
  }

  ModulationMatrix mod;
  mod.owner = owner;
  mod.coeffs = coeffs;
  mod.power_map.resize(k, k);
  for (Eigen::Index t = 0; t < k; ++t)
    for (Eigen::Index c = 0; c < k; ++c) {
      double g_max = bounds_into_owner[static_cast<std::size_t>(c)].max_gain;
      if (!(g_max > 0.0))
        throw std::invalid_argument("link max gain must be positive");
      mod.power_map(t, c) = p_max * coeffs(t, c) / g_max;
    }

  double cond = condition_number(mod.power_map);
  if (!(cond < kMaxConditionNumber))
    throw std::invalid_argument(
        "power matrix is singular or too ill-conditioned (cond=" +
        std::to_string(cond) + ")");
  mod.solver.compute(mod.power_map);
  return mod;
}

ModulationMatrix ModulationMatrix::identity(
    int owner, std::span<const GainBounds> bounds_into_owner, double p_max) {
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(
      static_cast<Eigen::Index>(bounds_into_owner.size()),
      static_cast<Eigen::Index>(bounds_into_owner.size()));
  return build(owner, eye, bounds_into_owner, p_max);
}

double exploration_power(const ModulationMatrix& mod, int slot_in_block,
                         const LocalCsi& local, int band, double p_max) {
  const int k = static_cast<int>(mod.power_map.rows());
  if (slot_in_block < 0 || slot_in_block >= k)
    throw std::invalid_argument("slot outside of the owner's block");
  if (local.owner != mod.owner)
    throw std::invalid_argument("local CSI does not belong to the modulator");
  double p = 0.0;
  for (int m = 0; m < k; ++m)
    p += mod.power_map(slot_in_block, m) * local.gain(m, band);
  if (p > p_max * (1.0 + 1e-9))
    throw std::logic_error("exploration power exceeds P_max");
  return std::min(p, p_max);
}

std::vector<double> estimate_remote_csi(
    std::span<const FeedbackObservation> observations,
    const ModulationMatrix& mod, double anchor_gain, double sigma2,
    std::span<const GainBounds> bounds_into_owner) {
  const int k = static_cast<int>(mod.power_map.rows());
  if (observations.size() != static_cast<std::size_t>(k))
    throw std::invalid_argument("need exactly K observations per block");
  if (bounds_into_owner.size() != static_cast<std::size_t>(k))
    throw std::invalid_argument("bounds size mismatch");
  if (!(anchor_gain > 0.0))
    throw std::invalid_argument("anchor gain must be positive");

  Eigen::VectorXd rhs(k);
  for (int t = 0; t < k; ++t)
    rhs(t) = observations[static_cast<std::size_t>(t)].observed_power - sigma2;
  Eigen::VectorXd x = mod.solver.solve(rhs);

  std::vector<double> estimate(static_cast<std::size_t>(k));
  for (int m = 0; m < k; ++m) {
    const GainBounds& b = bounds_into_owner[static_cast<std::size_t>(m)];
    estimate[static_cast<std::size_t>(m)] =
        std::clamp(x(m) / anchor_gain, b.min_gain, b.max_gain);
  }
  return estimate;
}

namespace {

void trace_slot(std::ostream& os, int trial, int band, int slot, int tx,
                double power, std::span<const double> true_rs,
                std::span<const double> observed_rs) {
  os << "{\"trial\":" << trial << ",\"band\":" << band << ",\"slot\":" << slot
     << ",\"tx\":" << tx << ",\"power\":" << power << ",\"rs_true\":[";
  for (std::size_t i = 0; i < true_rs.size(); ++i)
    os << (i ? "," : "") << true_rs[i];
  os << "],\"rs_observed\":[";
  for (std::size_t i = 0; i < observed_rs.size(); ++i)
    os << (i ? "," : "") << observed_rs[i];
  os << "]}\n";
}

}  // namespace

std::vector<CsiEstimate> run_exchange(const ChannelMatrix& truth,
                                      const std::vector<LocalCsi>& local,
                                      const NetworkConfig& config, Rng& rng,
                                      const ExchangeOptions& options) {
  const int k = truth.tx_count;
  const int s = truth.band_count;
  if (static_cast<int>(local.size()) != k)
    throw std::invalid_argument("need one LocalCsi per transmitter");
  if (!options.coeff_overrides.empty() &&
      static_cast<int>(options.coeff_overrides.size()) != k)
    throw std::invalid_argument("need one combination matrix per transmitter");

  const ExplorationSchedule schedule = build_schedule(k);
  const Quantizer q = Quantizer::for_snr(config.snr_db, config.n_bits);

  // Per-transmitter modulation maps; bounds are band-independent so one map
  // serves all bands.
  std::vector<ModulationMatrix> mods;
  mods.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    std::vector<GainBounds> into_j(static_cast<std::size_t>(k));
    for (int m = 0; m < k; ++m)
      into_j[static_cast<std::size_t>(m)] = truth.bound(m, j);
    if (options.coeff_overrides.empty())
      mods.push_back(ModulationMatrix::identity(j, into_j, config.p_max));
    else
      mods.push_back(ModulationMatrix::build(
          j, options.coeff_overrides[static_cast<std::size_t>(j)], into_j,
          config.p_max));
  }

  // observations[rx][(band*K + block_owner)*K + slot_in_block]
  std::vector<std::vector<FeedbackObservation>> observations(
      static_cast<std::size_t>(k),
      std::vector<FeedbackObservation>(
          static_cast<std::size_t>(s) * k * k));
  auto obs_index = [k](int band, int block_owner, int slot_in_block) {
    return static_cast<std::size_t>((band * k + block_owner) * k +
                                    slot_in_block);
  };

  std::vector<double> powers(static_cast<std::size_t>(k));
  std::vector<double> gains_to_rx(static_cast<std::size_t>(k));
  std::vector<double> rs_true(static_cast<std::size_t>(k));
  std::vector<double> rs_obs(static_cast<std::size_t>(k));

  for (int band = 0; band < s; ++band) {
    for (int slot = 0; slot < schedule.slot_count; ++slot) {
      const int j = schedule.active_tx(slot);
      const int slot_in_block = slot - schedule.block_start(j);
      std::fill(powers.begin(), powers.end(), 0.0);
      powers[static_cast<std::size_t>(j)] =
          exploration_power(mods[static_cast<std::size_t>(j)], slot_in_block,
                            local[static_cast<std::size_t>(j)], band,
                            config.p_max);

      for (int rx = 0; rx < k; ++rx) {
        for (int tx = 0; tx < k; ++tx)
          gains_to_rx[static_cast<std::size_t>(tx)] = truth.gain(tx, rx, band);
        // The receiver normalizes the feedback by its own estimate of the
        // active link's gain over the universal bound factor. The quantizer
        // input is then P_max * (modulated gain / its mean), which spans
        // [SNR-20, SNR+7] dB and sits inside the window for every slot; the
        // decoding anchor cancels the link gain exactly.
        double reference = local[static_cast<std::size_t>(rx)].gain(j, band) /
                           config.gain_max_factor;
        FeedbackObservation o =
            options.exact_feedback
                ? observe_exact(gains_to_rx, powers, config.sigma2)
                : observe(q, gains_to_rx, powers, config.sigma2,
                          config.epsilon, rng, reference);
        observations[static_cast<std::size_t>(rx)]
                    [obs_index(band, j, slot_in_block)] = o;
        rs_true[static_cast<std::size_t>(rx)] = o.true_power;
        rs_obs[static_cast<std::size_t>(rx)] = o.observed_power;
      }
      if (options.trace)
        trace_slot(*options.trace, options.trace_trial, band, slot, j,
                   powers[static_cast<std::size_t>(j)], rs_true, rs_obs);
    }
  }

  std::vector<CsiEstimate> estimates;
  estimates.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    CsiEstimate est;
    est.owner = i;
    est.values = ChannelMatrix(k, s);
    est.values.bounds = truth.bounds;
    for (int band = 0; band < s; ++band) {
      for (int j = 0; j < k; ++j) {
        if (j == i) {
          // Own column: local CSI verbatim, untouched by exchange noise.
          for (int m = 0; m < k; ++m)
            est.values.gain(m, i, band) =
                local[static_cast<std::size_t>(i)].gain(m, band);
          continue;
        }
        std::vector<GainBounds> into_j(static_cast<std::size_t>(k));
        for (int m = 0; m < k; ++m)
          into_j[static_cast<std::size_t>(m)] = truth.bound(m, j);
        double anchor = local[static_cast<std::size_t>(i)].gain(j, band);
        std::span<const FeedbackObservation> block(
            observations[static_cast<std::size_t>(i)].data() +
                obs_index(band, j, 0),
            static_cast<std::size_t>(k));
        std::vector<double> col = estimate_remote_csi(
            block, mods[static_cast<std::size_t>(j)], anchor, config.sigma2,
            into_j);
        for (int m = 0; m < k; ++m)
          est.values.gain(m, j, band) = col[static_cast<std::size_t>(m)];
      }
    }
    estimates.push_back(std::move(est));
  }
  return estimates;
}

}  // namespace cpmsim
