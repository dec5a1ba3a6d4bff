#include "cpmsim/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cpmsim {

NetworkConfig NetworkConfig::make(int tx_count, int band_count, double snr_db,
                                  double sir_db, int n_bits, double epsilon,
                                  double sigma2) {
  NetworkConfig cfg;
  cfg.tx_count = tx_count;
  cfg.band_count = band_count;
  cfg.snr_db = snr_db;
  cfg.sir_db = sir_db;
  cfg.n_bits = n_bits;
  cfg.epsilon = epsilon;
  cfg.sigma2 = sigma2;
  cfg.p_max = sigma2 * std::pow(10.0, snr_db / 10.0);
  cfg.validate();
  return cfg;
}

void NetworkConfig::validate() const {
  if (tx_count < 1) throw std::invalid_argument("tx_count must be >= 1");
  if (band_count < 1) throw std::invalid_argument("band_count must be >= 1");
  if (!(p_max > 0.0)) throw std::invalid_argument("p_max must be positive");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
  if (n_bits < 1) throw std::invalid_argument("n_bits must be >= 1");
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("epsilon must lie in [0, 1]");
  if (!std::isfinite(sir_db)) throw std::invalid_argument("sir_db not finite");
  if (!(gain_min_factor > 0.0) || !(gain_max_factor > gain_min_factor))
    throw std::invalid_argument("gain bound factors out of order");
  if (local_csi_noise_std < 0.0)
    throw std::invalid_argument("local_csi_noise_std must be >= 0");
  double implied = 10.0 * std::log10(p_max / sigma2);
  if (std::abs(implied - snr_db) > 1e-9)
    throw std::invalid_argument("snr_db inconsistent with p_max/sigma2: " +
                                std::to_string(implied) + " vs " +
                                std::to_string(snr_db));
}

ChannelMatrix::ChannelMatrix(int tx_count_, int band_count_)
    : tx_count(tx_count_),
      band_count(band_count_),
      gains(static_cast<std::size_t>(tx_count_) * tx_count_ * band_count_, 0.0),
      bounds(static_cast<std::size_t>(tx_count_) * tx_count_) {}

double ChannelMatrix::frob_sq() const {
  double acc = 0.0;
  for (double g : gains) acc += g * g;
  return acc;
}

LocalCsi::LocalCsi(int owner_, int tx_count_, int band_count_)
    : owner(owner_),
      tx_count(tx_count_),
      band_count(band_count_),
      gains(static_cast<std::size_t>(tx_count_) * band_count_, 0.0) {}

double mean_gain(int tx, int rx, double sir_db) {
  if (!std::isfinite(sir_db)) throw std::invalid_argument("sir_db not finite");
  return tx == rx ? 1.0 : std::pow(10.0, -sir_db / 10.0);
}

GainBounds gain_bounds(double mean, double min_factor, double max_factor) {
  if (!(mean > 0.0)) throw std::invalid_argument("mean gain must be positive");
  return GainBounds{min_factor * mean, max_factor * mean};
}

namespace {

double draw_bounded_exponential(double mean, const GainBounds& b, Rng& rng) {
  // Rejection keeps the density smooth inside the support; the mass outside
  // [min, max] is ~1.7% at mean 1, so redraws are rare.
  for (int attempt = 0; attempt < 100000; ++attempt) {
    double g = rng.exponential(mean);
    if (g >= b.min_gain && g <= b.max_gain) return g;
  }
  throw std::runtime_error("bounded exponential sampler failed to accept");
}

}  // namespace

ChannelMatrix sample_channel(const NetworkConfig& config, Rng& rng) {
  config.validate();
  const int k = config.tx_count;
  const int s = config.band_count;
  ChannelMatrix m(k, s);
  for (int tx = 0; tx < k; ++tx) {
    for (int rx = 0; rx < k; ++rx) {
      double mean = mean_gain(tx, rx, config.sir_db);
      GainBounds b =
          gain_bounds(mean, config.gain_min_factor, config.gain_max_factor);
      m.bound(tx, rx) = b;
      for (int band = 0; band < s; ++band)
        m.gain(tx, rx, band) = draw_bounded_exponential(mean, b, rng);
    }
  }
  return m;
}

std::vector<LocalCsi> perturb_local_csi(const ChannelMatrix& truth,
                                        const NetworkConfig& config, Rng& rng) {
  const int k = truth.tx_count;
  const int s = truth.band_count;
  std::vector<LocalCsi> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int rx = 0; rx < k; ++rx) {
    LocalCsi csi(rx, k, s);
    for (int tx = 0; tx < k; ++tx) {
      const GainBounds& b = truth.bound(tx, rx);
      for (int band = 0; band < s; ++band) {
        double g = truth.gain(tx, rx, band);
        if (config.local_csi_noise_std > 0.0) {
          g *= 1.0 + config.local_csi_noise_std * rng.normal();
          g = std::clamp(g, b.min_gain, b.max_gain);
        }
        csi.gain(tx, band) = g;
      }
    }
    out.push_back(std::move(csi));
  }
  return out;
}

}  // namespace cpmsim
