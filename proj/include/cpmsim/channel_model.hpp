#pragma once

#include <utility>
#include <vector>

#include "cpmsim/rng.hpp"

namespace cpmsim {

// Static parameters of the K-pair interference network.
//
// p_max and snr_db are stored redundantly and must agree:
// snr_db = 10*log10(p_max / sigma2) to within 1e-9 dB. Use make() to build
// a consistent config from the dB-domain quantities.
struct NetworkConfig {
  int tx_count = 2;   // K transmitter-receiver pairs
  int band_count = 1; // S orthogonal bands
  double p_max = 1000.0;
  double sigma2 = 1.0;
  double snr_db = 30.0;
  double sir_db = 10.0;          // mean direct-to-cross gain ratio, dB
  int n_bits = 8;                // RSSI quantizer resolution
  double epsilon = 0.01;         // feedback label error probability
  double gain_min_factor = 0.01; // g_min = factor * mean gain
  double gain_max_factor = 5.0;  // g_max = factor * mean gain
  double local_csi_noise_std = 0.0; // relative perturbation of local CSI

  static NetworkConfig make(int tx_count, int band_count, double snr_db,
                            double sir_db, int n_bits, double epsilon,
                            double sigma2 = 1.0);

  // Throws std::invalid_argument on any violated invariant.
  void validate() const;
};

struct GainBounds {
  double min_gain = 0.0;
  double max_gain = 0.0;
};

// True channel gains g_{ji}^s for all (transmitter j, receiver i, band s),
// plus the per-link support bounds shared by all bands.
struct ChannelMatrix {
  int tx_count = 0;
  int band_count = 0;
  std::vector<double> gains;       // (tx*K + rx)*S + band
  std::vector<GainBounds> bounds;  // tx*K + rx

  ChannelMatrix() = default;
  ChannelMatrix(int tx_count, int band_count);

  double gain(int tx, int rx, int band) const {
    return gains[static_cast<std::size_t>((tx * tx_count + rx) * band_count + band)];
  }
  double& gain(int tx, int rx, int band) {
    return gains[static_cast<std::size_t>((tx * tx_count + rx) * band_count + band)];
  }
  const GainBounds& bound(int tx, int rx) const {
    return bounds[static_cast<std::size_t>(tx * tx_count + rx)];
  }
  GainBounds& bound(int tx, int rx) {
    return bounds[static_cast<std::size_t>(tx * tx_count + rx)];
  }

  // Sum of squared entries over all links and bands (Frobenius norm of the
  // band-concatenated matrix, squared).
  double frob_sq() const;
};

// One transmitter's estimate of the gains into its own receiver:
// entry (j, s) = estimate of g_{ji}^s with i = owner.
struct LocalCsi {
  int owner = 0;
  int tx_count = 0;
  int band_count = 0;
  std::vector<double> gains;  // tx*S + band

  LocalCsi() = default;
  LocalCsi(int owner, int tx_count, int band_count);

  double gain(int tx, int band) const {
    return gains[static_cast<std::size_t>(tx * band_count + band)];
  }
  double& gain(int tx, int band) {
    return gains[static_cast<std::size_t>(tx * band_count + band)];
  }
};

// Mean gain of link (tx -> rx): 1 on direct links, 10^(-sir_db/10) on
// cross links.
double mean_gain(int tx, int rx, double sir_db);

// Support interval [0.01*mean, 5*mean] (with the default factors); the
// dynamics max/min is 500, i.e. just below 27 dB. Throws on mean <= 0.
GainBounds gain_bounds(double mean, double min_factor = 0.01,
                       double max_factor = 5.0);

// Draws every link/band gain from an exponential law with the link's mean,
// redrawing until the sample falls inside [g_min, g_max]. Deterministic for
// a fixed (config, rng-seed) pair.
ChannelMatrix sample_channel(const NetworkConfig& config, Rng& rng);

// Local CSI per transmitter. With local_csi_noise_std == 0 the entries are
// copied from the truth verbatim and the rng is not consumed; otherwise each
// entry is scaled by (1 + delta), delta ~ N(0, std), then clamped back into
// the link bounds.
std::vector<LocalCsi> perturb_local_csi(const ChannelMatrix& truth,
                                        const NetworkConfig& config, Rng& rng);

}  // namespace cpmsim
