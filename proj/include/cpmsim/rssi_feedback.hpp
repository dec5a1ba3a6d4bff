#pragma once

#include <span>
#include <vector>

#include "cpmsim/rng.hpp"

namespace cpmsim {

// Uniform dB-scale quantizer over [snr_db - 20, snr_db + 10] (a 30 dB
// window) with 2^n_bits cells; reconstruction at cell midpoints. Inputs are
// absolute received powers normalized so that sigma2 = 1 maps to 0 dB.
struct Quantizer {
  int n_bits = 8;
  double lo_db = 10.0;
  double hi_db = 40.0;

  static Quantizer for_snr(double snr_db, int n_bits);

  int level_count() const { return 1 << n_bits; }
  double cell_width_db() const {
    return (hi_db - lo_db) / static_cast<double>(level_count());
  }
  // Reconstruction points in dB, strictly increasing.
  std::vector<double> levels_db() const;

  // Label of the cell containing 10*log10(power), clamped to the range
  // edges. Throws on power <= 0.
  int quantize(double power) const;

  // Linear-scale midpoint of the labelled cell. Throws on a label outside
  // [0, 2^n_bits).
  double dequantize(int label) const;
};

// One quantized-and-fed-back RS power measurement. label_sent == -1 marks a
// diagnostic observation that bypassed the quantizer (observed == true).
struct FeedbackObservation {
  double true_power = 0.0;
  int label_sent = -1;
  int label_received = -1;
  double observed_power = 0.0;
  double noise_total = 0.0;      // observed - true
  double reference_gain = 1.0;   // link normalization used by the quantizer
};

// Total received power: sum_j gains_to_rx[j] * powers[j] + sigma2.
// Throws on a size mismatch.
double rs_power(std::span<const double> gains_to_rx,
                std::span<const double> powers, double sigma2);

// With probability 1-epsilon returns the label unchanged; otherwise a label
// drawn uniformly from the other 2^n_bits - 1 values.
int corrupt_label(int label, int n_bits, double epsilon, Rng& rng);

// rs_power -> quantize -> corrupt_label -> dequantize.
//
// The quantizer input is the noise-stripped RS power scaled by the observed
// link's mean gain: (omega - sigma2)/reference_gain; the reconstruction
// applies the inverse map. Receivers know sigma2 and the large-scale
// statistics of their links (the protocol already relies on the per-link
// max gains being network-wide knowledge), and this normalization keeps the
// informative part of every measurement inside the fixed quantizer window
// regardless of the cross-link attenuation. reference_gain = 1 gives the
// plain absolute-dB chain. A nonpositive normalized input maps to label 0.
FeedbackObservation observe(const Quantizer& q,
                            std::span<const double> gains_to_rx,
                            std::span<const double> powers, double sigma2,
                            double epsilon, Rng& rng,
                            double reference_gain = 1.0);

// Feedback-free observation: the receiver's exact RS power (diagnostic
// path used to isolate quantization/feedback effects).
FeedbackObservation observe_exact(std::span<const double> gains_to_rx,
                                  std::span<const double> powers,
                                  double sigma2);

}  // namespace cpmsim
