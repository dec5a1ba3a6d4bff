#include "cpmsim/rssi_feedback.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpmsim {

Quantizer Quantizer::for_snr(double snr_db, int n_bits) {
  if (n_bits < 1 || n_bits > 30)
    throw std::invalid_argument("quantizer n_bits out of range");
  return Quantizer{n_bits, snr_db - 20.0, snr_db + 10.0};
}

std::vector<double> Quantizer::levels_db() const {
  std::vector<double> levels(static_cast<std::size_t>(level_count()));
  double w = cell_width_db();
  for (int l = 0; l < level_count(); ++l)
    levels[static_cast<std::size_t>(l)] = lo_db + (l + 0.5) * w;
  return levels;
}

int Quantizer::quantize(double power) const {
  if (!(power > 0.0))
    throw std::invalid_argument("quantizer input must be positive");
  double db = 10.0 * std::log10(power);
  db = std::clamp(db, lo_db, hi_db);
  int cell = static_cast<int>((db - lo_db) / cell_width_db());
  return std::clamp(cell, 0, level_count() - 1);
}

double Quantizer::dequantize(int label) const {
  if (label < 0 || label >= level_count())
    throw std::out_of_range("quantizer label out of range");
  double mid_db = lo_db + (label + 0.5) * cell_width_db();
  return std::pow(10.0, mid_db / 10.0);
}

double rs_power(std::span<const double> gains_to_rx,
                std::span<const double> powers, double sigma2) {
  if (gains_to_rx.size() != powers.size())
    throw std::invalid_argument("rs_power: gain/power size mismatch");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
  double acc = sigma2;
  for (std::size_t j = 0; j < powers.size(); ++j)
    acc += gains_to_rx[j] * powers[j];
  return acc;
}

int corrupt_label(int label, int n_bits, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("epsilon must lie in [0, 1]");
  int count = 1 << n_bits;
  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    // Uniform over the other count-1 labels.
    int other = static_cast<int>(
        rng.uniform_int(static_cast<std::uint64_t>(count - 1)));
    return other >= label ? other + 1 : other;
  }
  return label;
}

FeedbackObservation observe(const Quantizer& q,
                            std::span<const double> gains_to_rx,
                            std::span<const double> powers, double sigma2,
                            double epsilon, Rng& rng, double reference_gain) {
  if (!(reference_gain > 0.0))
    throw std::invalid_argument("reference_gain must be positive");
  FeedbackObservation obs;
  obs.reference_gain = reference_gain;
  obs.true_power = rs_power(gains_to_rx, powers, sigma2);
  double normalized = (obs.true_power - sigma2) / reference_gain;
  obs.label_sent = normalized > 0.0 ? q.quantize(normalized) : 0;
  obs.label_received = corrupt_label(obs.label_sent, q.n_bits, epsilon, rng);
  obs.observed_power =
      reference_gain * q.dequantize(obs.label_received) + sigma2;
  obs.noise_total = obs.observed_power - obs.true_power;
  return obs;
}

FeedbackObservation observe_exact(std::span<const double> gains_to_rx,
                                  std::span<const double> powers,
                                  double sigma2) {
  FeedbackObservation obs;
  obs.true_power = rs_power(gains_to_rx, powers, sigma2);
  obs.observed_power = obs.true_power;
  obs.noise_total = 0.0;
  return obs;
}

}  // namespace cpmsim
