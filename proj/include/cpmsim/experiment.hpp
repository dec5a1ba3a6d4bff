#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cpmsim/channel_model.hpp"
#include "cpmsim/cpm_exchange.hpp"
#include "cpmsim/power_control.hpp"

namespace cpmsim {

enum class Scheme { cpm_brd, perfect_brd, iwfa };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);  // throws on unknown name

struct SweepSpec {
  std::string name;            // one of: sir_db, snr_db, epsilon, n_bits
  std::vector<double> values;  // n_bits values must be integral
};

struct Scenario {
  NetworkConfig network;
  SweepSpec sweep;
  std::vector<Scheme> schemes;
  int trials = 1;
  std::uint64_t seed = 1;
  int frame_length = 1000;            // slots per frame, for discounting
  bool discount_exploration = false;  // scale rates by (frame - T)/frame
  BrdSettings brd;
  // Appended to every scheme name in the emitted records (used to merge
  // several feedback settings into one CSV).
  std::string scheme_label_suffix;

  void validate() const;  // throws on invalid fields
};

struct MetricsRecord {
  double sweep_value = 0.0;
  std::string scheme;
  std::optional<double> esnr_db;     // exchange schemes only; capped on output
  std::optional<double> se_esnr_db;  // jackknife standard error, dB
  double mean_sum_rate = 0.0;        // bits per channel use
  double se_rate = 0.0;
  long trial_count = 0;
};

// Squared Frobenius norm of (truth - estimate) over links and bands.
double error_frob_sq(const ChannelMatrix& truth, const CsiEstimate& estimate);

// Per-trial estimation SNR ||G||_F^2 / ||G - Ghat||_F^2 (linear ratio;
// +inf for an exact estimate). Throws on a zero-norm truth.
double esnr(const ChannelMatrix& truth, const CsiEstimate& estimate);

// Per-trial sum-rates of every scheme (aligned with Scenario::schemes),
// for paired comparisons across schemes sharing a channel realization.
struct TrialRateRow {
  double sweep_value = 0.0;
  int trial = 0;
  std::vector<double> rates;
};

// Monte-Carlo driver: for each sweep value, runs `trials` independent
// channel draws (per-trial seed = base seed + trial index), executes every
// scheme on the shared realization and aggregates metrics. ESNR aggregation
// is the ratio of trial-averaged numerator and denominator, per transmitter,
// then averaged over transmitters. Throws if more than 1% of trials abort.
std::vector<MetricsRecord> run_scenario(const Scenario& scenario,
                                        int threads = 0,
                                        std::vector<TrialRateRow>* raw_rates =
                                            nullptr);

// Like run_scenario, but streams an exchange trace (one JSON line per band
// and slot) to `trace`; forces single-threaded execution.
std::vector<MetricsRecord> run_scenario_traced(const Scenario& scenario,
                                               std::ostream& trace);

// Serializes records as CSV with header
// sweep,scheme,esnr_db,sum_rate,trials,se_esnr,se_rate
// Fixed 6-decimal, locale-independent formatting; rows ordered by sweep
// value then scheme name; esnr_db capped at 300; empty fields where a
// metric does not apply. Throws on empty input or I/O failure.
void emit_csv(const std::vector<MetricsRecord>& records,
              const std::string& path);
std::string to_csv(const std::vector<MetricsRecord>& records);

}  // namespace cpmsim
