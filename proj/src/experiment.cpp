#include "cpmsim/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <thread>

namespace cpmsim {

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::cpm_brd: return "cpm_brd";
    case Scheme::perfect_brd: return "perfect_brd";
    case Scheme::iwfa: return "iwfa";
  }
  throw std::logic_error("unreachable scheme");
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "cpm_brd") return Scheme::cpm_brd;
  if (name == "perfect_brd") return Scheme::perfect_brd;
  if (name == "iwfa") return Scheme::iwfa;
  throw std::runtime_error("unknown scheme: " + name);
}

void Scenario::validate() const {
  network.validate();
  brd.validate();
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (schemes.empty()) throw std::invalid_argument("schemes must be nonempty");
  if (sweep.values.empty())
    throw std::invalid_argument("sweep values must be nonempty");
  for (double v : sweep.values)
    if (!std::isfinite(v))
      throw std::invalid_argument("sweep values must be finite");
  if (sweep.name != "sir_db" && sweep.name != "snr_db" &&
      sweep.name != "epsilon" && sweep.name != "n_bits")
    throw std::invalid_argument("unknown sweep parameter: " + sweep.name);
  if (frame_length < 1)
    throw std::invalid_argument("frame_length must be >= 1");
}

double error_frob_sq(const ChannelMatrix& truth, const CsiEstimate& estimate) {
  if (truth.tx_count != estimate.values.tx_count ||
      truth.band_count != estimate.values.band_count)
    throw std::invalid_argument("esnr: dimension mismatch");
  double acc = 0.0;
  for (std::size_t idx = 0; idx < truth.gains.size(); ++idx) {
    double d = truth.gains[idx] - estimate.values.gains[idx];
    acc += d * d;
  }
  return acc;
}

double esnr(const ChannelMatrix& truth, const CsiEstimate& estimate) {
  double num = truth.frob_sq();
  if (!(num > 0.0)) throw std::invalid_argument("esnr: zero-norm truth");
  double den = error_frob_sq(truth, estimate);
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

namespace {

NetworkConfig apply_sweep(NetworkConfig cfg, const std::string& name,
                          double value) {
  if (name == "sir_db") {
    cfg.sir_db = value;
  } else if (name == "snr_db") {
    cfg.snr_db = value;
    cfg.p_max = cfg.sigma2 * std::pow(10.0, value / 10.0);
  } else if (name == "epsilon") {
    cfg.epsilon = value;
  } else if (name == "n_bits") {
    double rounded = std::llround(value);
    if (std::abs(value - rounded) > 1e-9)
      throw std::invalid_argument("n_bits sweep values must be integral");
    cfg.n_bits = static_cast<int>(rounded);
  } else {
    throw std::invalid_argument("unknown sweep parameter: " + name);
  }
  cfg.validate();
  return cfg;
}

struct TrialData {
  bool ok = false;
  std::vector<double> rates;  // aligned with scenario.schemes
  double esnr_num = 0.0;      // ||G||^2, cpm scheme only
  std::vector<double> esnr_den;  // per transmitter, cpm scheme only
};

void run_one_trial(const Scenario& sc, const NetworkConfig& cfg, int trial,
                   TrialData& out, std::ostream* trace) {
  Rng rng(sc.seed + static_cast<std::uint64_t>(trial));
  ChannelMatrix truth = sample_channel(cfg, rng);
  std::vector<LocalCsi> local = perturb_local_csi(truth, cfg, rng);

  out.rates.assign(sc.schemes.size(), 0.0);
  const int frame = sc.frame_length;
  for (std::size_t si = 0; si < sc.schemes.size(); ++si) {
    double rate = 0.0;
    double discount = 1.0;
    switch (sc.schemes[si]) {
      case Scheme::cpm_brd: {
        ExchangeOptions opts;
        opts.trace = trace;
        opts.trace_trial = trial;
        std::vector<CsiEstimate> estimates =
            run_exchange(truth, local, cfg, rng, opts);
        BrdResult brd = distributed_team_brd(estimates, cfg, sc.brd);
        rate = sum_rate(brd.profile, truth, cfg.sigma2);
        out.esnr_num = truth.frob_sq();
        out.esnr_den.resize(static_cast<std::size_t>(cfg.tx_count));
        for (int i = 0; i < cfg.tx_count; ++i)
          out.esnr_den[static_cast<std::size_t>(i)] =
              error_frob_sq(truth, estimates[static_cast<std::size_t>(i)]);
        int overhead = cfg.tx_count * cfg.tx_count;
        discount = std::max(0.0, static_cast<double>(frame - overhead)) / frame;
        break;
      }
      case Scheme::perfect_brd: {
        BrdResult brd = team_brd(truth, cfg, sc.brd);
        rate = sum_rate(brd.profile, truth, cfg.sigma2);
        discount = 1.0;
        break;
      }
      case Scheme::iwfa: {
        IwfaResult res = iwfa(truth, cfg, sc.brd);
        rate = sum_rate(res.profile, truth, cfg.sigma2);
        // IWFA pays its convergence time: one slot per player update.
        int overhead = res.rounds * cfg.tx_count;
        discount = std::max(0.0, static_cast<double>(frame - overhead)) / frame;
        break;
      }
    }
    out.rates[si] = sc.discount_exploration ? rate * discount : rate;
  }
  out.ok = true;
}

// Jackknife standard error of the reported dB-domain ESNR statistic
// (ratio of summed numerator/denominator per transmitter, averaged over
// transmitters, in dB).
std::optional<double> esnr_jackknife_se(const std::vector<const TrialData*>& ok,
                                        int tx_count, double num_sum,
                                        const std::vector<double>& den_sum) {
  const std::size_t n = ok.size();
  if (n < 2) return std::nullopt;
  auto statistic = [&](double num, const double* den) {
    double mean_ratio = 0.0;
    for (int i = 0; i < tx_count; ++i) {
      if (!(den[i] > 0.0)) return std::numeric_limits<double>::infinity();
      mean_ratio += num / den[i];
    }
    mean_ratio /= tx_count;
    return 10.0 * std::log10(mean_ratio);
  };

  std::vector<double> loo(n);
  std::vector<double> den_loo(static_cast<std::size_t>(tx_count));
  double mean_loo = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    double num = num_sum - ok[t]->esnr_num;
    for (int i = 0; i < tx_count; ++i)
      den_loo[static_cast<std::size_t>(i)] =
          den_sum[static_cast<std::size_t>(i)] -
          ok[t]->esnr_den[static_cast<std::size_t>(i)];
    loo[t] = statistic(num, den_loo.data());
    if (!std::isfinite(loo[t])) return std::nullopt;
    mean_loo += loo[t];
  }
  mean_loo /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : loo) ss += (v - mean_loo) * (v - mean_loo);
  double var = ss * static_cast<double>(n - 1) / static_cast<double>(n);
  return std::sqrt(var);
}

std::vector<MetricsRecord> run_scenario_impl(const Scenario& scenario,
                                             int threads, std::ostream* trace,
                                             std::vector<TrialRateRow>* raw) {
  scenario.validate();
  if (threads <= 0)
    threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (trace) threads = 1;  // keep trace line order deterministic

  std::vector<MetricsRecord> records;
  long aborted_total = 0;
  long attempted_total = 0;

  for (double sweep_value : scenario.sweep.values) {
    NetworkConfig cfg =
        apply_sweep(scenario.network, scenario.sweep.name, sweep_value);
    std::vector<TrialData> trials(static_cast<std::size_t>(scenario.trials));

    auto worker = [&](int lo, int hi) {
      for (int t = lo; t < hi; ++t) {
        try {
          run_one_trial(scenario, cfg, t, trials[static_cast<std::size_t>(t)],
                        trace);
        } catch (const std::exception& e) {
          trials[static_cast<std::size_t>(t)].ok = false;
          std::cerr << "trial " << t << " aborted: " << e.what() << "\n";
        }
      }
    };
    if (threads == 1 || scenario.trials < 2 * threads) {
      worker(0, scenario.trials);
    } else {
      std::vector<std::thread> pool;
      int per = (scenario.trials + threads - 1) / threads;
      for (int w = 0; w < threads; ++w) {
        int lo = w * per;
        int hi = std::min(scenario.trials, lo + per);
        if (lo >= hi) break;
        pool.emplace_back(worker, lo, hi);
      }
      for (auto& th : pool) th.join();
    }

    std::vector<const TrialData*> ok;
    ok.reserve(trials.size());
    for (std::size_t t = 0; t < trials.size(); ++t) {
      if (!trials[t].ok) continue;
      ok.push_back(&trials[t]);
      if (raw)
        raw->push_back(TrialRateRow{sweep_value, static_cast<int>(t),
                                    trials[t].rates});
    }
    attempted_total += scenario.trials;
    aborted_total += scenario.trials - static_cast<long>(ok.size());
    if (ok.empty())
      throw std::runtime_error("all trials aborted at sweep value " +
                               std::to_string(sweep_value));

    const bool has_cpm =
        std::find(scenario.schemes.begin(), scenario.schemes.end(),
                  Scheme::cpm_brd) != scenario.schemes.end();
    double num_sum = 0.0;
    std::vector<double> den_sum(static_cast<std::size_t>(cfg.tx_count), 0.0);
    if (has_cpm) {
      for (const TrialData* t : ok) {
        num_sum += t->esnr_num;
        for (int i = 0; i < cfg.tx_count; ++i)
          den_sum[static_cast<std::size_t>(i)] +=
              t->esnr_den[static_cast<std::size_t>(i)];
      }
    }

    for (std::size_t si = 0; si < scenario.schemes.size(); ++si) {
      MetricsRecord rec;
      rec.sweep_value = sweep_value;
      rec.scheme =
          scheme_name(scenario.schemes[si]) + scenario.scheme_label_suffix;
      rec.trial_count = static_cast<long>(ok.size());

      double sum = 0.0;
      for (const TrialData* t : ok) sum += t->rates[si];
      double mean = sum / static_cast<double>(ok.size());
      double ss = 0.0;
      for (const TrialData* t : ok)
        ss += (t->rates[si] - mean) * (t->rates[si] - mean);
      rec.mean_sum_rate = mean;
      rec.se_rate =
          ok.size() > 1
              ? std::sqrt(ss / (static_cast<double>(ok.size()) *
                                static_cast<double>(ok.size() - 1)))
              : 0.0;

      if (scenario.schemes[si] == Scheme::cpm_brd) {
        double mean_ratio = 0.0;
        bool infinite = false;
        for (int i = 0; i < cfg.tx_count; ++i) {
          double den = den_sum[static_cast<std::size_t>(i)];
          if (den == 0.0) {
            infinite = true;
            break;
          }
          mean_ratio += num_sum / den;
        }
        if (infinite) {
          rec.esnr_db = std::numeric_limits<double>::infinity();
        } else {
          mean_ratio /= cfg.tx_count;
          rec.esnr_db = 10.0 * std::log10(mean_ratio);
          rec.se_esnr_db =
              esnr_jackknife_se(ok, cfg.tx_count, num_sum, den_sum);
        }
      }
      records.push_back(std::move(rec));
    }
  }

  if (aborted_total * 100 > attempted_total)
    throw std::runtime_error("more than 1% of trials aborted (" +
                             std::to_string(aborted_total) + "/" +
                             std::to_string(attempted_total) + ")");
  return records;
}

}  // namespace

std::vector<MetricsRecord> run_scenario(const Scenario& scenario, int threads,
                                        std::vector<TrialRateRow>* raw_rates) {
  return run_scenario_impl(scenario, threads, nullptr, raw_rates);
}

std::vector<MetricsRecord> run_scenario_traced(const Scenario& scenario,
                                               std::ostream& trace) {
  return run_scenario_impl(scenario, 1, &trace, nullptr);
}

namespace {

// Fixed 6-decimal formatting, independent of the process locale.
std::string format_fixed(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 6);
  if (res.ec != std::errc())
    throw std::runtime_error("number formatting failed");
  return std::string(buf, res.ptr);
}

constexpr double kEsnrDbCap = 300.0;

}  // namespace

std::string to_csv(const std::vector<MetricsRecord>& records) {
  if (records.empty())
    throw std::invalid_argument("emit_csv: no records");
  std::vector<const MetricsRecord*> sorted;
  sorted.reserve(records.size());
  for (const MetricsRecord& r : records) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const MetricsRecord* a, const MetricsRecord* b) {
                     if (a->sweep_value != b->sweep_value)
                       return a->sweep_value < b->sweep_value;
                     return a->scheme < b->scheme;
                   });

  std::string out = "sweep,scheme,esnr_db,sum_rate,trials,se_esnr,se_rate\n";
  for (const MetricsRecord* r : sorted) {
    out += format_fixed(r->sweep_value);
    out += ',';
    out += r->scheme;
    out += ',';
    if (r->esnr_db) out += format_fixed(std::min(*r->esnr_db, kEsnrDbCap));
    out += ',';
    out += format_fixed(r->mean_sum_rate);
    out += ',';
    out += std::to_string(r->trial_count);
    out += ',';
    if (r->se_esnr_db) out += format_fixed(*r->se_esnr_db);
    out += ',';
    out += format_fixed(r->se_rate);
    out += '\n';
  }
  return out;
}

void emit_csv(const std::vector<MetricsRecord>& records,
              const std::string& path) {
  std::string body = to_csv(records);  // validate before touching the file
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << body;
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace cpmsim
