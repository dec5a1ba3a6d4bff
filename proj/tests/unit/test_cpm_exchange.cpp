#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "cpmsim/cpm_exchange.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace cpmsim;

namespace {

// Well-conditioned random row-stochastic matrix: identity shrunk toward a
// random stochastic matrix.
Eigen::MatrixXd random_row_stochastic(int k, Rng& rng, double blend = 0.3) {
  Eigen::MatrixXd r(k, k);
  for (int i = 0; i < k; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < k; ++j) {
      r(i, j) = 0.05 + rng.uniform();
      row_sum += r(i, j);
    }
    for (int j = 0; j < k; ++j) r(i, j) /= row_sum;
  }
  Eigen::MatrixXd a =
      (1.0 - blend) * Eigen::MatrixXd::Identity(k, k) + blend * r;
  return a;
}

}  // namespace

TEST_CASE("build_schedule assigns disjoint consecutive blocks") {
  ExplorationSchedule s1 = build_schedule(1);
  CHECK(s1.slot_count == 1);
  CHECK(s1.active_tx(0) == 0);

  ExplorationSchedule s3 = build_schedule(3);
  CHECK(s3.slot_count == 9);
  for (int slot = 0; slot < 3; ++slot) CHECK(s3.active_tx(slot) == 0);
  for (int slot = 3; slot < 6; ++slot) CHECK(s3.active_tx(slot) == 1);
  for (int slot = 6; slot < 9; ++slot) CHECK(s3.active_tx(slot) == 2);
  CHECK(s3.block_start(1) == 3);

  // Exactly one transmitter per slot and K consecutive slots per transmitter.
  for (int k : {2, 3, 4, 7}) {
    ExplorationSchedule s = build_schedule(k);
    CHECK(s.slot_count == k * k);
    std::vector<int> count(k, 0);
    for (int slot = 0; slot < s.slot_count; ++slot)
      count[s.active_tx(slot)]++;
    for (int tx = 0; tx < k; ++tx) {
      CHECK(count[tx] == k);
      CHECK(s.active_tx(s.block_start(tx)) == tx);
    }
  }
  CHECK_THROWS_AS(build_schedule(0), std::invalid_argument);
}

TEST_CASE("exchange overhead versus a K(K-1)-slot baseline") {
  // T = K^2 against K(K-1): +100%, +50%, +33.3% for K = 2, 3, 4.
  for (auto [k, expected] :
       {std::pair{2, 1.0}, std::pair{3, 0.5}, std::pair{4, 1.0 / 3.0}}) {
    ExplorationSchedule s = build_schedule(k);
    double baseline = static_cast<double>(k * (k - 1));
    double overhead = (s.slot_count - baseline) / baseline;
    CHECK(overhead == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("modulation matrix construction and validation") {
  const double p_max = 1000.0;
  std::vector<GainBounds> bounds{{0.01, 5.0}, {0.001, 0.5}};

  SUBCASE("identity map scales by P_max over the link max") {
    ModulationMatrix mod = ModulationMatrix::identity(0, bounds, p_max);
    CHECK(mod.power_map(0, 0) == doctest::Approx(p_max / 5.0));
    CHECK(mod.power_map(1, 1) == doctest::Approx(p_max / 0.5));
    CHECK(mod.power_map(0, 1) == 0.0);
  }

  SUBCASE("rows must be stochastic") {
    Eigen::MatrixXd bad(2, 2);
    bad << 0.5, 0.6, 0.5, 0.5;
    CHECK_THROWS_AS(ModulationMatrix::build(0, bad, bounds, p_max),
                    std::invalid_argument);
    bad << 1.2, -0.2, 0.5, 0.5;
    CHECK_THROWS_AS(ModulationMatrix::build(0, bad, bounds, p_max),
                    std::invalid_argument);
  }

  SUBCASE("singular or ill-conditioned maps are rejected") {
    Eigen::MatrixXd dup(2, 2);
    dup << 0.5, 0.5, 0.5, 0.5;  // identical rows
    CHECK_THROWS_AS(ModulationMatrix::build(0, dup, bounds, p_max),
                    std::invalid_argument);
    Eigen::MatrixXd near(2, 2);
    near << 0.5, 0.5, 0.5 + 1e-12, 0.5 - 1e-12;
    CHECK_THROWS_AS(ModulationMatrix::build(0, near, bounds, p_max),
                    std::invalid_argument);
  }
}

TEST_CASE("exploration_power peaks at P_max and floors at P_max/500") {
  const double p_max = 1000.0;
  std::vector<GainBounds> bounds{{0.01, 5.0}, {0.01, 5.0}};
  ModulationMatrix mod = ModulationMatrix::identity(0, bounds, p_max);

  LocalCsi peak(0, 2, 1);
  peak.gain(0, 0) = 5.0;
  peak.gain(1, 0) = 5.0;
  CHECK(exploration_power(mod, 0, peak, 0, p_max) == doctest::Approx(p_max));

  LocalCsi floor(0, 2, 1);
  floor.gain(0, 0) = 0.01;
  floor.gain(1, 0) = 0.01;
  CHECK(exploration_power(mod, 0, floor, 0, p_max) ==
        doctest::Approx(p_max / 500.0));

  // Near-uniform combination of peak gains still hits P_max on every slot.
  // (Exactly uniform rows would make the power map singular.)
  Eigen::MatrixXd uniform(2, 2);
  uniform << 0.5, 0.5, 0.5 - 1e-3, 0.5 + 1e-3;
  ModulationMatrix mixed = ModulationMatrix::build(0, uniform, bounds, p_max);
  CHECK(exploration_power(mixed, 0, peak, 0, p_max) == doctest::Approx(p_max));
  CHECK(exploration_power(mixed, 1, peak, 0, p_max) == doctest::Approx(p_max));

  CHECK_THROWS_AS(exploration_power(mod, 2, peak, 0, p_max),
                  std::invalid_argument);
  LocalCsi other(1, 2, 1);
  CHECK_THROWS_AS(exploration_power(mod, 0, other, 0, p_max),
                  std::invalid_argument);
}

TEST_CASE("estimate_remote_csi inverts an exact block") {
  const double p_max = 1000.0;
  const double sigma2 = 1.0;
  Rng rng(17);
  std::vector<GainBounds> bounds{{0.01, 5.0}, {0.001, 0.5}, {0.01, 5.0}};
  Eigen::MatrixXd a = random_row_stochastic(3, rng);
  ModulationMatrix mod = ModulationMatrix::build(1, a, bounds, p_max);

  std::vector<double> g_col{1.7, 0.23, 0.4};  // transmitter 1's local CSI
  double anchor = 0.31;                       // link 1 -> observer
  std::vector<FeedbackObservation> obs(3);
  for (int t = 0; t < 3; ++t) {
    double p = 0.0;
    for (int m = 0; m < 3; ++m) p += mod.power_map(t, m) * g_col[m];
    obs[t].true_power = anchor * p + sigma2;
    obs[t].observed_power = obs[t].true_power;
  }
  std::vector<double> est =
      estimate_remote_csi(obs, mod, anchor, sigma2, bounds);
  for (int m = 0; m < 3; ++m)
    CHECK(est[m] == doctest::Approx(g_col[m]).epsilon(1e-12));

  SUBCASE("deep-noise observation clamps at the lower bound") {
    obs[1].observed_power = 0.5;  // below the noise floor
    std::vector<double> clamped =
        estimate_remote_csi(obs, ModulationMatrix::identity(1, bounds, p_max),
                            anchor, sigma2, bounds);
    CHECK(clamped[1] == doctest::Approx(bounds[1].min_gain));
  }

  SUBCASE("nonpositive anchor is rejected") {
    CHECK_THROWS_AS(estimate_remote_csi(obs, mod, 0.0, sigma2, bounds),
                    std::invalid_argument);
  }
}

TEST_CASE("quantized estimate error stays within the cell budget") {
  // N=8, eps=0, SNR=30, K=2, SIR=10, A=I: the per-entry relative error is
  // bounded by the quantizer cell (~0.117 dB, i.e. <= ~2.7%).
  NetworkConfig cfg = NetworkConfig::make(2, 1, 30.0, 10.0, 8, 0.0);
  Rng rng(23);
  for (int rep = 0; rep < 200; ++rep) {
    ChannelMatrix truth = sample_channel(cfg, rng);
    auto local = perturb_local_csi(truth, cfg, rng);
    auto estimates = run_exchange(truth, local, cfg, rng);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        if (j == i) continue;
        for (int m = 0; m < 2; ++m) {
          double est = estimates[i].values.gain(m, j, 0);
          double ref = truth.gain(m, j, 0);
          CHECK(std::abs(est - ref) / ref < 0.027);
        }
      }
  }
}

TEST_CASE("run_exchange recovers the truth exactly without noise") {
  SUBCASE("identity combination") {
    NetworkConfig cfg = NetworkConfig::make(2, 1, 30.0, 10.0, 8, 0.01);
    Rng rng(31);
    ChannelMatrix truth = sample_channel(cfg, rng);
    auto local = perturb_local_csi(truth, cfg, rng);
    ExchangeOptions opts;
    opts.exact_feedback = true;
    auto estimates = run_exchange(truth, local, cfg, rng, opts);
    REQUIRE(estimates.size() == 2);
    for (const CsiEstimate& est : estimates)
      for (std::size_t idx = 0; idx < truth.gains.size(); ++idx)
        CHECK(std::abs(est.values.gains[idx] - truth.gains[idx]) /
                  truth.gains[idx] <
              1e-12);
  }

  SUBCASE("random row-stochastic combinations") {
    Rng rng(37);
    for (int rep = 0; rep < 50; ++rep) {
      int k = 2 + static_cast<int>(rng.uniform_int(3));
      NetworkConfig cfg = NetworkConfig::make(k, 2, 30.0, 10.0, 8, 0.01);
      ChannelMatrix truth = sample_channel(cfg, rng);
      auto local = perturb_local_csi(truth, cfg, rng);
      ExchangeOptions opts;
      opts.exact_feedback = true;
      for (int j = 0; j < k; ++j)
        opts.coeff_overrides.push_back(random_row_stochastic(k, rng));
      auto estimates = run_exchange(truth, local, cfg, rng, opts);
      for (const CsiEstimate& est : estimates)
        for (std::size_t idx = 0; idx < truth.gains.size(); ++idx)
          CHECK(std::abs(est.values.gains[idx] - truth.gains[idx]) /
                    truth.gains[idx] <
                1e-10);
    }
  }
}

TEST_CASE("run_exchange keeps the owner's column and the bounds") {
  NetworkConfig cfg = NetworkConfig::make(3, 2, 30.0, 10.0, 2, 0.3);
  Rng rng(41);
  ChannelMatrix truth = sample_channel(cfg, rng);
  auto local = perturb_local_csi(truth, cfg, rng);
  auto estimates = run_exchange(truth, local, cfg, rng);

  for (int i = 0; i < 3; ++i) {
    // Own column is the local CSI verbatim, untouched by exchange noise.
    for (int m = 0; m < 3; ++m)
      for (int s = 0; s < 2; ++s)
        CHECK(estimates[i].values.gain(m, i, s) == local[i].gain(m, s));
    // Every estimated entry lies inside the link support.
    for (int tx = 0; tx < 3; ++tx)
      for (int rx = 0; rx < 3; ++rx) {
        const GainBounds& b = truth.bound(tx, rx);
        for (int s = 0; s < 2; ++s) {
          double g = estimates[i].values.gain(tx, rx, s);
          CHECK(g >= b.min_gain);
          CHECK(g <= b.max_gain);
        }
      }
  }
}

TEST_CASE("run_exchange under noisy local CSI copies the noisy column") {
  NetworkConfig cfg = NetworkConfig::make(2, 1, 30.0, 10.0, 16, 0.0);
  cfg.local_csi_noise_std = 0.05;
  Rng rng(47);
  ChannelMatrix truth = sample_channel(cfg, rng);
  auto local = perturb_local_csi(truth, cfg, rng);
  auto estimates = run_exchange(truth, local, cfg, rng);
  for (int i = 0; i < 2; ++i) {
    // The owner's column is its (noisy) local view, not the truth.
    for (int m = 0; m < 2; ++m)
      CHECK(estimates[i].values.gain(m, i, 0) == local[i].gain(m, 0));
    // Remote columns are still recovered to within the local-CSI error
    // scale: the anchor mismatch perturbs multiplicatively.
    for (int m = 0; m < 2; ++m) {
      int j = 1 - i;
      double est = estimates[i].values.gain(m, j, 0);
      double ref = truth.gain(m, j, 0);
      CHECK(std::abs(est - ref) / ref < 0.5);
    }
  }
}

TEST_CASE("run_exchange is deterministic for a fixed seed") {
  NetworkConfig cfg = NetworkConfig::make(2, 2, 30.0, 10.0, 4, 0.05);
  Rng ra(55), rb(55);
  ChannelMatrix truth_a = sample_channel(cfg, ra);
  ChannelMatrix truth_b = sample_channel(cfg, rb);
  auto local_a = perturb_local_csi(truth_a, cfg, ra);
  auto local_b = perturb_local_csi(truth_b, cfg, rb);
  auto est_a = run_exchange(truth_a, local_a, cfg, ra);
  auto est_b = run_exchange(truth_b, local_b, cfg, rb);
  for (std::size_t i = 0; i < est_a.size(); ++i)
    CHECK(est_a[i].values.gains == est_b[i].values.gains);
}

TEST_CASE("exchange trace is line-delimited JSON with one active tx per slot") {
  NetworkConfig cfg = NetworkConfig::make(2, 2, 30.0, 10.0, 8, 0.01);
  Rng rng(60);
  ChannelMatrix truth = sample_channel(cfg, rng);
  auto local = perturb_local_csi(truth, cfg, rng);
  std::ostringstream trace;
  ExchangeOptions opts;
  opts.trace = &trace;
  opts.trace_trial = 3;
  run_exchange(truth, local, cfg, rng, opts);

  std::istringstream lines(trace.str());
  std::string line;
  int count = 0;
  ExplorationSchedule schedule = build_schedule(2);
  while (std::getline(lines, line)) {
    nlohmann::json rec = nlohmann::json::parse(line);
    CHECK(rec.at("trial").get<int>() == 3);
    int slot = rec.at("slot").get<int>();
    CHECK(rec.at("tx").get<int>() == schedule.active_tx(slot));
    double power = rec.at("power").get<double>();
    CHECK(power >= 0.0);
    CHECK(power <= cfg.p_max * (1.0 + 1e-12));
    CHECK(rec.at("rs_true").size() == 2);
    CHECK(rec.at("rs_observed").size() == 2);
    ++count;
  }
  CHECK(count == 2 * 4);  // bands x slots
}
