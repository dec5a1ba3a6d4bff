#include <cmath>
#include <stdexcept>

#include "cpmsim/channel_model.hpp"
#include "doctest.h"

using namespace cpmsim;

namespace {

// Mean of the exponential density with the given mean restricted to [a, b],
// by composite Simpson quadrature. Independent of the sampler.
double truncated_exp_mean_quadrature(double mean, double a, double b) {
  const int n = 4096;  // even
  double h = (b - a) / n;
  auto f = [&](double x) { return std::exp(-x / mean) / mean; };
  double mass = 0.0, moment = 0.0;
  for (int i = 0; i <= n; ++i) {
    double x = a + i * h;
    double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    mass += w * f(x);
    moment += w * x * f(x);
  }
  return moment / mass;
}

}  // namespace

TEST_CASE("mean_gain direct and cross links") {
  CHECK(mean_gain(0, 0, 10.0) == doctest::Approx(1.0));
  CHECK(mean_gain(0, 1, 0.0) == doctest::Approx(1.0));
  CHECK(mean_gain(0, 1, 10.0) == doctest::Approx(0.1));
  CHECK_THROWS_AS(mean_gain(0, 1, std::nan("")), std::invalid_argument);
}

TEST_CASE("mean_gain is symmetric in the link direction") {
  for (double sir : {-5.0, 0.0, 3.0, 10.0, 20.0}) {
    CHECK(mean_gain(0, 1, sir) == mean_gain(1, 0, sir));
    CHECK(mean_gain(2, 3, sir) == mean_gain(3, 2, sir));
  }
}

TEST_CASE("gain_bounds scales with the mean and keeps 27 dB dynamics") {
  GainBounds b = gain_bounds(1.0);
  CHECK(b.min_gain == doctest::Approx(0.01));
  CHECK(b.max_gain == doctest::Approx(5.0));

  GainBounds c = gain_bounds(0.1);
  CHECK(c.min_gain == doctest::Approx(0.001));
  CHECK(c.max_gain == doctest::Approx(0.5));

  for (double mean : {0.001, 0.01, 0.1, 1.0, 42.0}) {
    GainBounds g = gain_bounds(mean);
    CHECK(g.max_gain / g.min_gain == doctest::Approx(500.0).epsilon(1e-12));
    double db = 10.0 * std::log10(g.max_gain / g.min_gain);
    CHECK(db == doctest::Approx(26.9897).epsilon(1e-5));
  }
  CHECK_THROWS_AS(gain_bounds(0.0), std::invalid_argument);
  CHECK_THROWS_AS(gain_bounds(-1.0), std::invalid_argument);
}

TEST_CASE("sample_channel stays inside the per-link bounds") {
  NetworkConfig cfg = NetworkConfig::make(2, 2, 30.0, 10.0, 8, 0.01);
  Rng rng(42);
  int checked = 0;
  for (int trial = 0; trial < 1250; ++trial) {
    ChannelMatrix m = sample_channel(cfg, rng);
    for (int tx = 0; tx < 2; ++tx)
      for (int rx = 0; rx < 2; ++rx) {
        const GainBounds& b = m.bound(tx, rx);
        for (int s = 0; s < 2; ++s) {
          double g = m.gain(tx, rx, s);
          CHECK(g >= b.min_gain);
          CHECK(g <= b.max_gain);
          ++checked;
        }
      }
  }
  CHECK(checked == 10000);
}

TEST_CASE("sample_channel is deterministic for a fixed seed") {
  NetworkConfig cfg = NetworkConfig::make(3, 2, 30.0, 10.0, 8, 0.01);
  Rng a(123), b(123);
  ChannelMatrix ma = sample_channel(cfg, a);
  ChannelMatrix mb = sample_channel(cfg, b);
  CHECK(ma.gains == mb.gains);
}

TEST_CASE("sample_channel empirical mean matches the truncated density") {
  NetworkConfig cfg = NetworkConfig::make(1, 1, 30.0, 10.0, 8, 0.01);
  Rng rng(7);
  double acc = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) acc += sample_channel(cfg, rng).gain(0, 0, 0);
  double empirical = acc / n;
  double expected = truncated_exp_mean_quadrature(1.0, 0.01, 5.0);
  CHECK(std::abs(empirical - expected) / expected < 0.02);
}

TEST_CASE("perturb_local_csi with zero noise copies the truth exactly") {
  NetworkConfig cfg = NetworkConfig::make(3, 2, 30.0, 10.0, 8, 0.01);
  Rng rng(5);
  ChannelMatrix truth = sample_channel(cfg, rng);

  Rng r1(11), r2(999);
  auto csi1 = perturb_local_csi(truth, cfg, r1);
  auto csi2 = perturb_local_csi(truth, cfg, r2);
  REQUIRE(csi1.size() == 3);
  for (int rx = 0; rx < 3; ++rx) {
    CHECK(csi1[rx].owner == rx);
    CHECK(csi1[rx].gains == csi2[rx].gains);  // seed-independent
    for (int tx = 0; tx < 3; ++tx)
      for (int s = 0; s < 2; ++s)
        CHECK(csi1[rx].gain(tx, s) == truth.gain(tx, rx, s));
  }
}

TEST_CASE("perturb_local_csi relative deviation matches the half-normal mean") {
  NetworkConfig cfg = NetworkConfig::make(4, 2, 30.0, 10.0, 8, 0.01);
  cfg.local_csi_noise_std = 0.05;
  Rng rng(21);
  double dev = 0.0;
  long count = 0;
  for (int trial = 0; trial < 3125; ++trial) {
    ChannelMatrix truth = sample_channel(cfg, rng);
    auto csi = perturb_local_csi(truth, cfg, rng);
    for (int rx = 0; rx < 4; ++rx)
      for (int tx = 0; tx < 4; ++tx)
        for (int s = 0; s < 2; ++s) {
          double g = truth.gain(tx, rx, s);
          dev += std::abs(csi[rx].gain(tx, s) - g) / g;
          ++count;
          const GainBounds& b = truth.bound(tx, rx);
          CHECK(csi[rx].gain(tx, s) >= b.min_gain);
          CHECK(csi[rx].gain(tx, s) <= b.max_gain);
        }
  }
  CHECK(count == 100000);
  double half_normal_mean = 0.05 * std::sqrt(2.0 / M_PI);  // ~0.03989
  CHECK(std::abs(dev / count - half_normal_mean) < 0.002);
}

TEST_CASE("NetworkConfig validation") {
  NetworkConfig cfg = NetworkConfig::make(2, 1, 30.0, 10.0, 8, 0.01);
  CHECK(cfg.p_max == doctest::Approx(1000.0));
  CHECK_NOTHROW(cfg.validate());

  NetworkConfig bad = cfg;
  bad.p_max = 999.0;  // inconsistent with snr_db
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = cfg;
  bad.epsilon = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = cfg;
  bad.n_bits = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = cfg;
  bad.tx_count = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
