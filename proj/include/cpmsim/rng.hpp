#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cpmsim {

// Deterministic random stream. All samplers are implemented on top of the
// raw 64-bit output of mt19937_64 so that a given seed produces the same
// draw sequence on every platform (the std:: distribution classes make no
// such guarantee). One stream per thread/trial; never share across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), n >= 1.
  std::uint64_t uniform_int(std::uint64_t n) {
    // n is tiny in this codebase (quantizer labels); modulo bias ~ n/2^64.
    return engine_() % n;
  }

  // Exponential with the given mean, via inverse CDF.
  double exponential(double mean) {
    return -mean * std::log(1.0 - uniform());
  }

  // Standard normal, Box-Muller pair with caching.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cpmsim
