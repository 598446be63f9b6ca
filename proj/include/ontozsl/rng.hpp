#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ontozsl/tensor.hpp"

namespace ontozsl {

// Seeded RNG with hand-rolled distributions so streams are identical across
// platforms (std distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  long uniform_int(long n) {
    return static_cast<long>(engine_() % static_cast<uint64_t>(n));
  }

  bool coin() { return (engine_() & 1u) != 0; }

  // Box-Muller, one draw per call (spare cached)
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  Tensor normal_tensor(long rows, long cols, double stddev = 1.0) {
    Tensor t(rows, cols);
    for (long i = 0; i < t.size(); ++i) t[i] = stddev * normal();
    return t;
  }

  Tensor uniform_tensor(long rows, long cols, double lo, double hi) {
    Tensor t(rows, cols);
    for (long i = 0; i < t.size(); ++i) t[i] = uniform(lo, hi);
    return t;
  }

  // Fisher-Yates
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(static_cast<long>(i)));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct indices from [0, n), order randomized
  std::vector<long> sample_without_replacement(long n, long k) {
    std::vector<long> all(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i) all[static_cast<size_t>(i)] = i;
    shuffle(all);
    all.resize(static_cast<size_t>(k < n ? k : n));
    return all;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ontozsl
