#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace mtorl {

// SplitMix64 generator. Self-contained so streams are reproducible across
// platforms and standard libraries, which the byte-identical-output
// guarantees rely on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller, cosine branch only so consumption is one value per call.
  double normal(double mean, double stddev) {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // [0, n)
  int uniform_int(int n) { return static_cast<int>(uniform() * static_cast<double>(n)); }

  bool bernoulli(double p) { return uniform() < p; }

  // Index drawn from an unnormalized nonnegative weight vector; the final
  // index absorbs any rounding slack.
  int categorical(const double* weights, int m) {
    double total = 0.0;
    for (int i = 0; i < m; ++i) total += weights[i];
    double u = uniform() * total;
    for (int i = 0; i < m; ++i) {
      u -= weights[i];
      if (u < 0.0) return i;
    }
    return m - 1;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(uniform_int(static_cast<int>(i)));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace mtorl
