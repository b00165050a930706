#ifndef NUMPMP_RNG_HPP_
#define NUMPMP_RNG_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <unordered_set>
#include <vector>

namespace numpmp {

// Seeded generator with hand-rolled distributions. mt19937_64's raw output
// is pinned by the standard, and sampling below avoids std::*_distribution,
// whose results vary across standard libraries. Identical seeds therefore
// give identical draws everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform in [0, n), rejection-debiased.
  std::uint64_t uniform_u64(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
      r = next_u64();
    } while (r >= limit);
    return r % n;
  }

  std::int64_t uniform_int(std::int64_t n) {
    return static_cast<std::int64_t>(uniform_u64(static_cast<std::uint64_t>(n)));
  }

  // Knuth's product method; adequate for the moderate rates used here.
  std::int64_t poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    std::int64_t k = 0;
    double prod = 1.0;
    do {
      ++k;
      prod *= uniform01();
    } while (prod > limit);
    return k - 1;
  }

  // Floyd's algorithm: k distinct values from [0, n), then sorted ascending.
  std::vector<std::int32_t> sample_without_replacement(std::int64_t n,
                                                       std::int64_t k) {
    std::unordered_set<std::int64_t> chosen;
    std::vector<std::int32_t> out;
    out.reserve(static_cast<std::size_t>(k));
    for (std::int64_t j = n - k; j < n; ++j) {
      std::int64_t t = uniform_int(j + 1);
      if (chosen.count(t)) t = j;
      chosen.insert(t);
      out.push_back(static_cast<std::int32_t>(t));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace numpmp

#endif  // NUMPMP_RNG_HPP_
