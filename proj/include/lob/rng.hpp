#ifndef LOB_RNG_HPP
#define LOB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace lob {

// Counter-based generator (SplitMix64 finalizer over key+counter).
// Output for a given (seed, stream) is identical on every platform,
// and independent paths are obtained by deriving sub-streams.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ull))) {}

  // Derives a reproducible sub-stream; the parent state is unaffected.
  CounterRng stream(std::uint64_t id) const {
    CounterRng r(0);
    r.key_ = mix(key_ ^ mix(id + 0x6a09e667f3bcc909ull));
    r.ctr_ = 0;
    return r;
  }

  std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ull * ++ctr_); }

  // Uniform on the open interval (0,1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double exponential(double rate) {
    if (!(rate > 0)) throw std::domain_error("exponential: rate must be positive");
    return -std::log(uniform()) / rate;
  }

  long poisson(double mean) {
    if (mean < 0) throw std::domain_error("poisson: negative mean");
    if (mean == 0) return 0;
    if (mean > 60.0) {
      // Po(m) = Po(m/2) + Po(m/2); keeps the Knuth loop in a safe range.
      double half = mean / 2;
      return poisson(half) + poisson(half);
    }
    const double limit = std::exp(-mean);
    long k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }

  long binomial(long n, double p) {
    long k = 0;
    for (long i = 0; i < n; ++i)
      if (uniform() < p) ++k;
    return k;
  }

  // Index drawn proportionally to nonnegative weights; total = sum(weights).
  std::size_t categorical(std::span<const double> weights, double total) {
    double u = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      u -= weights[i];
      if (u <= 0) return i;
    }
    return weights.size() - 1;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace lob

#endif  // LOB_RNG_HPP
