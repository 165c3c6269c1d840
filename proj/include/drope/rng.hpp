#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <Eigen/Core>

// Self-contained random number utilities. std:: distributions are
// implementation-defined and would tie reproducibility to the standard
// library version, so the few samplers we need are implemented here.

namespace drope {

/// splitmix64 finalizer; bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// FNV-1a over a byte string; used to derive named sub-streams.
constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Deterministic sub-seed for a named stream of a parent seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
  return mix64(seed ^ fnv1a(stream));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed ^ mix64(index));
}

/// Order-insensitive 64-bit fingerprint of a real vector (exact bit patterns).
inline std::uint64_t hash_vector(const Eigen::VectorXd& x) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    std::uint64_t bits;
    static_assert(sizeof(double) == sizeof(std::uint64_t));
    std::memcpy(&bits, &x[i], sizeof(bits));
    h = (h ^ bits) * 0x100000001B3ULL;
    h = mix64(h + static_cast<std::uint64_t>(i));
  }
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}
  Rng(std::uint64_t seed, std::string_view stream) : engine_(derive_seed(seed, stream)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  int uniform_int(int n) {
    if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
    // rejection sampling to avoid modulo bias
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return static_cast<int>(v % un);
  }

  /// Standard normal via Box-Muller (one value per call).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Gamma(alpha, 1) via Marsaglia-Tsang; alpha < 1 handled by boosting.
  double gamma(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("gamma: alpha must be positive");
    if (alpha < 1.0) {
      const double u = uniform();
      return gamma(alpha + 1.0) * std::pow(u > 0 ? u : 1e-300, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// One draw from Dirichlet(alpha) over k categories.
  Eigen::VectorXd dirichlet(double alpha, int k) {
    Eigen::VectorXd g(k);
    for (int i = 0; i < k; ++i) g[i] = gamma(alpha);
    const double total = g.sum();
    if (total <= 0.0) return Eigen::VectorXd::Constant(k, 1.0 / k);
    return g / total;
  }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_int(static_cast<int>(i)));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// Index draw proportional to the given nonnegative weights.
  int weighted_index(const Eigen::VectorXd& weights) {
    const double total = weights.sum();
    if (!(total > 0.0)) throw std::invalid_argument("weighted_index: weights must have positive sum");
    double u = uniform() * total;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size() - 1);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace drope
