#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace calev {

// 64-bit FNV-1a. Used to fold uids into substream keys so per-instance
// draws are independent of dataset order and size.
std::uint64_t fnv1a64(std::string_view text);

// All sampling is hand-rolled on top of the engine's raw 64-bit output.
// std::*_distribution output is implementation-defined, which would break
// byte-identical reproducibility across standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : RandomStream(seed, {}) {}

  // Derives an independent stream from (seed, path...) via splitmix64.
  RandomStream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);
  RandomStream(std::uint64_t seed, std::span<const std::uint64_t> path);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01();

  // Uniform integer on [0, n); rejection sampling, no modulo bias. n > 0.
  std::uint64_t uniform_below(std::uint64_t n);

  // Index draw from a probability vector via CDF scan.
  int categorical(std::span<const double> probs);

  // Standard normal (polar method).
  double normal();

  // Gamma(alpha, 1), alpha > 0. Marsaglia-Tsang; alpha < 1 boosted via
  // Gamma(alpha + 1) * U^(1/alpha).
  double gamma(double alpha);

  // Dirichlet draw from per-class concentrations (all > 0).
  std::vector<double> dirichlet(std::span<const double> concentration);

  // Multivariate hypergeometric: per-class counts of k draws without
  // replacement from the given tallies. k <= sum(counts).
  std::vector<std::int64_t> sample_without_replacement(
      std::span<const std::int64_t> counts, std::int64_t k);

  // Per-class counts of n independent categorical draws.
  std::vector<std::int64_t> multinomial(std::span<const double> probs,
                                        std::int64_t n);

 private:
  std::mt19937_64 engine_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace calev
