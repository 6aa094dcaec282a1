#include "calev/rng.hpp"

#include <cmath>
#include <string>

#include "calev/error.hpp"

namespace calev {

namespace {

std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

RandomStream::RandomStream(std::uint64_t seed,
                           std::initializer_list<std::uint64_t> path)
    : RandomStream(seed, std::span<const std::uint64_t>(path.begin(), path.size())) {}

RandomStream::RandomStream(std::uint64_t seed, std::span<const std::uint64_t> path) {
  // Fold the key path into the splitmix state one element at a time, then
  // expand to a full engine seed. mt19937_64 itself is specified exactly,
  // so streams match across standard libraries.
  std::uint64_t state = seed;
  std::uint64_t mixed = splitmix64_next(state);
  for (std::uint64_t part : path) {
    state ^= part + 0x9e3779b97f4a7c15ULL + (state << 6) + (state >> 2);
    mixed = splitmix64_next(state);
  }
  engine_.seed(mixed);
}

double RandomStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::uniform_below(std::uint64_t n) {
  if (n == 0) {
    throw Error(ErrorKind::Usage, "uniform_below: n must be positive");
  }
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

int RandomStream::categorical(std::span<const double> probs) {
  if (probs.empty()) {
    throw Error(ErrorKind::Usage, "categorical: empty probability vector");
  }
  double u = uniform01();
  double acc = 0.0;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    acc += probs[c];
    if (u < acc) return static_cast<int>(c);
  }
  // Float tail: acc can land a hair under 1. Return the last class with
  // positive mass so zero-probability classes stay unreachable.
  for (std::size_t c = probs.size(); c-- > 0;) {
    if (probs[c] > 0.0) return static_cast<int>(c);
  }
  return static_cast<int>(probs.size()) - 1;
}

double RandomStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double factor = std::sqrt(-2.0 * std::log(s) / s);
  cached_normal_ = v * factor;
  has_cached_normal_ = true;
  return u * factor;
}

double RandomStream::gamma(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorKind::Usage, "gamma: alpha must be finite and > 0");
  }
  if (alpha < 1.0) {
    // Boost: Gamma(alpha) = Gamma(alpha + 1) * U^(1/alpha).
    double u;
    do {
      u = uniform01();
    } while (u == 0.0);
    return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
  }
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v;
    }
  }
}

std::vector<double> RandomStream::dirichlet(std::span<const double> concentration) {
  if (concentration.empty()) {
    throw Error(ErrorKind::Usage, "dirichlet: empty concentration vector");
  }
  for (;;) {
    std::vector<double> draws(concentration.size());
    double sum = 0.0;
    for (std::size_t c = 0; c < concentration.size(); ++c) {
      draws[c] = gamma(concentration[c]);
      sum += draws[c];
    }
    if (sum > 0.0) {
      for (double& v : draws) v /= sum;
      return draws;
    }
    // All gamma draws underflowed to zero (possible for tiny alphas); redraw.
  }
}

std::vector<std::int64_t> RandomStream::sample_without_replacement(
    std::span<const std::int64_t> counts, std::int64_t k) {
  std::int64_t remaining = 0;
  for (std::int64_t c : counts) {
    if (c < 0) {
      throw Error(ErrorKind::Usage, "sample_without_replacement: negative count");
    }
    remaining += c;
  }
  if (k < 0 || k > remaining) {
    throw Error(ErrorKind::Usage,
                "sample_without_replacement: k = " + std::to_string(k) +
                    " exceeds available " + std::to_string(remaining));
  }
  std::vector<std::int64_t> pool(counts.begin(), counts.end());
  std::vector<std::int64_t> drawn(counts.size(), 0);
  for (std::int64_t i = 0; i < k; ++i) {
    std::uint64_t pick = uniform_below(static_cast<std::uint64_t>(remaining));
    for (std::size_t c = 0; c < pool.size(); ++c) {
      if (pick < static_cast<std::uint64_t>(pool[c])) {
        --pool[c];
        ++drawn[c];
        break;
      }
      pick -= static_cast<std::uint64_t>(pool[c]);
    }
    --remaining;
  }
  return drawn;
}

std::vector<std::int64_t> RandomStream::multinomial(std::span<const double> probs,
                                                    std::int64_t n) {
  if (n < 0) {
    throw Error(ErrorKind::Usage, "multinomial: n must be nonnegative");
  }
  std::vector<std::int64_t> tallies(probs.size(), 0);
  for (std::int64_t i = 0; i < n; ++i) {
    ++tallies[static_cast<std::size_t>(categorical(probs))];
  }
  return tallies;
}

}  // namespace calev
