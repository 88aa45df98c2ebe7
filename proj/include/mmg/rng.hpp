#ifndef MMG_RNG_HPP_
#define MMG_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace mmg {

// Deterministic random stream with explicit child-stream derivation.
//
// All stochastic operations in the library draw from a RandomStream.  Child
// streams are derived by hashing (seed, path...) so that outputs are
// invariant to execution order: the stream used for dataset k, row i does
// not depend on how many draws any other row consumed.  Draws are built
// from the raw mt19937_64 output only; std::*_distribution is avoided
// because its sequences are implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : gen_(mix(seed)) {}

  // Stream for a (seed, path...) key, e.g. derive(seed, {dataset, row}).
  static RandomStream derive(std::uint64_t seed,
                             std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix(seed);
    for (std::uint64_t p : path) h = mix(h ^ mix(p + 0x9e3779b97f4a7c15ull));
    return RandomStream(h);
  }

  std::uint64_t next_u64() {
    ++draws_;
    return gen_();
  }

  // Uniform on (0, 1]; never returns 0, so log(u) is always finite.
  double uniform01() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (two uniforms per draw, no cached spare).
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  bool bernoulli(double p) { return uniform01() <= p; }

  // Index in [0, n).
  std::size_t uniform_index(std::size_t n) {
    // Rejection-free modulo bias is negligible for n << 2^64; use
    // multiply-shift which is exact enough and deterministic.
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Draw an index proportional to nonnegative weights (need not sum to 1).
  int categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform01() * total;
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
      acc += weights[k];
      if (u <= acc) return static_cast<int>(k);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  std::uint64_t draws() const { return draws_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::mt19937_64 gen_;
  std::uint64_t draws_ = 0;
};

}  // namespace mmg

#endif  // MMG_RNG_HPP_
