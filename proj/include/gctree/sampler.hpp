#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "gctree/symbol_word.hpp"

namespace gct {

/// splitmix64 finalizer; derives independent per-trial seeds from a master seed.
std::uint64_t splitmix64(std::uint64_t x);
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 0x9e3779b97f4a7c15ULL));
}

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
inline double uniform53(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Product measure on words over {1..d}.
class BernoulliSampler {
 public:
  BernoulliSampler(std::vector<double> weights, std::uint64_t seed);
  static BernoulliSampler uniform(int d, std::uint64_t seed);

  int degree() const { return static_cast<int>(weights_.size()); }
  const std::vector<double>& weights() const { return weights_; }
  std::uint64_t seed() const { return seed_; }
  void reseed(std::uint64_t seed);

  Symbol draw();
  std::vector<Symbol> draw_word(std::size_t n);
  /// Extends `word` in place to length n.
  void extend(std::vector<Symbol>& word, std::size_t n);

  /// Measure of the cylinder fixed by the first word.size() symbols.
  double cylinder_measure(std::span<const Symbol> word) const;
  /// nu(cylinder of beta_0..beta_m) / nu(cylinder of beta_0..beta_k) for k < m.
  double cylinder_ratio(std::span<const Symbol> word, std::size_t k, std::size_t m) const;
  /// -log max p_i; cylinder ratios are below exp(-(m-k) theta).
  double theta() const;

 private:
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
};

}  // namespace gct
