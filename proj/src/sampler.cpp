#include "gctree/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "gctree/error.hpp"

namespace gct {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

BernoulliSampler::BernoulliSampler(std::vector<double> weights, std::uint64_t seed)
    : weights_(std::move(weights)), seed_(seed), rng_(seed) {
  if (weights_.size() < 2) throw Error(ErrorKind::InvalidArgument, "need at least two symbol weights");
  if (weights_.size() > 255) throw Error(ErrorKind::InvalidArgument, "at most 255 symbols");
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw Error(ErrorKind::InvalidArgument, "weights must be positive");
    sum += w;
    cumulative_.push_back(sum);
  }
  if (std::abs(sum - 1.0) > 1e-12) throw Error(ErrorKind::InvalidArgument, "weights must sum to 1");
}

BernoulliSampler BernoulliSampler::uniform(int d, std::uint64_t seed) {
  return BernoulliSampler(std::vector<double>(static_cast<std::size_t>(std::max(d, 0)), 1.0 / d), seed);
}

void BernoulliSampler::reseed(std::uint64_t seed) {
  seed_ = seed;
  rng_.seed(seed);
}

Symbol BernoulliSampler::draw() {
  const double u = uniform53(rng_) * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto idx = std::min<std::ptrdiff_t>(it - cumulative_.begin(), static_cast<std::ptrdiff_t>(weights_.size()) - 1);
  return static_cast<Symbol>(idx + 1);
}

std::vector<Symbol> BernoulliSampler::draw_word(std::size_t n) {
  std::vector<Symbol> w;
  extend(w, n);
  return w;
}

void BernoulliSampler::extend(std::vector<Symbol>& word, std::size_t n) {
  word.reserve(n);
  while (word.size() < n) word.push_back(draw());
}

double BernoulliSampler::cylinder_measure(std::span<const Symbol> word) const {
  double m = 1.0;
  for (Symbol s : word) {
    if (s < 1 || s > weights_.size()) throw Error(ErrorKind::InvalidArgument, "symbol out of range");
    m *= weights_[s - 1u];
  }
  return m;
}

double BernoulliSampler::cylinder_ratio(std::span<const Symbol> word, std::size_t k, std::size_t m) const {
  if (!(k < m) || m >= word.size()) throw Error(ErrorKind::InvalidArgument, "need k < m < word length");
  return cylinder_measure(word.subspan(k + 1, m - k));
}

double BernoulliSampler::theta() const { return -std::log(*std::max_element(weights_.begin(), weights_.end())); }

}  // namespace gct
