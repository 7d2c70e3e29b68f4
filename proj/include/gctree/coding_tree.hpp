#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gctree/lifting.hpp"
#include "gctree/symbol_word.hpp"

namespace gct {

struct TreeOptions {
  LiftOptions lift{};
  /// Base curves are resampled to this chordal step.
  double max_step = 1e-2;
  std::size_t max_full_edges = 1'000'000;
  /// Base curves must keep this chordal distance from the postcritical closure.
  double postcritical_margin = 1e-6;
  int postcritical_K = 64;
  /// Drop lifted points that are not needed to keep steps below max_step.
  /// Vertices are unaffected; deep edges shrink to a few points.
  bool decimate = true;
};

/// Geometric coding tree. The edge for the word (a_0..a_n) is gamma_n, the
/// lift of gamma_{n-1}(a_1..a_n) starting at z_{n-1}(a_0..a_{n-1}); its
/// endpoint is the vertex z_n. Nodes are computed on demand and memoized, so
/// a node's value depends only on its word.
///
/// References returned by node() stay valid until clear_cache().
class CodingTree {
 public:
  struct Node {
    Polyline edge;
    SpherePoint vertex;
  };

  CodingTree(RationalMap map, SpherePoint root, std::vector<Polyline> base_curves, TreeOptions opts = {});

  const RationalMap& map() const { return map_; }
  const SpherePoint& root() const { return root_; }
  int degree() const { return static_cast<int>(base_.size()); }
  const std::vector<Polyline>& base_curves() const { return base_; }
  const TreeOptions& options() const { return opts_; }

  /// Node for a nonempty finite word of symbols in 1..degree().
  const Node& node(std::span<const Symbol> word);
  const Node& node(const SymbolWord& word, std::size_t length) { return node(word.prefix(length)); }

  /// Computes and pins every word of length 1..depth.
  void expand_full(int depth);
  /// Computes and pins a word and all of its prefixes.
  void expand_prefixes(std::span<const Symbol> word);
  /// Drops memoized nodes that are not pinned.
  void clear_cache();

  std::size_t cached_nodes() const { return cache_.size(); }
  /// Pinned words ordered by length, then lexicographically.
  std::vector<std::vector<Symbol>> pinned_words() const;

 private:
  static std::string key(std::span<const Symbol> word);

  RationalMap map_;
  SpherePoint root_;
  std::vector<Polyline> base_;
  TreeOptions opts_;
  std::unordered_map<std::string, Node> cache_;
  std::unordered_set<std::string> pinned_;
};

enum class BuildMode { Full, Prefixes };

/// depth is the maximal word length (depth 1 holds just the base curves).
CodingTree build_tree(const RationalMap& map, const SpherePoint& root, std::vector<Polyline> base_curves,
                      int depth, BuildMode mode, const std::vector<SymbolWord>& prefixes = {},
                      const TreeOptions& opts = {});

struct CodingPointOptions {
  int max_depth = 200;
  double ratio_cap = 0.9;
  int slow_limit = 10;
};

struct CodingPoint {
  SpherePoint point;
  double error_bound = 0.0;
  int depth = 0;
  bool converged = false;
};

/// Approximates z_inf(word) by deepening the branch. Finite words are used as a
/// truncation depth. Throws SlowConvergence when the edge-length ratio exceeds
/// the cap for slow_limit consecutive edges.
CodingPoint coding_point(CodingTree& tree, const SymbolWord& word, double tol, const CodingPointOptions& opts = {});

struct BranchTail {
  int from_depth = 0;
  double tail_length = 0.0;
  double tail_diameter = 0.0;
};

/// Statistics of b_m along a finite word: edges k > m and vertices k >= m.
BranchTail branch_tail_stats(CodingTree& tree, std::span<const Symbol> word, int m);

/// Tail length beyond depth m of a finite word plus the geometric remainder
/// extrapolated from its last two edges (ratio capped at ratio_cap).
double tail_estimate(CodingTree& tree, std::span<const Symbol> word, int m, double ratio_cap = 0.9);

/// One line per pinned word: word, vertex, edge length, tail statistics from depth 0.
void write_tree_dump(std::ostream& out, CodingTree& tree);

}  // namespace gct
