#include "gctree/coding_tree.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "gctree/error.hpp"

namespace gct {

CodingTree::CodingTree(RationalMap map, SpherePoint root, std::vector<Polyline> base_curves, TreeOptions opts)
    : map_(std::move(map)), root_(root), opts_(opts) {
  const int d = static_cast<int>(base_curves.size());
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "a coding tree needs at least two base curves");
  if (d > map_.degree()) throw Error(ErrorKind::InvalidArgument, "more base curves than preimages");
  if (d > 255) throw Error(ErrorKind::InvalidArgument, "at most 255 symbols");

  const auto closure = critical_points(map_, opts_.postcritical_K).postcritical_closure();
  for (int j = 0; j < d; ++j) {
    const Polyline& c = base_curves[static_cast<std::size_t>(j)];
    if (c.size() < 2) throw Error(ErrorKind::InvalidArgument, "base curve needs at least two points");
    if (chordal_distance(c.front(), root_) > 1e-12) {
      throw Error(ErrorKind::InvalidArgument, fmt::format("base curve {} does not start at the root", j + 1));
    }
    if (chordal_distance(map_(c.back()), root_) > 1e-9) {
      throw Error(ErrorKind::InvalidArgument, fmt::format("base curve {} does not end at a preimage of the root", j + 1));
    }
    for (int i = 0; i < j; ++i) {
      if (chordal_distance(base_curves[static_cast<std::size_t>(i)].back(), c.back()) <= 1e-8) {
        throw Error(ErrorKind::InvalidArgument, "two base curves end at the same preimage");
      }
    }
    std::vector<SpherePoint> pts = c.points();
    pts.front() = root_;
    Polyline dense = Polyline::densified(pts, opts_.max_step);
    for (const auto& q : closure) {
      if (distance_to_polyline(q, dense) <= opts_.postcritical_margin) {
        throw Error(ErrorKind::PostcriticalViolation, fmt::format("base curve {} meets the postcritical set", j + 1));
      }
    }
    base_.push_back(std::move(dense));
  }
}

std::string CodingTree::key(std::span<const Symbol> word) {
  return std::string(reinterpret_cast<const char*>(word.data()), word.size());
}

const CodingTree::Node& CodingTree::node(std::span<const Symbol> word) {
  if (word.empty()) throw Error(ErrorKind::InvalidArgument, "the root has no edge");
  const std::string k = key(word);
  if (auto it = cache_.find(k); it != cache_.end()) return it->second;

  const Symbol s = word.front();
  if (s < 1 || s > base_.size()) throw Error(ErrorKind::InvalidArgument, "symbol out of range");
  Node n;
  if (word.size() == 1) {
    n.edge = base_[s - 1u];
    n.vertex = n.edge.back();
  } else {
    const Node& source = node(word.subspan(1));
    const SpherePoint start = node(word.first(word.size() - 1)).vertex;
    try {
      n.edge = lift_curve(map_, source.edge, start, opts_.lift);
      if (opts_.decimate) n.edge = n.edge.decimated(opts_.max_step);
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("word {}: {}", word_string({word.begin(), word.end()}), e.what()));
    }
    n.vertex = n.edge.back();
  }
  return cache_.emplace(k, std::move(n)).first->second;
}

void CodingTree::expand_full(int depth) {
  if (depth < 1) throw Error(ErrorKind::InvalidArgument, "tree depth must be >= 1");
  const std::size_t d = base_.size();
  std::size_t total = 0;
  std::size_t level = 1;
  for (int n = 1; n <= depth; ++n) {
    level *= d;
    total += level;
    if (total > opts_.max_full_edges) {
      throw Error(ErrorKind::InvalidArgument, "full expansion exceeds the edge cap; use prefixes mode");
    }
  }
  std::vector<Symbol> word;
  for (int n = 1; n <= depth; ++n) {
    word.assign(static_cast<std::size_t>(n), 1);
    for (;;) {
      node(word);
      pinned_.insert(key(word));
      // Odometer increment, last symbol fastest.
      int i = n - 1;
      while (i >= 0 && word[static_cast<std::size_t>(i)] == d) word[static_cast<std::size_t>(i--)] = 1;
      if (i < 0) break;
      ++word[static_cast<std::size_t>(i)];
    }
  }
}

void CodingTree::expand_prefixes(std::span<const Symbol> word) {
  for (std::size_t n = 1; n <= word.size(); ++n) {
    node(word.first(n));
    pinned_.insert(key(word.first(n)));
  }
}

void CodingTree::clear_cache() {
  for (auto it = cache_.begin(); it != cache_.end();) {
    if (pinned_.count(it->first)) {
      ++it;
    } else {
      it = cache_.erase(it);
    }
  }
}

std::vector<std::vector<Symbol>> CodingTree::pinned_words() const {
  std::vector<std::vector<Symbol>> out;
  out.reserve(pinned_.size());
  for (const auto& k : pinned_) out.emplace_back(k.begin(), k.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return out;
}

CodingTree build_tree(const RationalMap& map, const SpherePoint& root, std::vector<Polyline> base_curves, int depth,
                      BuildMode mode, const std::vector<SymbolWord>& prefixes, const TreeOptions& opts) {
  if (depth < 1) throw Error(ErrorKind::InvalidArgument, "tree depth must be >= 1");
  CodingTree tree(map, root, std::move(base_curves), opts);
  if (mode == BuildMode::Full) {
    tree.expand_full(depth);
  } else {
    for (const auto& w : prefixes) {
      const std::size_t n = w.is_periodic() ? static_cast<std::size_t>(depth) : std::min<std::size_t>(w.stored_size(), static_cast<std::size_t>(depth));
      if (w.max_symbol() > tree.degree()) throw Error(ErrorKind::InvalidArgument, "word uses a symbol beyond the tree degree");
      tree.expand_prefixes(w.prefix(n));
    }
  }
  return tree;
}

CodingPoint coding_point(CodingTree& tree, const SymbolWord& word, double tol, const CodingPointOptions& opts) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
  const int max_depth = word.is_periodic() ? opts.max_depth : static_cast<int>(word.stored_size());
  if (max_depth < 1) throw Error(ErrorKind::InvalidArgument, "empty word");
  const std::vector<Symbol> symbols = word.prefix(static_cast<std::size_t>(max_depth));

  CodingPoint result;
  SpherePoint prev_vertex;
  double prev_len = 0.0;
  int slow = 0;
  for (int n = 0; n < max_depth; ++n) {
    const auto& nd = tree.node(std::span<const Symbol>(symbols).first(static_cast<std::size_t>(n) + 1));
    const double len = nd.edge.length();
    result.point = nd.vertex;
    result.depth = n;
    if (n >= 1) {
      const double raw = prev_len > 0.0 ? len / prev_len : 0.0;
      slow = raw > opts.ratio_cap ? slow + 1 : 0;
      if (slow >= opts.slow_limit) {
        std::ostringstream os;
        os.precision(6);
        os << "edge-length ratio above " << opts.ratio_cap << " for " << slow << " consecutive edges at depth " << n
           << " (ratio " << raw << ", edge " << len << ") along " << word.to_string();
        throw Error(ErrorKind::SlowConvergence, os.str());
      }
      const double rho = std::min(raw, opts.ratio_cap);
      result.error_bound = len * rho / (1.0 - rho);
      const double move = chordal_distance(nd.vertex, prev_vertex);
      if (move < tol && result.error_bound < tol) {
        result.converged = true;
        return result;
      }
    } else {
      result.error_bound = len;
    }
    prev_vertex = nd.vertex;
    prev_len = len;
  }
  return result;
}

BranchTail branch_tail_stats(CodingTree& tree, std::span<const Symbol> word, int m) {
  const int available = static_cast<int>(word.size()) - 1;
  if (m < 0 || m > available) throw Error(ErrorKind::DepthUnavailable, "requested depth beyond the word");
  BranchTail t;
  t.from_depth = m;
  std::vector<SpherePoint> vertices;
  for (int k = m; k <= available; ++k) {
    const auto& nd = tree.node(word.first(static_cast<std::size_t>(k) + 1));
    if (k > m) t.tail_length += nd.edge.length();
    vertices.push_back(nd.vertex);
  }
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices.size(); ++j) {
      t.tail_diameter = std::max(t.tail_diameter, chordal_distance(vertices[i], vertices[j]));
    }
  }
  return t;
}

double tail_estimate(CodingTree& tree, std::span<const Symbol> word, int m, double ratio_cap) {
  const int available = static_cast<int>(word.size()) - 1;
  if (m < 0 || m > available) throw Error(ErrorKind::DepthUnavailable, "requested depth beyond the word");
  double sum = 0.0;
  for (int k = m + 1; k <= available; ++k) sum += tree.node(word.first(static_cast<std::size_t>(k) + 1)).edge.length();
  if (available < 1) return sum + tree.node(word.first(1)).edge.length() * ratio_cap / (1.0 - ratio_cap);
  const double last = tree.node(word).edge.length();
  const double before = tree.node(word.first(word.size() - 1)).edge.length();
  const double rho = before > 0.0 ? std::min(last / before, ratio_cap) : 0.0;
  return sum + last * rho / (1.0 - rho);
}

void write_tree_dump(std::ostream& out, CodingTree& tree) {
  out << "# word vertex_re vertex_im edge_length tail_length tail_diameter\n";
  for (const auto& w : tree.pinned_words()) {
    const auto& nd = tree.node(w);
    const BranchTail t = branch_tail_stats(tree, w, 0);
    const cplx v = nd.vertex.is_finite() ? nd.vertex.value() : cplx(INFINITY, 0.0);
    out << fmt::format("{} {:.17g} {:.17g} {:.17g} {:.17g} {:.17g}\n", word_string(w), v.real(), v.imag(),
                       nd.edge.length(), t.tail_length, t.tail_diameter);
  }
}

}  // namespace gct
