#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gctree/census.hpp"
#include "gctree/coding_tree.hpp"
#include "gctree/sampler.hpp"

namespace gct {

struct AnchorOptions {
  /// Edges measured past depth M to estimate the tail.
  int lookahead = 12;
  double ratio_cap = 0.9;
  int max_depth = 60;
  int slow_limit = 10;
};

struct AnchorSample {
  std::vector<Symbol> prefix;  // alpha_0..alpha_M
  SpherePoint anchor;          // z_M
  int M = 0;
  double tail = 0.0;
};

/// Produces symbol i of the word being explored, extending it on demand.
using SymbolSource = std::function<Symbol(std::size_t)>;

/// Smallest M >= M_min whose estimated tail beyond M is below r/3.
/// r >= 2 makes the ball condition vacuous (M = M_min).
AnchorSample anchor_for_word(CodingTree& tree, const SymbolSource& word, int M_min, double r,
                             const AnchorOptions& opts = {});
AnchorSample sample_anchor(CodingTree& tree, BernoulliSampler& sampler, int M_min, double r,
                           const AnchorOptions& opts = {});

struct RecurrenceCandidate {
  std::vector<Symbol> prefix;  // alpha_0..alpha_M
  std::vector<Symbol> connector;
  int M = 0;
  int N = 0;
  SpherePoint anchor;
  SpherePoint return_vertex;  // z_{M+N} of the periodic word
  double radius = 0.0;

  SymbolWord word() const;
};

/// Breadth-first search over connectors, shortest first then lexicographic.
/// Accepts w when z_{M+N}(beta) is in B(anchor, r/3), the seed arc (edges
/// M+1..M+N) stays in B(anchor, r) and the tail beyond M+N is below r/3.
/// Throws NoRecurrence with the closest miss.
RecurrenceCandidate find_recurrence(CodingTree& tree, const AnchorSample& anchor, double r, int N_max,
                                    const AnchorOptions& opts = {});

/// Candidate for a given periodic word: the prefix is chosen by the tail
/// condition along the word, the connector completes a whole number of periods.
RecurrenceCandidate candidate_for_periodic_word(CodingTree& tree, const SymbolWord& word, int M_min, double r,
                                                int N_max, const AnchorOptions& opts = {});

struct PeriodicAccessRecord {
  SpherePoint point;
  /// Primitive period under the base map f.
  int period = 0;
  /// Period N of the word under the tree map.
  int tree_period = 0;
  cplx multiplier{0.0, 0.0};
  OrbitKind kind = OrbitKind::Repelling;
  /// f-orbit of the point, starting with it.
  std::vector<SpherePoint> orbit;
  SymbolWord word;
  int M = 0;
  SpherePoint anchor_image;
  ContractionCertificate certificate;
  Polyline gamma;
  Polyline Gamma;
  double Gamma_length = 0.0;
  /// Geometric bound on the part of the access curve not drawn.
  double tail_bound = 0.0;
  double boundary_distance = -1.0;
  int trial = -1;
};

struct ExtractOptions {
  CertifyOptions certify{};
  double spread = 1e-12;
  int max_branch_iterations = 500;
  int newton_iterations = 50;
  double residual = 1e-9;
};

/// Certifies F_N on B(anchor, r), finds its fixed point and polishes it with
/// Newton on f^P(z) - z (P the primitive period under the base map f, where
/// the tree map is f^base_period). Multiplier is taken along the f-orbit.
PeriodicAccessRecord extract_periodic_point(const RationalMap& base_map, int base_period, CodingTree& tree,
                                            const RecurrenceCandidate& cand,
                                            const std::vector<SpherePoint>& postcritical,
                                            const std::vector<SpherePoint>& boundary,
                                            const ExtractOptions& opts = {});

/// gamma = edges M+1..M+N of the periodic word; Gamma = gamma, F_N(gamma), ...
/// until the remaining geometric tail is below tail_tol.
void build_access_curve(CodingTree& tree, const RecurrenceCandidate& cand, PeriodicAccessRecord& record,
                        double tail_tol, int max_pieces = 400);

struct HarvestParams {
  int trials = 200;
  int M_min = 3;
  int N_max = 12;
  std::vector<double> radii{0.3, 0.15, 0.075};
  int anchor_retries = 5;
  double tail_tol = 1e-6;
  bool rotations = true;
  double dedup_tolerance = 1e-6;
  std::uint64_t seed = 1;
  int postcritical_K = 64;
  AnchorOptions anchor{};
  ExtractOptions extract{};
};

struct DensityReport {
  std::vector<SpherePoint> boundary;
  std::vector<double> distance;
  double covering_radius = 0.0;
  double mean_distance = 0.0;
};

/// Distances use every point of every record's orbit.
DensityReport density_report(const std::vector<SpherePoint>& boundary,
                             const std::vector<PeriodicAccessRecord>& records);

struct HarvestResult {
  std::vector<PeriodicAccessRecord> records;
  DensityReport density;
  int trials = 0;
  int successful_trials = 0;
  int slow_convergence_retries = 0;
  std::map<std::string, int> failures;
  std::vector<std::string> log;
};

/// Runs the trials with seeds derived from params.seed; records are
/// deduplicated on (period, point) and sorted by period then point.
/// Throws EmptyHarvest when nothing survives.
HarvestResult harvest(const RationalMap& base_map, int base_period, CodingTree& tree,
                      const std::vector<double>& weights, const std::vector<SpherePoint>& boundary,
                      const HarvestParams& params);

/// One JSON object per line.
void write_harvest_jsonl(std::ostream& out, const std::vector<PeriodicAccessRecord>& records);
void write_density_csv(std::ostream& out, const DensityReport& report);

}  // namespace gct
