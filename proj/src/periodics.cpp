#include "gctree/periodics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "gctree/error.hpp"

namespace gct {

namespace {

double edge_length(CodingTree& tree, const std::vector<Symbol>& word, int k) {
  return tree.node(std::span<const Symbol>(word).first(static_cast<std::size_t>(k) + 1)).edge.length();
}

void fill(std::vector<Symbol>& word, const SymbolSource& src, std::size_t n) {
  while (word.size() < n) word.push_back(src(word.size()));
}

// Tail estimate beyond depth m from edges m+1..m+L and a capped geometric remainder.
double tail_from(const std::vector<double>& len, int m, int L, double cap) {
  double sum = 0.0;
  for (int k = m + 1; k <= m + L; ++k) sum += len[static_cast<std::size_t>(k)];
  const double last = len[static_cast<std::size_t>(m + L)];
  const double prev = len[static_cast<std::size_t>(m + L - 1)];
  const double rho = prev > 0.0 ? std::min(last / prev, cap) : 0.0;
  return sum + last * rho / (1.0 - rho);
}

// Edge lengths 0..n of the word, throwing SlowConvergence after slow_limit
// consecutive ratios above the cap.
void extend_lengths(CodingTree& tree, const std::vector<Symbol>& word, std::vector<double>& len, int n,
                    const AnchorOptions& opts, int& slow_run) {
  while (static_cast<int>(len.size()) <= n) {
    const int k = static_cast<int>(len.size());
    const double l = edge_length(tree, word, k);
    if (k > 0) {
      const double prev = len.back();
      slow_run = (prev > 0.0 && l / prev > opts.ratio_cap) ? slow_run + 1 : 0;
      if (slow_run >= opts.slow_limit) {
        throw Error(ErrorKind::SlowConvergence,
                    fmt::format("edge ratio above {} for {} consecutive edges at depth {} along {}", opts.ratio_cap,
                                slow_run, k, word_string({word.begin(), word.begin() + k + 1})));
      }
    }
    len.push_back(l);
  }
}

bool sphere_less(const SpherePoint& a, const SpherePoint& b) {
  if (a.is_infinite() || b.is_infinite()) return a.is_finite() && b.is_infinite();
  return root_less(a.value(), b.value());
}

}  // namespace

AnchorSample anchor_for_word(CodingTree& tree, const SymbolSource& src, int M_min, double r,
                             const AnchorOptions& opts) {
  if (M_min < 0) throw Error(ErrorKind::InvalidArgument, "M_min must be >= 0");
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "ball radius must be positive");
  const int L = std::max(2, opts.lookahead);
  std::vector<Symbol> word;
  std::vector<double> len;
  int slow_run = 0;
  for (int M = M_min; M <= opts.max_depth; ++M) {
    fill(word, src, static_cast<std::size_t>(M + L) + 1);
    extend_lengths(tree, word, len, M + L, opts, slow_run);
    const double tail = tail_from(len, M, L, opts.ratio_cap);
    if (r >= 2.0 || tail < r / 3.0) {
      AnchorSample a;
      a.prefix.assign(word.begin(), word.begin() + M + 1);
      a.anchor = tree.node(a.prefix).vertex;
      a.M = M;
      a.tail = tail;
      return a;
    }
  }
  throw Error(ErrorKind::SlowConvergence, fmt::format("tail stayed above {} up to depth {}", r / 3.0, opts.max_depth));
}

AnchorSample sample_anchor(CodingTree& tree, BernoulliSampler& sampler, int M_min, double r,
                           const AnchorOptions& opts) {
  std::vector<Symbol> drawn;
  auto src = [&](std::size_t i) {
    sampler.extend(drawn, i + 1);
    return drawn[i];
  };
  return anchor_for_word(tree, src, M_min, r, opts);
}

SymbolWord RecurrenceCandidate::word() const {
  std::vector<Symbol> period = prefix;
  period.insert(period.end(), connector.begin(), connector.end());
  return SymbolWord::periodic({}, period);
}

namespace {

struct Check {
  bool ok = false;
  double miss = 2.0;
};

// Conditions on the periodic word beta = (prefix, w)^inf.
Check check_recurrence(CodingTree& tree, const std::vector<Symbol>& period, int M, const SpherePoint& anchor,
                       double r, const AnchorOptions& opts) {
  const int N = static_cast<int>(period.size());
  const int L = std::max(2, opts.lookahead);
  std::vector<Symbol> beta;
  for (int i = 0; i <= M + N + L; ++i) beta.push_back(period[static_cast<std::size_t>(i % N)]);
  Check c;
  const SpherePoint ret = tree.node(std::span<const Symbol>(beta).first(static_cast<std::size_t>(M + N) + 1)).vertex;
  c.miss = chordal_distance(ret, anchor);
  if (r < 2.0 && !(c.miss < r / 3.0)) return c;
  if (r >= 2.0) {
    c.ok = true;
    return c;
  }
  for (int k = M + 1; k <= M + N; ++k) {
    for (const auto& p : tree.node(std::span<const Symbol>(beta).first(static_cast<std::size_t>(k) + 1)).edge.points()) {
      if (chordal_distance(p, anchor) >= r) return c;
    }
  }
  std::vector<double> len;
  for (int k = 0; k <= M + N + L; ++k) len.push_back(edge_length(tree, beta, k));
  c.ok = tail_from(len, M + N, L, opts.ratio_cap) < r / 3.0;
  return c;
}

}  // namespace

RecurrenceCandidate find_recurrence(CodingTree& tree, const AnchorSample& a, double r, int N_max,
                                    const AnchorOptions& opts) {
  const int M = a.M;
  const int d = tree.degree();
  double closest = 2.0;
  std::vector<Symbol> best_period;
  for (int wl = 0; M + wl + 1 <= N_max; ++wl) {
    std::vector<Symbol> w(static_cast<std::size_t>(wl), 1);
    for (;;) {
      std::vector<Symbol> period = a.prefix;
      period.insert(period.end(), w.begin(), w.end());
      const Check c = check_recurrence(tree, period, M, a.anchor, r, opts);
      if (c.ok) {
        RecurrenceCandidate cand;
        cand.prefix = a.prefix;
        cand.connector = w;
        cand.M = M;
        cand.N = M + wl + 1;
        cand.anchor = a.anchor;
        cand.radius = r;
        std::vector<Symbol> beta;
        for (int i = 0; i <= M + cand.N; ++i) beta.push_back(period[static_cast<std::size_t>(i % cand.N)]);
        cand.return_vertex = tree.node(beta).vertex;
        return cand;
      }
      if (c.miss < closest) {
        closest = c.miss;
        best_period = period;
      }
      int i = wl - 1;
      while (i >= 0 && w[static_cast<std::size_t>(i)] == d) w[static_cast<std::size_t>(i--)] = 1;
      if (i < 0) break;
      ++w[static_cast<std::size_t>(i)];
    }
  }
  throw Error(ErrorKind::NoRecurrence,
              fmt::format("no connector up to N = {} (closest return {:.4g} for {}, needed {:.4g})", N_max, closest,
                          word_string(best_period), r / 3.0));
}

RecurrenceCandidate candidate_for_periodic_word(CodingTree& tree, const SymbolWord& word, int M_min, double r,
                                                int N_max, const AnchorOptions& opts) {
  if (!word.is_periodic() || word.preperiod() != 0) {
    throw Error(ErrorKind::InvalidArgument, "expected a purely periodic word");
  }
  const auto src = [&](std::size_t i) { return word.at(i); };
  const AnchorSample a = anchor_for_word(tree, src, M_min, r, opts);
  const int p = static_cast<int>(word.period());
  const int N = ((a.M + 1 + p - 1) / p) * p;
  if (N > N_max) throw Error(ErrorKind::NoRecurrence, fmt::format("period {} word needs N = {} > {}", p, N, N_max));
  const std::vector<Symbol> period = word.prefix(static_cast<std::size_t>(N));
  const Check c = check_recurrence(tree, period, a.M, a.anchor, r, opts);
  if (!c.ok) {
    throw Error(ErrorKind::NoRecurrence, fmt::format("word {} misses the ball (return {:.4g})", word.to_string(), c.miss));
  }
  RecurrenceCandidate cand;
  cand.prefix = a.prefix;
  cand.connector.assign(period.begin() + a.M + 1, period.end());
  cand.M = a.M;
  cand.N = N;
  cand.anchor = a.anchor;
  cand.radius = r;
  cand.return_vertex = tree.node(word.prefix(static_cast<std::size_t>(a.M + N) + 1)).vertex;
  return cand;
}

PeriodicAccessRecord extract_periodic_point(const RationalMap& f, int m, CodingTree& tree,
                                            const RecurrenceCandidate& cand,
                                            const std::vector<SpherePoint>& postcritical,
                                            const std::vector<SpherePoint>& boundary, const ExtractOptions& opts) {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "base period must be >= 1");
  const InverseBranch F(tree.map(), cand.N, cand.anchor, cand.return_vertex, tree.options().lift);
  PeriodicAccessRecord rec;
  rec.certificate = certify_contraction(F, cand.radius, opts.certify, postcritical);
  rec.tree_period = cand.N;
  rec.word = cand.word();
  rec.M = cand.M;
  rec.anchor_image = cand.return_vertex;

  SpherePoint x = cand.return_vertex;
  bool settled = false;
  for (int it = 0; it < opts.max_branch_iterations; ++it) {
    const SpherePoint y = F(x);
    const double step = chordal_distance(x, y);
    x = y;
    if (step < opts.spread) {
      settled = true;
      break;
    }
  }
  if (!settled) throw Error(ErrorKind::NoConvergence, "inverse branch iteration did not settle");
  if (x.is_infinite()) throw Error(ErrorKind::ChartRequired, "periodic point at infinity");

  // Primitive period under f.
  const int full = m * cand.N;
  int P = full;
  for (int k = 1; k < full; ++k) {
    if (full % k == 0 && chordal_distance(iterate_point(f, x, k), x) < 1e-8) {
      P = k;
      break;
    }
  }

  cplx z = x.value();
  for (int it = 0; it < opts.newton_iterations; ++it) {
    SpherePoint w(z);
    cplx d = 1.0;
    for (int i = 0; i < P; ++i) {
      d *= f.derivative(w);
      w = f(w);
    }
    if (w.is_infinite()) throw Error(ErrorKind::NewtonEscapedBall, "orbit reached infinity");
    const cplx step = (w.value() - z) / (d - 1.0);
    z -= step;
    if (chordal_distance(z, cand.anchor) >= cand.radius) {
      throw Error(ErrorKind::NewtonEscapedBall, "Newton iterate left the certified ball");
    }
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(z))) break;
  }
  rec.point = SpherePoint(z);
  const double res = chordal_distance(iterate_point(f, rec.point, P), rec.point);
  if (!(res < opts.residual)) {
    throw Error(ErrorKind::NoConvergence, fmt::format("periodic residual {:.3g} after Newton", res));
  }
  const auto orbit = orbit_record(f, rec.point, P);
  rec.period = P;
  rec.multiplier = orbit.multiplier;
  rec.kind = orbit.kind;
  rec.orbit = orbit.points;
  if (rec.kind != OrbitKind::Repelling) {
    throw Error(ErrorKind::NotContracting, fmt::format("fixed point is {}, not a source", to_string(rec.kind)));
  }
  if (!boundary.empty()) {
    double best = 2.0;
    for (const auto& b : boundary) best = std::min(best, chordal_distance(b, rec.point));
    rec.boundary_distance = best;
  }
  return rec;
}

void build_access_curve(CodingTree& tree, const RecurrenceCandidate& cand, PeriodicAccessRecord& rec,
                        double tail_tol, int max_pieces) {
  if (!(tail_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tail tolerance must be positive");
  std::vector<Symbol> beta;
  const auto period = cand.word();
  for (int i = 0; i <= cand.M + cand.N; ++i) beta.push_back(period.at(static_cast<std::size_t>(i)));
  Polyline gamma(std::vector<SpherePoint>{tree.node(std::span<const Symbol>(beta).first(static_cast<std::size_t>(cand.M) + 1)).vertex});
  for (int k = cand.M + 1; k <= cand.M + cand.N; ++k) {
    gamma.append(tree.node(std::span<const Symbol>(beta).first(static_cast<std::size_t>(k) + 1)).edge);
  }
  const InverseBranch F(tree.map(), cand.N, cand.anchor, cand.return_vertex, tree.options().lift);
  const double lam = rec.certificate.lambda_est;
  rec.gamma = gamma;
  Polyline Gamma = gamma;
  Polyline piece = gamma;
  double remaining = piece.length() * lam / (1.0 - lam);
  int pieces = 1;
  while (remaining >= tail_tol) {
    if (pieces >= max_pieces) {
      throw Error(ErrorKind::TailBudgetExceeded, fmt::format("tail {:.3g} after {} pieces", remaining, pieces));
    }
    piece = F.apply(piece);
    Gamma.append(piece);
    remaining = piece.length() * lam / (1.0 - lam);
    ++pieces;
  }
  rec.Gamma = std::move(Gamma);
  rec.Gamma_length = rec.Gamma.length();
  rec.tail_bound = remaining;
  const double gap = chordal_distance(rec.Gamma.back(), rec.point);
  if (gap > tail_tol + 1e-9) {
    throw Error(ErrorKind::TailBudgetExceeded, fmt::format("access curve ends {:.3g} from the periodic point", gap));
  }
}

DensityReport density_report(const std::vector<SpherePoint>& boundary,
                             const std::vector<PeriodicAccessRecord>& records) {
  DensityReport rep;
  rep.boundary = boundary;
  double sum = 0.0;
  for (const auto& b : boundary) {
    double best = 2.0;
    for (const auto& r : records) {
      best = std::min(best, chordal_distance(b, r.point));
      for (const auto& q : r.orbit) best = std::min(best, chordal_distance(b, q));
    }
    rep.distance.push_back(best);
    rep.covering_radius = std::max(rep.covering_radius, best);
    sum += best;
  }
  if (!boundary.empty()) rep.mean_distance = sum / static_cast<double>(boundary.size());
  return rep;
}

HarvestResult harvest(const RationalMap& f, int m, CodingTree& tree, const std::vector<double>& weights,
                      const std::vector<SpherePoint>& boundary, const HarvestParams& params) {
  HarvestResult res;
  res.trials = params.trials;
  if (params.trials <= 0) throw Error(ErrorKind::EmptyHarvest, "no trials requested");
  if (params.N_max < 1) throw Error(ErrorKind::EmptyHarvest, "N_max must be >= 1");
  if (params.radii.empty()) throw Error(ErrorKind::InvalidArgument, "empty radius schedule");
  BernoulliSampler sampler(weights, params.seed);
  if (sampler.degree() != tree.degree()) throw Error(ErrorKind::InvalidArgument, "sampler and tree degrees differ");
  const auto postcritical = critical_points(tree.map(), params.postcritical_K).postcritical_closure();

  std::vector<PeriodicAccessRecord> found;
  std::set<std::string> processed;
  auto fail = [&](int trial, const std::string& what, const Error& e) {
    ++res.failures[std::string(to_string(e.kind()))];
    res.log.push_back(fmt::format("trial {} {}: {}", trial, what, e.what()));
  };
  auto accept = [&](PeriodicAccessRecord rec) {
    for (const auto& old : found) {
      if (old.period == rec.period && chordal_distance(old.point, rec.point) < params.dedup_tolerance) return false;
    }
    found.push_back(std::move(rec));
    return true;
  };
  // Certify, extract and build the access curve for one candidate.
  auto process = [&](const RecurrenceCandidate& cand, int trial) {
    PeriodicAccessRecord rec = extract_periodic_point(f, m, tree, cand, postcritical, boundary, params.extract);
    build_access_curve(tree, cand, rec, params.tail_tol);
    rec.trial = trial;
    return rec;
  };

  for (int t = 0; t < params.trials; ++t) {
    sampler.reseed(derive_seed(params.seed, static_cast<std::uint64_t>(t)));
    std::vector<Symbol> drawn;
    int redraws = 0;
    bool done = false;
    std::optional<SymbolWord> success_word;
    for (std::size_t ri = 0; ri < params.radii.size() && !done; ++ri) {
      const double r = params.radii[ri];
      try {
        AnchorSample a;
        for (;;) {
          try {
            auto src = [&](std::size_t i) {
              sampler.extend(drawn, i + 1);
              return drawn[i];
            };
            a = anchor_for_word(tree, src, params.M_min, r, params.anchor);
            break;
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::SlowConvergence || redraws >= params.anchor_retries) throw;
            ++redraws;
            ++res.slow_convergence_retries;
            res.log.push_back(fmt::format("trial {} redraw {}: {}", t, redraws, e.what()));
            drawn.clear();
          }
        }
        const RecurrenceCandidate cand = find_recurrence(tree, a, r, params.N_max, params.anchor);
        const std::string key = cand.word().to_string();
        if (processed.count(key)) {
          done = true;
          success_word = cand.word();
          break;
        }
        PeriodicAccessRecord rec = process(cand, t);
        processed.insert(key);
        success_word = rec.word;
        accept(std::move(rec));
        done = true;
      } catch (const Error& e) {
        fail(t, fmt::format("r={}", r), e);
        // Failures independent of the radius end the trial.
        if (e.kind() == ErrorKind::SlowConvergence || e.kind() == ErrorKind::InvalidArgument) break;
      }
    }
    if (done) ++res.successful_trials;
    if (!done || !success_word || !params.rotations) {
      tree.clear_cache();
      continue;
    }
    // The orbit of the word under the shift gives further candidates.
    for (std::size_t k = 1; k < success_word->period(); ++k) {
      const SymbolWord rot = success_word->shifted(k);
      const std::string key = rot.to_string();
      if (processed.count(key)) continue;
      processed.insert(key);
      for (double r : params.radii) {
        try {
          const auto cand = candidate_for_periodic_word(tree, rot, params.M_min, r, params.N_max, params.anchor);
          accept(process(cand, t));
          break;
        } catch (const Error& e) {
          fail(t, fmt::format("rotation {} r={}", key, r), e);
          if (e.kind() == ErrorKind::SlowConvergence) break;
        }
      }
    }
    tree.clear_cache();
  }

  std::sort(found.begin(), found.end(), [](const PeriodicAccessRecord& a, const PeriodicAccessRecord& b) {
    if (a.period != b.period) return a.period < b.period;
    return sphere_less(a.point, b.point);
  });
  res.records = std::move(found);
  if (res.records.empty()) {
    throw Error(ErrorKind::EmptyHarvest, fmt::format("no records from {} trials", params.trials));
  }
  res.density = density_report(boundary, res.records);
  return res;
}

void write_harvest_jsonl(std::ostream& out, const std::vector<PeriodicAccessRecord>& records) {
  for (const auto& r : records) {
    const cplx p = r.point.value();
    const auto& c = r.certificate;
    out << fmt::format(
        "{{\"point\":[{:.17g},{:.17g}],\"period\":{},\"tree_period\":{},\"multiplier\":[{:.17g},{:.17g}],"
        "\"kind\":\"{}\",\"word\":\"{}\",\"M\":{},\"Gamma_length\":{:.17g},\"gamma_length\":{:.17g},"
        "\"tail_bound\":{:.6g},\"boundary_distance\":{:.17g},\"certificate\":{{\"center\":[{:.17g},{:.17g}],"
        "\"radius\":{:.6g},\"depth\":{},\"lambda_est\":{:.17g},\"distortion_est\":{:.17g},\"margin\":{:.17g}}},"
        "\"anchor_image\":[{:.17g},{:.17g}],\"trial\":{}}}\n",
        p.real(), p.imag(), r.period, r.tree_period, r.multiplier.real(), r.multiplier.imag(), to_string(r.kind),
        r.word.to_string(), r.M, r.Gamma_length, r.gamma.length(), r.tail_bound, r.boundary_distance,
        c.center.value().real(), c.center.value().imag(), c.radius, c.depth, c.lambda_est, c.distortion_est, c.margin,
        r.anchor_image.value().real(), r.anchor_image.value().imag(), r.trial);
  }
}

void write_density_csv(std::ostream& out, const DensityReport& report) {
  out << "x,y,distance\n";
  for (std::size_t i = 0; i < report.boundary.size(); ++i) {
    const cplx b = report.boundary[i].value();
    out << fmt::format("{:.17g},{:.17g},{:.17g}\n", b.real(), b.imag(), report.distance[i]);
  }
}

}  // namespace gct
