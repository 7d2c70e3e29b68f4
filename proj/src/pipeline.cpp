#include "gctree/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "gctree/diagnostics.hpp"
#include "gctree/error.hpp"

namespace fs = std::filesystem;

namespace gct {

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::Census: return "census";
    case Stage::Raster: return "raster";
    case Stage::Diagnostics: return "diagnostics";
    case Stage::Tree: return "tree";
    case Stage::Harvest: return "harvest";
    case Stage::Density: return "density";
    case Stage::Overlay: return "overlay";
  }
  return "?";
}

int stage_exit_code(Stage s) { return 10 + static_cast<int>(s); }
int stage_timeout_code(Stage s) { return 30 + static_cast<int>(s); }

namespace {

std::string hex(const unsigned char* md, unsigned n) {
  std::string out;
  for (unsigned i = 0; i < n; ++i) out += fmt::format("{:02x}", md[i]);
  return out;
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw Error(ErrorKind::Io, "sha256 init failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;
  void update(const void* p, std::size_t n) { EVP_DigestUpdate(ctx_, p, n); }
  std::string hex_digest() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned n = 0;
    EVP_DigestFinal_ex(ctx_, md, &n);
    return hex(md, n);
  }

 private:
  EVP_MD_CTX* ctx_;
};

using json = nlohmann::json;

json point_json(const SpherePoint& p) {
  if (p.is_infinite()) return nullptr;
  return json::array({p.value().real(), p.value().imag()});
}

std::vector<SpherePoint> to_points(const std::vector<cplx>& zs) {
  return {zs.begin(), zs.end()};
}

struct Context {
  RunConfig cfg;
  fs::path out;
  std::optional<RationalMap> f;
  std::optional<RationalMap> g;
  std::optional<BasinRaster> raster;
  std::vector<SpherePoint> boundary;
  std::unique_ptr<CodingTree> tree;
  std::optional<HarvestResult> harvest;
  std::vector<FileRecord> files;

  template <class Fn>
  void write(const std::string& name, Fn&& body) {
    const fs::path path = out / name;
    {
      std::ofstream os(path, std::ios::binary);
      if (!os) throw Error(ErrorKind::Io, fmt::format("cannot write {}", path.string()));
      body(os);
      if (!os) throw Error(ErrorKind::Io, fmt::format("write failed for {}", path.string()));
    }
    FileRecord r;
    r.name = name;
    r.sha256 = sha256_file(path.string());
    r.bytes = fs::file_size(path);
    files.push_back(r);
  }

  std::vector<Polyline> base_curves() const {
    std::vector<Polyline> out_curves;
    for (const auto& c : cfg.tree.base_curves) out_curves.emplace_back(to_points(c));
    return out_curves;
  }

  const BasinRaster& need_raster() {
    if (!raster) throw Error(ErrorKind::InvalidArgument, "this stage needs the raster stage");
    return *raster;
  }
  CodingTree& need_tree() {
    if (!tree) throw Error(ErrorKind::InvalidArgument, "this stage needs the tree stage");
    return *tree;
  }
  const HarvestResult& need_harvest() {
    if (!harvest) throw Error(ErrorKind::InvalidArgument, "this stage needs the harvest stage");
    return *harvest;
  }
};

PeriodicOrbitRecord basin_cycle(const RationalMap& f, const BasinConfig& b) {
  const auto orbits = find_periodic_orbits(f, b.period);
  const PeriodicOrbitRecord* best = nullptr;
  double best_d = 3.0;
  for (const auto& o : orbits) {
    if (o.kind != OrbitKind::Attracting && o.kind != OrbitKind::Parabolic) continue;
    for (const auto& p : o.points) {
      const double d = chordal_distance(p, b.near);
      if (d < best_d) {
        best_d = d;
        best = &o;
      }
    }
  }
  if (!best) {
    throw Error(ErrorKind::TrapConstructionFailed, fmt::format("no attracting or parabolic cycle of period {}", b.period));
  }
  return *best;
}

void stage_census(Context& cx, StageRecord& rec) {
  std::size_t count = 0;
  cx.write("census_orbits.jsonl", [&](std::ostream& os) {
    for (int n = 1; n <= cx.cfg.census_max_period; ++n) {
      for (const auto& o : find_periodic_orbits(*cx.f, n)) {
        json pts = json::array();
        for (const auto& p : o.points) pts.push_back(point_json(p));
        json line = {{"period", o.period},
                     {"points", pts},
                     {"multiplier", {o.multiplier.real(), o.multiplier.imag()}},
                     {"kind", std::string(to_string(o.kind))}};
        os << line.dump() << '\n';
        ++count;
      }
    }
  });
  rec.summary.emplace_back("orbits", std::to_string(count));
}

void stage_raster(Context& cx, StageRecord& rec) {
  const auto cycle = basin_cycle(*cx.f, cx.cfg.basin);
  RasterOptions ro;
  ro.max_iters = cx.cfg.raster.max_iters;
  cx.raster = rasterize_basin(*cx.f, cycle, cx.cfg.raster.bounds, cx.cfg.raster.nx, cx.cfg.raster.ny, ro);
  cx.write("basin.ppm", [&](std::ostream& os) { write_basin_ppm(os, *cx.raster); });
  cx.boundary = boundary_point_set(*cx.raster);
  cx.write("boundary.csv", [&](std::ostream& os) { write_boundary_csv(os, cx.boundary); });
  rec.summary.emplace_back("cycle_kind", std::string(to_string(cycle.kind)));
  rec.summary.emplace_back("boundary_cells", std::to_string(cx.boundary.size()));
}

void stage_diagnostics(Context& cx, StageRecord& rec) {
  const auto& t = cx.cfg.tree;
  const ConditionReport ci = check_condition_i(*cx.g, cx.base_curves(), t.postcritical_K, t.postcritical_margin);
  cx.write("condition_i.txt", [&](std::ostream& os) {
    os << fmt::format("pass {}\n", ci.pass ? "true" : "false");
    os << fmt::format("min_distance {:.10g}\n", ci.min_distance);
    os << fmt::format("margin {:.10g}\n", ci.margin);
    os << fmt::format("worst_curve {}\n", ci.worst_curve);
    if (ci.nearest.is_finite()) {
      os << fmt::format("nearest {:.17g} {:.17g}\n", ci.nearest.value().real(), ci.nearest.value().imag());
    } else {
      os << "nearest inf\n";
    }
    os << fmt::format("postcritical_points {}\n", ci.postcritical_points);
  });

  const auto& dc = cx.cfg.diagnostics;
  std::vector<VolumeDecayEstimate> all;
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < dc.regions.size(); ++i) {
    const auto& rc = dc.regions[i];
    auto series = estimate_volume_series(*cx.f, Region::disc(rc.center, rc.radius), dc.volume_n_max,
                                         static_cast<std::size_t>(dc.volume_samples),
                                         derive_seed(cx.cfg.seed, 1000 + i));
    int below = -1;
    for (auto& e : series) {
      e.region_index = static_cast<int>(i);
      if (below < 0 && e.epsilon_hat < 1e-3) below = e.n;
    }
    lines.push_back(fmt::format("region {} center {:.6g} {:.6g} radius {:.6g} eps0 {:.6g} eps{} {:.6g} below_1e-3_at {}", i,
                                rc.center.real(), rc.center.imag(), rc.radius, series.front().epsilon_hat,
                                series.back().n, series.back().epsilon_hat, below));
    all.insert(all.end(), series.begin(), series.end());
  }
  cx.write("volume.csv", [&](std::ostream& os) { write_volume_csv(os, all); });
  cx.write("diagnostics.txt", [&](std::ostream& os) {
    os << fmt::format("condition_i {} min_distance {:.6g}\n", ci.pass ? "pass" : "fail", ci.min_distance);
    for (const auto& l : lines) os << l << '\n';
  });
  rec.summary.emplace_back("condition_i", ci.pass ? "pass" : "fail");
  if (!ci.pass) {
    throw Error(ErrorKind::PostcriticalViolation,
                fmt::format("base curves come within {:.3g} of the postcritical set", ci.min_distance));
  }
}

void stage_tree(Context& cx, StageRecord& rec) {
  const auto& t = cx.cfg.tree;
  TreeOptions to;
  to.max_step = t.max_step;
  to.postcritical_K = t.postcritical_K;
  to.postcritical_margin = t.postcritical_margin;
  std::vector<SymbolWord> prefixes;
  for (const auto& w : t.prefixes) prefixes.push_back(SymbolWord::parse(w));
  cx.tree = std::make_unique<CodingTree>(build_tree(*cx.g, t.root, cx.base_curves(), t.depth,
                                                    t.mode == "full" ? BuildMode::Full : BuildMode::Prefixes,
                                                    prefixes, to));
  cx.write("tree.txt", [&](std::ostream& os) { write_tree_dump(os, *cx.tree); });
  rec.summary.emplace_back("nodes", std::to_string(cx.tree->pinned_words().size()));
}

void stage_harvest(Context& cx, StageRecord& rec) {
  const auto& hc = cx.cfg.harvest;
  HarvestParams hp;
  hp.trials = hc.trials;
  hp.M_min = hc.M_min;
  hp.N_max = hc.N_max;
  hp.radii = hc.radii;
  hp.anchor_retries = hc.anchor_retries;
  hp.tail_tol = hc.tail_tol;
  hp.rotations = hc.rotations;
  hp.seed = cx.cfg.seed;
  hp.postcritical_K = cx.cfg.tree.postcritical_K;
  const auto& boundary = cx.raster ? cx.boundary : std::vector<SpherePoint>{};
  cx.harvest = harvest(*cx.f, cx.cfg.map.iterate, cx.need_tree(), cx.cfg.weights, boundary, hp);
  const auto& res = *cx.harvest;
  cx.write("harvest.jsonl", [&](std::ostream& os) { write_harvest_jsonl(os, res.records); });
  cx.write("harvest_log.txt", [&](std::ostream& os) {
    os << fmt::format("trials {} successful {} records {} slow_convergence_retries {}\n", res.trials,
                      res.successful_trials, res.records.size(), res.slow_convergence_retries);
    for (const auto& [k, v] : res.failures) os << fmt::format("failure {} {}\n", k, v);
    for (const auto& l : res.log) os << l << '\n';
  });
  cx.write("lyapunov.csv", [&](std::ostream& os) {
    os << "period,x,y,birkhoff,log_multiplier_rate\n";
    for (const auto& r : res.records) {
      const double est = lyapunov_estimate(*cx.f, {r.point}, 0, r.period);
      os << fmt::format("{},{:.17g},{:.17g},{:.12g},{:.12g}\n", r.period, r.point.value().real(),
                        r.point.value().imag(), est, std::log(std::abs(r.multiplier)) / r.period);
    }
  });
  rec.summary.emplace_back("records", std::to_string(res.records.size()));
  rec.summary.emplace_back("slow_convergence_retries", std::to_string(res.slow_convergence_retries));
}

void stage_density(Context& cx, StageRecord& rec) {
  const auto& res = cx.need_harvest();
  cx.need_raster();
  const auto rep = density_report(cx.boundary, res.records);
  cx.write("density.csv", [&](std::ostream& os) { write_density_csv(os, rep); });
  rec.summary.emplace_back("covering_radius", fmt::format("{:.6g}", rep.covering_radius));
  rec.summary.emplace_back("mean_distance", fmt::format("{:.6g}", rep.mean_distance));
}

void stage_overlay(Context& cx, StageRecord&) {
  const auto& raster = cx.need_raster();
  std::vector<Polyline> edges;
  if (cx.tree) {
    for (const auto& w : cx.tree->pinned_words()) {
      if (static_cast<int>(w.size()) <= cx.cfg.overlay.tree_depth) edges.push_back(cx.tree->node(w).edge);
    }
  }
  const std::vector<PeriodicAccessRecord> none;
  const auto& records = cx.harvest ? cx.harvest->records : none;
  OverlayOptions oo;
  oo.scale = cx.cfg.overlay.scale;
  const Image img = render_overlay(raster, edges, records, cx.f->fingerprint(), oo);
  cx.write("overlay.ppm", [&](std::ostream& os) { img.write_ppm(os); });
}

void run_stage(Stage s, Context& cx, StageRecord& rec) {
  switch (s) {
    case Stage::Census: return stage_census(cx, rec);
    case Stage::Raster: return stage_raster(cx, rec);
    case Stage::Diagnostics: return stage_diagnostics(cx, rec);
    case Stage::Tree: return stage_tree(cx, rec);
    case Stage::Harvest: return stage_harvest(cx, rec);
    case Stage::Density: return stage_density(cx, rec);
    case Stage::Overlay: return stage_overlay(cx, rec);
  }
}

void write_manifest(const Context& cx, RunManifest& m) {
  m.files = cx.files;
  std::ofstream os(cx.out / "manifest.json", std::ios::binary);
  os << manifest_json(m);
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex_digest();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot read {}", path));
  Sha256 h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    h.update(buf, static_cast<std::size_t>(in.gcount()));
  }
  return h.hex_digest();
}

RunManifest run_pipeline(const RunConfig& config, const PipelineOptions& opts) {
  validate_config(config);
  Context cx;
  cx.cfg = config;
  cx.out = config.output;
  cx.f.emplace(config.map.numerator, config.map.denominator);
  cx.g.emplace(config.map.iterate == 1 ? *cx.f : cx.f->iterate(config.map.iterate));
  fs::create_directories(cx.out);

  RunManifest m;
  m.config_sha256 = sha256_hex(serialize_config(config));
  m.versions = {{"gctree", std::string(kVersion)}};

  bool halted = false;
  for (Stage s : kAllStages) {
    if (std::find(opts.stages.begin(), opts.stages.end(), s) == opts.stages.end()) continue;
    StageRecord rec;
    rec.name = std::string(stage_name(s));
    if (halted) {
      rec.status = "skipped";
      m.stages.push_back(rec);
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    auto seconds = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
    if (!opts.quiet) std::cerr << "stage " << rec.name << " ...\n";
    try {
      if (opts.stage_timeout > 0.0) {
        std::packaged_task<void()> task([&] { run_stage(s, cx, rec); });
        auto fut = task.get_future();
        std::thread worker(std::move(task));
        if (fut.wait_for(std::chrono::duration<double>(opts.stage_timeout)) == std::future_status::timeout) {
          // The stage cannot be interrupted; record it and leave.
          StageRecord late;
          late.name = rec.name;
          late.status = "timeout";
          late.seconds = seconds();
          late.message = fmt::format("exceeded {} s", opts.stage_timeout);
          m.stages.push_back(late);
          m.exit_code = stage_timeout_code(s);
          write_manifest(cx, m);
          std::cerr << "stage " << late.name << ": " << late.message << '\n';
          std::cerr.flush();
          std::_Exit(m.exit_code);
        }
        worker.join();
        fut.get();
      } else {
        run_stage(s, cx, rec);
      }
      rec.status = "ok";
    } catch (const std::exception& e) {
      rec.status = "failed";
      rec.message = e.what();
      m.exit_code = stage_exit_code(s);
      halted = true;
      if (!opts.quiet) std::cerr << "stage " << rec.name << " failed: " << e.what() << '\n';
    }
    rec.seconds = seconds();
    m.stages.push_back(rec);
  }
  write_manifest(cx, m);
  return m;
}

std::string manifest_json(const RunManifest& m) {
  json j;
  j["config_sha256"] = m.config_sha256;
  json v = json::object();
  for (const auto& [k, val] : m.versions) v[k] = val;
  j["versions"] = v;
  json stages = json::array();
  for (const auto& s : m.stages) {
    json summary = json::object();
    for (const auto& [k, val] : s.summary) summary[k] = val;
    stages.push_back({{"name", s.name}, {"status", s.status}, {"seconds", s.seconds}, {"message", s.message},
                      {"summary", summary}});
  }
  j["stages"] = stages;
  json files = json::array();
  for (const auto& f : m.files) files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  j["files"] = files;
  j["exit_code"] = m.exit_code;
  return j.dump(2) + "\n";
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot read {}", path));
  RunManifest m;
  try {
    const json j = json::parse(in);
    m.config_sha256 = j.at("config_sha256").get<std::string>();
    for (const auto& [k, v] : j.at("versions").items()) m.versions.emplace_back(k, v.get<std::string>());
    for (const auto& s : j.at("stages")) {
      StageRecord r;
      r.name = s.at("name").get<std::string>();
      r.status = s.at("status").get<std::string>();
      r.seconds = s.at("seconds").get<double>();
      r.message = s.value("message", "");
      if (s.contains("summary")) {
        for (const auto& [k, v] : s["summary"].items()) r.summary.emplace_back(k, v.get<std::string>());
      }
      m.stages.push_back(r);
    }
    for (const auto& f : j.at("files")) {
      m.files.push_back({f.at("name").get<std::string>(), f.at("sha256").get<std::string>(),
                         f.at("bytes").get<std::uintmax_t>()});
    }
    m.exit_code = j.value("exit_code", 0);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, fmt::format("malformed manifest {}: {}", path, e.what()));
  }
  return m;
}

std::vector<std::string> verify_manifest(const std::string& dir) {
  const RunManifest m = read_manifest((fs::path(dir) / "manifest.json").string());
  std::vector<std::string> bad;
  for (const auto& f : m.files) {
    const fs::path p = fs::path(dir) / f.name;
    if (!fs::exists(p)) {
      bad.push_back(f.name + ": missing");
    } else if (sha256_file(p.string()) != f.sha256) {
      bad.push_back(f.name + ": hash differs");
    }
  }
  return bad;
}

void Image::write_ppm(std::ostream& out) const {
  out << "P6\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
}

std::optional<std::pair<int, int>> overlay_pixel(const BasinRaster& raster, cplx z, int scale) {
  const auto& b = raster.bounds;
  const double fx = (z.real() - b.xmin) / (b.xmax - b.xmin) * raster.nx * scale;
  const double fy = (b.ymax - z.imag()) / (b.ymax - b.ymin) * raster.ny * scale;
  if (!(fx >= 0.0 && fy >= 0.0 && fx < raster.nx * scale && fy < raster.ny * scale)) return std::nullopt;
  return std::pair<int, int>{static_cast<int>(fx), static_cast<int>(fy)};
}

namespace {

void put(Image& img, int x, int y, const unsigned char c[3]) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  unsigned char* p = &img.rgb[3 * (static_cast<std::size_t>(y) * img.width + x)];
  p[0] = c[0];
  p[1] = c[1];
  p[2] = c[2];
}

void draw_curve(Image& img, const BasinRaster& raster, int scale, const Polyline& curve, const unsigned char c[3]) {
  const auto& b = raster.bounds;
  const double px = (b.xmax - b.xmin) / (raster.nx * scale);
  const double py = (b.ymax - b.ymin) / (raster.ny * scale);
  const auto& pts = curve.points();
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i].is_infinite() || pts[i + 1].is_infinite()) continue;
    const cplx a = pts[i].value(), e = pts[i + 1].value();
    const double steps = std::ceil(std::max(std::abs(e.real() - a.real()) / px, std::abs(e.imag() - a.imag()) / py));
    const int n = static_cast<int>(std::min(steps, 1e5)) + 1;
    for (int k = 0; k <= n; ++k) {
      if (auto q = overlay_pixel(raster, a + (e - a) * (static_cast<double>(k) / n), scale)) put(img, q->first, q->second, c);
    }
  }
}

}  // namespace

Image render_overlay(const BasinRaster& raster, const std::vector<Polyline>& tree_edges,
                     const std::vector<PeriodicAccessRecord>& records, std::uint64_t records_map_fingerprint,
                     const OverlayOptions& opts) {
  if (raster.map_fingerprint != records_map_fingerprint) {
    throw Error(ErrorKind::MismatchedMap, "raster and records come from different maps");
  }
  const int s = std::max(1, opts.scale);
  Image img;
  img.width = raster.nx * s;
  img.height = raster.ny * s;
  img.rgb.assign(static_cast<std::size_t>(img.width) * img.height * 3, 255);
  std::vector<bool> on_boundary(raster.labels.size(), false);
  for (std::size_t c : raster.boundary_cells) on_boundary[c] = true;
  for (int j = 0; j < raster.ny; ++j) {
    for (int i = 0; i < raster.nx; ++i) {
      const std::size_t cell = static_cast<std::size_t>(j) * raster.nx + i;
      unsigned char c[3];
      label_color(raster.labels[cell], c);
      if (on_boundary[cell]) c[0] = c[1] = c[2] = 0;
      for (int dy = 0; dy < s; ++dy)
        for (int dx = 0; dx < s; ++dx) put(img, i * s + dx, j * s + dy, c);
    }
  }
  static constexpr unsigned char grey[3] = {140, 140, 140};
  static constexpr unsigned char blue[3] = {30, 60, 220};
  static constexpr unsigned char red[3] = {220, 20, 20};
  for (const auto& e : tree_edges) draw_curve(img, raster, s, e, grey);
  for (const auto& r : records) draw_curve(img, raster, s, r.Gamma, blue);
  for (const auto& r : records) {
    if (r.point.is_infinite()) continue;
    const auto q = overlay_pixel(raster, r.point.value(), s);
    if (!q) continue;
    for (int dy = -s; dy <= s; ++dy)
      for (int dx = -s; dx <= s; ++dx) put(img, q->first + dx, q->second + dy, red);
  }
  return img;
}

}  // namespace gct
