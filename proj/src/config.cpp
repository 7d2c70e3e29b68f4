#include "gctree/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "gctree/error.hpp"
#include "gctree/rational_map.hpp"
#include "gctree/symbol_word.hpp"

namespace gct {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::InvalidConfig, fmt::format("{}: {}", path, what));
}

double num(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      bad(path, fmt::format("'{}' is not a number", s));
    }
    if (used != s.size()) bad(path, fmt::format("'{}' is not a number", s));
    return v;
  }
  bad(path, "expected a number");
}

long long integer(const json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<long long>();
  const double v = num(j, path);
  if (v != std::floor(v) || std::abs(v) > 9e15) bad(path, "expected an integer");
  return static_cast<long long>(v);
}

cplx complex(const json& j, const std::string& path) {
  if (j.is_array() && j.size() == 2) return {num(j[0], path + "[0]"), num(j[1], path + "[1]")};
  if (j.is_number() || j.is_string()) return {num(j, path), 0.0};
  bad(path, "expected [re, im]");
}

std::vector<cplx> complex_list(const json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected a list of [re, im] pairs");
  std::vector<cplx> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(complex(j[i], fmt::format("{}[{}]", path, i)));
  return out;
}

std::vector<double> real_list(const json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(num(j[i], fmt::format("{}[{}]", path, i)));
  return out;
}

// Reads j[key] into out when present.
template <class F>
void opt(const json& j, const char* key, const std::string& path, F&& read) {
  if (!j.is_object()) bad(path, "expected an object");
  if (auto it = j.find(key); it != j.end()) read(*it, path.empty() ? std::string(key) : path + "." + key);
}

void get_int(const json& j, const char* key, const std::string& path, int& out) {
  opt(j, key, path, [&](const json& v, const std::string& p) {
    const long long x = integer(v, p);
    if (x < INT32_MIN || x > INT32_MAX) bad(p, "out of range");
    out = static_cast<int>(x);
  });
}

void get_double(const json& j, const char* key, const std::string& path, double& out) {
  opt(j, key, path, [&](const json& v, const std::string& p) { out = num(v, p); });
}

json pair(cplx z) { return json::array({z.real(), z.imag()}); }

json pairs(const std::vector<cplx>& zs) {
  json a = json::array();
  for (const auto& z : zs) a.push_back(pair(z));
  return a;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidConfig, fmt::format("not valid JSON: {}", e.what()));
  }
  if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, "top level must be an object");
  static const char* known[] = {"name",  "map",     "basin",       "tree",    "weights", "harvest",
                                "raster", "census", "diagnostics", "overlay", "seed",    "output"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) bad(key, "unknown key");
  }

  RunConfig c;
  opt(j, "name", "", [&](const json& v, const std::string& p) {
    if (!v.is_string()) bad(p, "expected a string");
    c.name = v.get<std::string>();
  });
  opt(j, "output", "", [&](const json& v, const std::string& p) {
    if (!v.is_string()) bad(p, "expected a string");
    c.output = v.get<std::string>();
  });
  opt(j, "seed", "", [&](const json& v, const std::string& p) {
    if (v.is_number_unsigned()) {
      c.seed = v.get<std::uint64_t>();
    } else {
      const long long s = integer(v, p);
      if (s < 0) bad(p, "seed must be >= 0");
      c.seed = static_cast<std::uint64_t>(s);
    }
  });
  opt(j, "map", "", [&](const json& m, const std::string& p) {
    opt(m, "numerator", p, [&](const json& v, const std::string& q) { c.map.numerator = complex_list(v, q); });
    opt(m, "denominator", p, [&](const json& v, const std::string& q) { c.map.denominator = complex_list(v, q); });
    get_int(m, "iterate", p, c.map.iterate);
  });
  opt(j, "basin", "", [&](const json& b, const std::string& p) {
    get_int(b, "period", p, c.basin.period);
    opt(b, "near", p, [&](const json& v, const std::string& q) { c.basin.near = complex(v, q); });
  });
  opt(j, "tree", "", [&](const json& t, const std::string& p) {
    opt(t, "root", p, [&](const json& v, const std::string& q) { c.tree.root = complex(v, q); });
    opt(t, "base_curves", p, [&](const json& v, const std::string& q) {
      if (!v.is_array()) bad(q, "expected a list of curves");
      for (std::size_t i = 0; i < v.size(); ++i) c.tree.base_curves.push_back(complex_list(v[i], fmt::format("{}[{}]", q, i)));
    });
    get_int(t, "depth", p, c.tree.depth);
    opt(t, "mode", p, [&](const json& v, const std::string& q) {
      if (!v.is_string()) bad(q, "expected a string");
      c.tree.mode = v.get<std::string>();
    });
    opt(t, "prefixes", p, [&](const json& v, const std::string& q) {
      if (!v.is_array()) bad(q, "expected a list of words");
      for (const auto& w : v) {
        if (!w.is_string()) bad(q, "words are strings");
        c.tree.prefixes.push_back(w.get<std::string>());
      }
    });
    get_double(t, "max_step", p, c.tree.max_step);
    get_int(t, "postcritical_K", p, c.tree.postcritical_K);
    get_double(t, "postcritical_margin", p, c.tree.postcritical_margin);
  });
  opt(j, "weights", "", [&](const json& v, const std::string& p) { c.weights = real_list(v, p); });
  opt(j, "harvest", "", [&](const json& h, const std::string& p) {
    get_int(h, "trials", p, c.harvest.trials);
    get_int(h, "M_min", p, c.harvest.M_min);
    get_int(h, "N_max", p, c.harvest.N_max);
    opt(h, "radii", p, [&](const json& v, const std::string& q) { c.harvest.radii = real_list(v, q); });
    get_double(h, "tail_tol", p, c.harvest.tail_tol);
    get_int(h, "anchor_retries", p, c.harvest.anchor_retries);
    opt(h, "rotations", p, [&](const json& v, const std::string& q) {
      if (!v.is_boolean()) bad(q, "expected true or false");
      c.harvest.rotations = v.get<bool>();
    });
  });
  opt(j, "raster", "", [&](const json& r, const std::string& p) {
    opt(r, "bounds", p, [&](const json& v, const std::string& q) {
      const auto b = real_list(v, q);
      if (b.size() != 4) bad(q, "expected [xmin, xmax, ymin, ymax]");
      c.raster.bounds = {b[0], b[1], b[2], b[3]};
    });
    get_int(r, "nx", p, c.raster.nx);
    get_int(r, "ny", p, c.raster.ny);
    get_int(r, "max_iters", p, c.raster.max_iters);
  });
  opt(j, "census", "", [&](const json& v, const std::string& p) { get_int(v, "max_period", p, c.census_max_period); });
  opt(j, "diagnostics", "", [&](const json& d, const std::string& p) {
    opt(d, "regions", p, [&](const json& v, const std::string& q) {
      if (!v.is_array()) bad(q, "expected a list of regions");
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string qi = fmt::format("{}[{}]", q, i);
        RegionConfig rc;
        opt(v[i], "center", qi, [&](const json& x, const std::string& s) { rc.center = complex(x, s); });
        get_double(v[i], "radius", qi, rc.radius);
        c.diagnostics.regions.push_back(rc);
      }
    });
    get_int(d, "volume_n_max", p, c.diagnostics.volume_n_max);
    get_int(d, "volume_samples", p, c.diagnostics.volume_samples);
  });
  opt(j, "overlay", "", [&](const json& o, const std::string& p) {
    get_int(o, "scale", p, c.overlay.scale);
    get_int(o, "tree_depth", p, c.overlay.tree_depth);
  });
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidConfig, fmt::format("cannot read {}", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  json j;
  j["name"] = c.name;
  j["map"] = {{"numerator", pairs(c.map.numerator)}, {"denominator", pairs(c.map.denominator)}, {"iterate", c.map.iterate}};
  j["basin"] = {{"period", c.basin.period}, {"near", pair(c.basin.near)}};
  json curves = json::array();
  for (const auto& cv : c.tree.base_curves) curves.push_back(pairs(cv));
  j["tree"] = {{"root", pair(c.tree.root)},
               {"base_curves", curves},
               {"depth", c.tree.depth},
               {"mode", c.tree.mode},
               {"prefixes", c.tree.prefixes},
               {"max_step", c.tree.max_step},
               {"postcritical_K", c.tree.postcritical_K},
               {"postcritical_margin", c.tree.postcritical_margin}};
  j["weights"] = c.weights;
  j["harvest"] = {{"trials", c.harvest.trials},     {"M_min", c.harvest.M_min},
                  {"N_max", c.harvest.N_max},       {"radii", c.harvest.radii},
                  {"tail_tol", c.harvest.tail_tol}, {"anchor_retries", c.harvest.anchor_retries},
                  {"rotations", c.harvest.rotations}};
  const auto& b = c.raster.bounds;
  j["raster"] = {{"bounds", {b.xmin, b.xmax, b.ymin, b.ymax}},
                 {"nx", c.raster.nx},
                 {"ny", c.raster.ny},
                 {"max_iters", c.raster.max_iters}};
  j["census"] = {{"max_period", c.census_max_period}};
  json regions = json::array();
  for (const auto& r : c.diagnostics.regions) regions.push_back({{"center", pair(r.center)}, {"radius", r.radius}});
  j["diagnostics"] = {{"regions", regions},
                      {"volume_n_max", c.diagnostics.volume_n_max},
                      {"volume_samples", c.diagnostics.volume_samples}};
  j["overlay"] = {{"scale", c.overlay.scale}, {"tree_depth", c.overlay.tree_depth}};
  j["seed"] = c.seed;
  j["output"] = c.output;
  return j.dump(2) + "\n";
}

std::vector<std::string> config_problems(const RunConfig& c) {
  std::vector<std::string> p;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) p.push_back(msg);
  };
  int tree_degree = 0;
  try {
    const RationalMap f(c.map.numerator, c.map.denominator);
    tree_degree = f.degree();
    for (int i = 1; i < c.map.iterate && tree_degree < 1 << 20; ++i) tree_degree *= f.degree();
  } catch (const Error& e) {
    p.push_back(fmt::format("map: {}", e.what()));
  }
  need(c.map.iterate >= 1, "map.iterate must be >= 1");
  need(c.basin.period >= 1, "basin.period must be >= 1");

  const std::size_t d = c.tree.base_curves.size();
  need(d >= 2, "tree.base_curves needs at least two curves");
  need(d == c.weights.size(), fmt::format("{} base curves but {} weights", d, c.weights.size()));
  if (tree_degree > 0) need(static_cast<int>(d) <= tree_degree, "more base curves than the tree map degree");
  for (std::size_t i = 0; i < d; ++i) {
    need(c.tree.base_curves[i].size() >= 2, fmt::format("tree.base_curves[{}] needs two or more vertices", i));
  }
  need(c.tree.depth >= 1, "tree.depth must be >= 1");
  need(c.tree.mode == "full" || c.tree.mode == "prefixes", "tree.mode must be full or prefixes");
  for (const auto& w : c.tree.prefixes) {
    try {
      if (SymbolWord::parse(w).max_symbol() > d) p.push_back(fmt::format("tree.prefixes: {} uses a symbol beyond {}", w, d));
    } catch (const Error& e) {
      p.push_back(fmt::format("tree.prefixes: {}", e.what()));
    }
  }
  need(c.tree.max_step > 0.0, "tree.max_step must be positive");
  need(c.tree.postcritical_K >= 1, "tree.postcritical_K must be >= 1");
  need(c.tree.postcritical_margin > 0.0, "tree.postcritical_margin must be positive");

  double sum = 0.0;
  bool positive = true;
  for (double w : c.weights) {
    sum += w;
    positive = positive && w > 0.0;
  }
  need(positive, "weights must be positive");
  need(std::abs(sum - 1.0) <= 1e-9, fmt::format("weights sum to {}, not 1", sum));

  need(c.harvest.trials >= 1, "harvest.trials must be >= 1");
  need(c.harvest.M_min >= 0, "harvest.M_min must be >= 0");
  // N_max = 0 is allowed here; the harvest stage reports it.
  need(c.harvest.N_max >= 0, "harvest.N_max must be >= 0");
  need(!c.harvest.radii.empty(), "harvest.radii is empty");
  for (double r : c.harvest.radii) need(r > 0.0, "harvest.radii must be positive");
  need(c.harvest.tail_tol > 0.0, "harvest.tail_tol must be positive");
  need(c.harvest.anchor_retries >= 0, "harvest.anchor_retries must be >= 0");

  const auto& b = c.raster.bounds;
  need(b.xmax > b.xmin && b.ymax > b.ymin, "raster.bounds must have xmin < xmax and ymin < ymax");
  need(c.raster.nx >= 1 && c.raster.ny >= 1, "raster size must be positive");
  need(c.raster.max_iters >= 1, "raster.max_iters must be >= 1");
  need(c.census_max_period >= 1, "census.max_period must be >= 1");
  for (const auto& r : c.diagnostics.regions) need(r.radius > 0.0, "diagnostics region radius must be positive");
  need(c.diagnostics.volume_n_max >= 0, "diagnostics.volume_n_max must be >= 0");
  need(c.diagnostics.volume_samples >= 1000, "diagnostics.volume_samples must be >= 1000");
  need(c.overlay.scale >= 1 && c.overlay.scale <= 16, "overlay.scale must be in 1..16");
  need(c.overlay.tree_depth >= 0, "overlay.tree_depth must be >= 0");
  need(!c.output.empty(), "output must name a directory");
  return p;
}

void validate_config(const RunConfig& c) {
  const auto p = config_problems(c);
  if (p.empty()) return;
  std::string msg;
  for (const auto& s : p) msg += (msg.empty() ? "" : "; ") + s;
  throw Error(ErrorKind::InvalidConfig, msg);
}

}  // namespace gct
