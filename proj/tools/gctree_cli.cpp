#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gctree/error.hpp"
#include "gctree/pipeline.hpp"

using namespace gct;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  double stage_timeout = 0.0;
  bool verbose = false;
};

void add_flags(CLI::App* cmd, Flags& f, bool config_required) {
  auto* c = cmd->add_option("--config", f.config, "run config (JSON)");
  if (config_required) c->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory (overrides the config)");
  cmd->add_option("--seed", f.seed, "master seed (overrides the config)");
  cmd->add_option("--stage-timeout", f.stage_timeout, "seconds allowed per stage, 0 for none")->check(CLI::NonNegativeNumber);
  cmd->add_flag("-v,--verbose", f.verbose, "print stage progress");
}

void print_manifest(const RunManifest& m) {
  for (const auto& s : m.stages) {
    std::cout << fmt::format("{:<12} {:<8} {:8.2f}s", s.name, s.status, s.seconds);
    for (const auto& [k, v] : s.summary) std::cout << ' ' << k << '=' << v;
    if (!s.message.empty()) std::cout << "  " << s.message;
    std::cout << '\n';
  }
}

int run_verb(const Flags& flags, std::vector<Stage> stages) {
  RunConfig cfg;
  try {
    cfg = load_config(flags.config);
    if (!flags.out.empty()) cfg.output = flags.out;
    if (flags.seed) cfg.seed = *flags.seed;
    validate_config(cfg);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return kExitInvalidConfig;
  }
  PipelineOptions po;
  po.stages = std::move(stages);
  po.stage_timeout = flags.stage_timeout;
  po.quiet = !flags.verbose;
  const RunManifest m = run_pipeline(cfg, po);
  print_manifest(m);
  std::cout << "output " << cfg.output << '\n';
  return m.exit_code;
}

int report(const Flags& flags) {
  std::string dir = flags.out;
  if (dir.empty() && !flags.config.empty()) {
    try {
      dir = load_config(flags.config).output;
    } catch (const Error& e) {
      std::cerr << e.what() << '\n';
      return kExitInvalidConfig;
    }
  }
  if (dir.empty()) {
    std::cerr << "report needs --out or --config\n";
    return kExitInvalidConfig;
  }
  try {
    const RunManifest m = read_manifest(dir + "/manifest.json");
    std::cout << "config sha256 " << m.config_sha256 << '\n';
    print_manifest(m);
    for (const auto& f : m.files) std::cout << fmt::format("{:<22} {:>10} {}\n", f.name, f.bytes, f.sha256);
    const auto bad = verify_manifest(dir);
    for (const auto& b : bad) std::cout << "MISMATCH " << b << '\n';
    if (!bad.empty()) return kExitManifestMismatch;
    std::cout << "all " << m.files.size() << " files match\n";
    return m.exit_code;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return kExitManifestMismatch;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric coding trees and boundary periodic points"};
  app.require_subcommand(1);
  Flags flags;
  auto* census = app.add_subcommand("census", "periodic orbit census");
  auto* tree = app.add_subcommand("tree", "build and dump the coding tree");
  auto* diagnose = app.add_subcommand("diagnose", "tree conditions and preimage volume decay");
  auto* harvest = app.add_subcommand("harvest", "raster, tree, harvest and density");
  auto* rep = app.add_subcommand("report", "summarize a run directory and check its hashes");
  auto* run = app.add_subcommand("run", "full pipeline");
  for (auto* c : {census, tree, diagnose, harvest, run}) add_flags(c, flags, true);
  add_flags(rep, flags, false);
  CLI11_PARSE(app, argc, argv);

  if (census->parsed()) return run_verb(flags, {Stage::Census});
  if (tree->parsed()) return run_verb(flags, {Stage::Tree});
  if (diagnose->parsed()) return run_verb(flags, {Stage::Diagnostics});
  if (harvest->parsed()) return run_verb(flags, {Stage::Raster, Stage::Tree, Stage::Harvest, Stage::Density});
  if (run->parsed()) return run_verb(flags, {std::begin(kAllStages), std::end(kAllStages)});
  return report(flags);
}
