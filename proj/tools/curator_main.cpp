// Command-line front door: build taxonomies, dedup hash lists, run the
// simulated active-annotation experiments, and pretty-print comparisons.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "curator/errors.hpp"
#include "curator/simulate.hpp"

namespace fs = std::filesystem;

namespace {

struct TaxonomyArgs {
  std::string base;
  std::string external;
  std::string embeddings;
  double min_sim = 0.5;
  std::string out = ".";
};

struct DedupArgs {
  std::string crawled;
  std::string downstream;
  std::string out = "kept.txt";
};

struct SimulateArgs {
  std::string config;
  std::string out_override;
  long long seed_override = -1;
  bool has_seed = false;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curator: label-system, dedup and active-annotation toolkit"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("--quiet", quiet, "suppress progress output");

  auto* taxonomy = app.add_subcommand("taxonomy", "label system operations");
  taxonomy->require_subcommand(1);
  TaxonomyArgs targs;
  auto* tax_build = taxonomy->add_subcommand(
      "build", "integrate external concepts into a base taxonomy");
  tax_build->add_option("--base", targs.base, "base taxonomy file")->required();
  tax_build->add_option("--external", targs.external,
                        "external concepts (JSON lines)")
      ->required();
  tax_build->add_option("--embeddings", targs.embeddings,
                        "embedding table for cosine linking");
  tax_build->add_option("--min-sim", targs.min_sim,
                        "cosine similarity threshold");
  tax_build->add_option("--out", targs.out, "output directory");

  DedupArgs dargs;
  auto* dedup = app.add_subcommand(
      "dedup", "drop crawled ids whose hash appears downstream");
  dedup->add_option("--crawled", dargs.crawled, "crawled hash list")->required();
  dedup->add_option("--downstream", dargs.downstream, "downstream hash list")
      ->required();
  dedup->add_option("--out", dargs.out, "kept ids output file");

  SimulateArgs sargs;
  auto* simulate = app.add_subcommand(
      "simulate", "run the strategy-comparison experiment");
  simulate->add_option("--config", sargs.config, "run config file")->required();
  simulate->add_option("--out", sargs.out_override, "override [run] out");
  auto* seed_opt =
      simulate->add_option("--seed", sargs.seed_override, "override [al] seed");

  std::string report_path;
  auto* report = app.add_subcommand(
      "report", "print a comparison.json as an aligned table");
  report->add_option("file", report_path, "comparison JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (tax_build->parsed()) {
      const curator::IntegrationReport rep = curator::run_taxonomy_build(
          targs.base, targs.external, targs.embeddings, targs.min_sim, targs.out);
      if (!quiet)
        std::cout << "linked " << (rep.linked_subclass_of + rep.linked_head_parse +
                                   rep.linked_embedding)
                  << " of " << rep.outcomes.size() << " concepts ("
                  << rep.already_present << " already present, " << rep.no_match
                  << " unmatched, " << rep.errors << " errors)\n";
      return 0;
    }
    if (dedup->parsed()) {
      const std::size_t discarded =
          curator::run_dedup(dargs.crawled, dargs.downstream, dargs.out);
      std::cout << discarded << '\n';
      return 0;
    }
    if (simulate->parsed()) {
      std::ifstream in(sargs.config);
      if (!in) {
        std::cerr << "cannot open config: " << sargs.config << '\n';
        return 1;
      }
      curator::RunConfig cfg = curator::load_run_config(
          in, fs::path(sargs.config).parent_path().string());
      if (!sargs.out_override.empty()) cfg.out_dir = sargs.out_override;
      if (seed_opt->count() > 0)
        cfg.al.seed = static_cast<std::uint64_t>(sargs.seed_override);
      const curator::Comparison comparison = curator::run_experiment(cfg);
      if (!quiet) {
        std::cout << "wrote " << (fs::path(cfg.out_dir) / "comparison.json").string()
                  << '\n'
                  << curator::render_comparison_table(
                         curator::comparison_json(comparison, cfg));
      }
      return 0;
    }
    if (report->parsed()) {
      std::ifstream in(report_path);
      if (!in) {
        std::cerr << "cannot open: " << report_path << '\n';
        return 1;
      }
      std::ostringstream buf;
      buf << in.rdbuf();
      std::cout << curator::render_comparison_table(buf.str());
      return 0;
    }
  } catch (const curator::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
