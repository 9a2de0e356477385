#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "curator/active.hpp"
#include "curator/pool.hpp"
#include "curator/taxonomy.hpp"

namespace curator {

// Everything a strategy-comparison experiment needs: the per-round loop
// configuration plus the pool recipe, taxonomy, output location, the
// strategy list and how many seeds to average over.
struct RunConfig {
  std::string out_dir;
  std::vector<Strategy> strategies;
  int repeat = 1;
  std::string pool_spec_path;
  std::string taxonomy_path;
  int eval_per_class = 20;
  ALConfig al;
};

// Flat key-value config with [run] / [pool] / [al] sections; '#' comments.
// Relative file paths are resolved against `config_dir`. Unknown keys and
// malformed values raise ConfigError with the "section.key" path.
RunConfig load_run_config(std::istream& in, const std::string& config_dir);

// JSON pool recipe (see README for the schema).
PoolSpec load_pool_spec(std::istream& in);

// Held-out in-distribution eval samples, per_class per class, drawn on the
// kEval stream of the spec's seed.
EvalSet make_eval_set(const PoolSpec& spec, int per_class);

// Generates the pool and runs the cold start against the simulated
// annotator vote (round 0 of cfg's vote stream).
PoolState build_cold_pool(const PoolSpec& spec, const ALConfig& cfg,
                          std::size_t quota = 50);

struct CellStats {
  double mean_total_valid = 0;     // cumulative valid count, averaged over seeds
  double mean_final_accuracy = 0;  // last-round eval accuracy, averaged
};

// strategy name -> {"off", "on"} -> stats
using Comparison = std::map<std::string, std::map<std::string, CellStats>>;

// Runs every strategy x {rectify on, off} x seed cell, writing
//   <out>/runs/<Strategy>_<on|off>/seed_<i>/rounds.csv and round_<r>.json
// and <out>/comparison.json. Timing never enters comparison.json, so rerun
// outputs are byte-identical.
Comparison run_experiment(const RunConfig& cfg);

std::string comparison_json(const Comparison& comparison, const RunConfig& cfg);

// Pretty-prints a comparison.json payload as an aligned text table.
std::string render_comparison_table(const std::string& json_text);

// `taxonomy build` driver: integrates the external concepts into the base
// system and writes <out>/taxonomy.txt + <out>/integration_report.json.
// An empty embeddings_path skips Solution 3 lookups (an empty table).
IntegrationReport run_taxonomy_build(const std::string& base_path,
                                     const std::string& external_path,
                                     const std::string& embeddings_path,
                                     double min_sim,
                                     const std::string& out_dir);

// `dedup` driver: filters crawled hashes against the downstream set and
// writes the kept ids, one per line. Returns the discarded count.
std::size_t run_dedup(const std::string& crawled_path,
                      const std::string& downstream_path,
                      const std::string& out_path);

}  // namespace curator
