#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "curator/learner.hpp"
#include "curator/pool.hpp"
#include "curator/taxonomy.hpp"
#include "curator/types.hpp"

namespace curator {

enum class Strategy { Random, Entropy, Margin, CoreSet, ClusterMargin };

std::optional<Strategy> strategy_from_name(const std::string& name);
const char* strategy_name(Strategy s);

struct ALConfig {
  int rounds = 1;           // T >= 1
  int batch = 1;            // B >= 1
  Strategy strategy = Strategy::Random;
  bool rectify = true;
  std::size_t top_k = 5;
  std::size_t related_levels = 1;
  int det_min_proposals = 2;
  int det_max_identical = 15;
  int votes = 5;
  int vote_threshold = 3;
  double annotator_error = 0.0;  // e in [0, 1)
  std::size_t cluster_count = 10;
  double margin_multiplier = 2.0;  // gamma >= 1
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

struct RoundReport {
  int round = 0;
  std::size_t rectified_count = 0;  // |P^R(r)|
  std::size_t sampled_count = 0;    // |S^U(r)|
  std::size_t valid_count = 0;      // |S^L(r)|
  std::size_t labeled_total = 0;    // |P^L(r)|
  double eval_accuracy = 0.0;
  double elapsed_ms = 0.0;
};

// Keeps the samples whose top-k predicted concepts overlap the related
// categories of their query word. Order preserved.
std::vector<Sample> rectify_classification(const LearnerState& state,
                                           const std::vector<Sample>& unlabeled,
                                           const LabelSystem& sys,
                                           std::size_t top_k,
                                           std::size_t related_levels);

// Keeps the samples with at least min_proposals proposals and no single
// category carrying more than max_identical of them.
std::vector<Sample> rectify_detection(const std::vector<Sample>& samples,
                                      int min_proposals, int max_identical);

// Uniform without replacement. Pick j draws rng(seed, kSelect, j) and
// indexes it modulo the remaining candidate count (candidates kept in
// ascending-id order, chosen ones removed in place).
std::vector<SampleId> sample_random(const std::vector<Sample>& pool,
                                    std::size_t batch, std::uint64_t seed);

enum class UncertaintyScore { Entropy, Margin };

// Entropy: top-batch by descending entropy. Margin: by ascending margin.
// Ties prefer the smaller sample id.
std::vector<SampleId> sample_uncertainty(const LearnerState& state,
                                         const std::vector<Sample>& pool,
                                         std::size_t batch,
                                         UncertaintyScore score);

// k-center greedy: centers start as the labeled features (or the
// smallest-id pool sample when none, which then counts as selected); each
// step picks the sample with the largest min-distance to the centers.
std::vector<SampleId> sample_coreset(
    const std::vector<std::vector<double>>& labeled_features,
    const std::vector<Sample>& pool, std::size_t batch);

// Margin candidates diversified over agglomerative clusters: take
// ceil(gamma*batch) smallest-margin candidates, then round-robin the
// represented clusters in ascending candidate-count order, smallest margin
// first within a cluster.
std::vector<SampleId> sample_cluster_margin(const LearnerState& state,
                                            const std::vector<Sample>& pool,
                                            std::size_t batch,
                                            std::size_t cluster_count,
                                            double margin_multiplier,
                                            std::uint64_t seed);

struct AnnotateResult {
  std::vector<LabeledSample> accepted;  // label = query word
  std::size_t rejected = 0;
};

// Each of cfg.votes simulated annotators reports the true validity (kind ==
// InDistribution) with probability 1 - e; a sample is accepted when at
// least cfg.vote_threshold answers are positive. Vote draws are keyed by
// (round, sample id, annotator index).
AnnotateResult annotate(const std::vector<Sample>& sampled, const ALConfig& cfg,
                        int round);

using EvalSet = std::vector<std::pair<std::vector<double>, ConceptId>>;

// Algorithm: per round, rectify the unlabeled pool (when enabled), sample
// at most cfg.batch from it, annotate, remove everything sampled from the
// unlabeled pool, add accepted samples to the labeled pool, retrain.
// Deterministic given cfg.seed.
std::vector<RoundReport> run_loop(const ALConfig& cfg, const LabelSystem& sys,
                                  PoolState& pool, const EvalSet& eval_set);

// CSV: "round,rectified,sampled,valid,labeled_total,accuracy,ms".
void write_reports_csv(const std::vector<RoundReport>& reports,
                       std::ostream& out);
// Single-round JSON object (the runs/<name>/round_<r>.json payload).
std::string round_report_json(const RoundReport& report);

}  // namespace curator
