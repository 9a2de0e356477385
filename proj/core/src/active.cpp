#include "curator/active.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "curator/clustering.hpp"
#include "curator/errors.hpp"
#include "curator/rng.hpp"

namespace curator {

std::optional<Strategy> strategy_from_name(const std::string& name) {
  if (name == "Random") return Strategy::Random;
  if (name == "Entropy") return Strategy::Entropy;
  if (name == "Margin") return Strategy::Margin;
  if (name == "CoreSet") return Strategy::CoreSet;
  if (name == "ClusterMargin") return Strategy::ClusterMargin;
  return std::nullopt;
}

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Random: return "Random";
    case Strategy::Entropy: return "Entropy";
    case Strategy::Margin: return "Margin";
    case Strategy::CoreSet: return "CoreSet";
    case Strategy::ClusterMargin: return "ClusterMargin";
  }
  return "?";
}

std::vector<Sample> rectify_classification(const LearnerState& state,
                                           const std::vector<Sample>& unlabeled,
                                           const LabelSystem& sys,
                                           std::size_t top_k,
                                           std::size_t related_levels) {
  // Pools share a handful of query words, so the related sets are memoized.
  std::map<ConceptId, std::set<ConceptId>> related_cache;
  std::vector<Sample> kept;
  kept.reserve(unlabeled.size());
  for (const Sample& s : unlabeled) {
    auto it = related_cache.find(s.query);
    if (it == related_cache.end())
      it = related_cache
               .emplace(s.query, sys.related_categories(s.query, related_levels))
               .first;
    const std::set<ConceptId>& related = it->second;
    const Prediction pred = predict(state, s.features, top_k);
    const bool overlaps =
        std::any_of(pred.ranked.begin(), pred.ranked.end(),
                    [&](const auto& rc) { return related.count(rc.first) > 0; });
    if (overlaps) kept.push_back(s);
  }
  return kept;
}

std::vector<Sample> rectify_detection(const std::vector<Sample>& samples,
                                      int min_proposals, int max_identical) {
  std::vector<Sample> kept;
  kept.reserve(samples.size());
  for (const Sample& s : samples) {
    if (!s.proposals) throw MissingProposalsError(s.id);
    if (static_cast<int>(s.proposals->size()) < min_proposals) continue;
    std::map<ConceptId, int> per_category;
    bool crowded = false;
    for (const Proposal& p : *s.proposals) {
      if (++per_category[p.category] > max_identical) {
        crowded = true;
        break;
      }
    }
    if (!crowded) kept.push_back(s);
  }
  return kept;
}

std::vector<SampleId> sample_random(const std::vector<Sample>& pool,
                                    std::size_t batch, std::uint64_t seed) {
  std::vector<SampleId> remaining;
  remaining.reserve(pool.size());
  for (const Sample& s : pool) remaining.push_back(s.id);
  std::sort(remaining.begin(), remaining.end());
  std::vector<SampleId> picked;
  picked.reserve(std::min(batch, remaining.size()));
  for (std::size_t j = 0; j < batch && !remaining.empty(); ++j) {
    const std::size_t idx =
        rng::draw(seed, rng::kSelect, j) % remaining.size();
    picked.push_back(remaining[idx]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(idx));
  }
  return picked;
}

std::vector<SampleId> sample_uncertainty(const LearnerState& state,
                                         const std::vector<Sample>& pool,
                                         std::size_t batch,
                                         UncertaintyScore score) {
  if (state.classes.size() < 2) throw SingleClassError();
  std::vector<std::pair<double, SampleId>> scored;
  scored.reserve(pool.size());
  for (const Sample& s : pool) {
    const double v = score == UncertaintyScore::Entropy
                         ? -entropy(state, s.features)  // descending entropy
                         : margin(state, s.features);   // ascending margin
    scored.emplace_back(v, s.id);
  }
  std::sort(scored.begin(), scored.end());
  if (batch < scored.size()) scored.resize(batch);
  std::vector<SampleId> picked;
  picked.reserve(scored.size());
  for (const auto& [_, id] : scored) picked.push_back(id);
  return picked;
}

std::vector<SampleId> sample_coreset(
    const std::vector<std::vector<double>>& labeled_features,
    const std::vector<Sample>& pool, std::size_t batch) {
  std::vector<const Sample*> candidates;
  candidates.reserve(pool.size());
  for (const Sample& s : pool) candidates.push_back(&s);
  std::sort(candidates.begin(), candidates.end(),
            [](const Sample* a, const Sample* b) { return a->id < b->id; });

  std::vector<SampleId> picked;
  if (candidates.empty() || batch == 0) return picked;

  auto dist = [](const std::vector<double>& a, const std::vector<double>& b) {
    double d2 = 0;
    for (std::size_t t = 0; t < a.size(); ++t) {
      const double diff = a[t] - b[t];
      d2 += diff * diff;
    }
    return std::sqrt(d2);
  };

  // min distance from each candidate to the current center set
  std::vector<double> min_dist(candidates.size(),
                               std::numeric_limits<double>::infinity());
  std::vector<bool> taken(candidates.size(), false);

  auto absorb_center = [&](const std::vector<double>& center) {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (taken[i]) continue;
      min_dist[i] = std::min(min_dist[i], dist(candidates[i]->features, center));
    }
  };

  std::size_t want = batch;
  if (labeled_features.empty()) {
    // No labeled centers yet: seed with the smallest-id sample, which
    // counts against the budget.
    taken[0] = true;
    picked.push_back(candidates[0]->id);
    absorb_center(candidates[0]->features);
    --want;
  } else {
    for (const auto& c : labeled_features) absorb_center(c);
  }

  for (std::size_t step = 0; step < want; ++step) {
    std::ptrdiff_t arg = -1;
    double best = -1;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (taken[i]) continue;
      if (min_dist[i] > best) {  // ties keep the earlier (smaller) id
        best = min_dist[i];
        arg = static_cast<std::ptrdiff_t>(i);
      }
    }
    if (arg < 0) break;  // pool exhausted
    taken[static_cast<std::size_t>(arg)] = true;
    picked.push_back(candidates[static_cast<std::size_t>(arg)]->id);
    absorb_center(candidates[static_cast<std::size_t>(arg)]->features);
  }
  return picked;
}

std::vector<SampleId> sample_cluster_margin(const LearnerState& state,
                                            const std::vector<Sample>& pool,
                                            std::size_t batch,
                                            std::size_t cluster_count,
                                            double margin_multiplier,
                                            std::uint64_t /*seed*/) {
  if (state.classes.size() < 2) throw SingleClassError();
  if (pool.empty() || batch == 0) return {};

  std::vector<const Sample*> items;
  items.reserve(pool.size());
  for (const Sample& s : pool) items.push_back(&s);
  std::sort(items.begin(), items.end(),
            [](const Sample* a, const Sample* b) { return a->id < b->id; });

  if (items.size() <= batch) {
    std::vector<SampleId> all;
    for (const Sample* s : items) all.push_back(s->id);
    return all;
  }

  std::vector<std::vector<double>> features;
  features.reserve(items.size());
  for (const Sample* s : items) features.push_back(s->features);
  const std::vector<std::size_t> cluster_of =
      cluster_average_linkage(features, cluster_count);

  // Candidate set: ceil(gamma * batch) smallest margins, ties by smaller id.
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<double> margins(items.size());
  for (std::size_t i = 0; i < items.size(); ++i)
    margins[i] = margin(state, items[i]->features);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (margins[a] != margins[b]) return margins[a] < margins[b];
    return items[a]->id < items[b]->id;
  });
  const std::size_t m = std::min<std::size_t>(
      items.size(),
      static_cast<std::size_t>(std::ceil(margin_multiplier * batch)));
  order.resize(m);

  // Group candidates per cluster; each queue stays in (margin, id) order.
  std::map<std::size_t, std::vector<std::size_t>> queues;
  for (std::size_t idx : order) queues[cluster_of[idx]].push_back(idx);

  // Round-robin clusters by ascending candidate count; ties prefer the
  // cluster whose best candidate has the smaller sample id.
  std::vector<std::map<std::size_t, std::vector<std::size_t>>::iterator> rosters;
  for (auto it = queues.begin(); it != queues.end(); ++it) rosters.push_back(it);
  std::sort(rosters.begin(), rosters.end(), [&](auto a, auto b) {
    if (a->second.size() != b->second.size())
      return a->second.size() < b->second.size();
    return items[a->second.front()]->id < items[b->second.front()]->id;
  });

  std::vector<SampleId> picked;
  picked.reserve(batch);
  std::vector<std::size_t> cursor(rosters.size(), 0);
  while (picked.size() < batch) {
    bool advanced = false;
    for (std::size_t q = 0; q < rosters.size() && picked.size() < batch; ++q) {
      if (cursor[q] >= rosters[q]->second.size()) continue;
      picked.push_back(items[rosters[q]->second[cursor[q]++]]->id);
      advanced = true;
    }
    if (!advanced) break;  // all candidates consumed
  }
  return picked;
}

AnnotateResult annotate(const std::vector<Sample>& sampled, const ALConfig& cfg,
                        int round) {
  AnnotateResult res;
  for (const Sample& s : sampled) {
    const bool truly_valid = s.kind == DistributionKind::InDistribution;
    int positive = 0;
    for (int a = 0; a < cfg.votes; ++a) {
      const double u = rng::uniform(cfg.seed, rng::kVote,
                                    static_cast<std::uint64_t>(round), s.id,
                                    static_cast<std::uint64_t>(a));
      const bool flipped = u < cfg.annotator_error;
      if (truly_valid != flipped) ++positive;
    }
    if (positive >= cfg.vote_threshold)
      res.accepted.push_back(LabeledSample{s, s.query});
    else
      ++res.rejected;
  }
  return res;
}

namespace {

std::vector<SampleId> dispatch_strategy(
    const ALConfig& cfg, const LearnerState& state,
    const std::vector<std::vector<double>>& labeled_features,
    const std::vector<Sample>& pool, std::uint64_t round_seed) {
  const std::size_t batch = static_cast<std::size_t>(cfg.batch);
  switch (cfg.strategy) {
    case Strategy::Random:
      return sample_random(pool, batch, round_seed);
    case Strategy::Entropy:
      return sample_uncertainty(state, pool, batch, UncertaintyScore::Entropy);
    case Strategy::Margin:
      return sample_uncertainty(state, pool, batch, UncertaintyScore::Margin);
    case Strategy::CoreSet:
      return sample_coreset(labeled_features, pool, batch);
    case Strategy::ClusterMargin:
      return sample_cluster_margin(state, pool, batch, cfg.cluster_count,
                                   cfg.margin_multiplier, round_seed);
  }
  return {};
}

void validate(const ALConfig& cfg) {
  if (cfg.rounds < 1) throw SpecError("rounds must be >= 1");
  if (cfg.batch < 1) throw SpecError("batch must be >= 1");
  if (cfg.votes < 1) throw SpecError("votes must be >= 1");
  if (cfg.vote_threshold < 0 || cfg.vote_threshold > cfg.votes)
    throw SpecError("vote_threshold must be in [0, votes]");
  if (cfg.annotator_error < 0 || cfg.annotator_error >= 1)
    throw SpecError("annotator_error must be in [0, 1)");
  if (cfg.margin_multiplier < 1) throw SpecError("margin_multiplier must be >= 1");
  if (cfg.cluster_count < 1) throw SpecError("cluster_count must be >= 1");
  if (cfg.top_k < 1) throw SpecError("top_k must be >= 1");
  if (cfg.temperature <= 0) throw SpecError("temperature must be > 0");
}

}  // namespace

std::vector<RoundReport> run_loop(const ALConfig& cfg, const LabelSystem& sys,
                                  PoolState& pool, const EvalSet& eval_set) {
  validate(cfg);
  if (pool.labeled.empty())
    throw EmptyTrainingSetError();  // loop needs a cold-started pool
  if (eval_set.empty()) throw EmptyEvalSetError();

  auto labeled_vector = [&]() {
    std::vector<LabeledSample> v;
    v.reserve(pool.labeled.size());
    for (const auto& [_, ls] : pool.labeled) v.push_back(ls);
    return v;
  };

  LearnerState state = train(labeled_vector(), cfg.temperature);

  std::vector<RoundReport> reports;
  reports.reserve(static_cast<std::size_t>(cfg.rounds));
  for (int r = 1; r <= cfg.rounds; ++r) {
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<Sample> unlabeled;
    unlabeled.reserve(pool.unlabeled.size());
    for (const auto& [_, s] : pool.unlabeled) unlabeled.push_back(s);

    // Detection pools (every sample carrying proposals) go through the
    // proposal filter instead of the classification filter.
    std::vector<Sample> rectified;
    if (!cfg.rectify) {
      rectified = std::move(unlabeled);
    } else if (!unlabeled.empty() && unlabeled.front().proposals) {
      rectified = rectify_detection(unlabeled, cfg.det_min_proposals,
                                    cfg.det_max_identical);
    } else {
      rectified = rectify_classification(state, unlabeled, sys, cfg.top_k,
                                         cfg.related_levels);
    }

    const std::uint64_t round_seed =
        rng::draw(cfg.seed, rng::kRound, static_cast<std::uint64_t>(r));
    std::vector<SampleId> selected;
    if (!rectified.empty()) {
      std::vector<std::vector<double>> centers;
      if (cfg.strategy == Strategy::CoreSet) {
        centers.reserve(pool.labeled.size());
        for (const auto& [_, ls] : pool.labeled)
          centers.push_back(ls.sample.features);
      }
      selected = dispatch_strategy(cfg, state, centers, rectified, round_seed);
    }

    std::vector<Sample> sampled;
    sampled.reserve(selected.size());
    for (SampleId id : selected) sampled.push_back(pool.unlabeled.at(id));

    const AnnotateResult ann = annotate(sampled, cfg, r);

    // Everything sampled leaves the unlabeled pool, rejected or not.
    for (SampleId id : selected) pool.unlabeled.erase(id);
    for (const LabeledSample& ls : ann.accepted)
      pool.labeled.emplace(ls.sample.id, ls);
    pool.round = r;

    state = train(labeled_vector(), cfg.temperature);

    RoundReport rep;
    rep.round = r;
    rep.rectified_count = rectified.size();
    rep.sampled_count = sampled.size();
    rep.valid_count = ann.accepted.size();
    rep.labeled_total = pool.labeled.size();
    rep.eval_accuracy = evaluate(state, eval_set);
    rep.elapsed_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - t0)
            .count();
    reports.push_back(rep);
  }
  return reports;
}

void write_reports_csv(const std::vector<RoundReport>& reports,
                       std::ostream& out) {
  out << "round,rectified,sampled,valid,labeled_total,accuracy,ms\n";
  for (const RoundReport& r : reports) {
    out << r.round << ',' << r.rectified_count << ',' << r.sampled_count << ','
        << r.valid_count << ',' << r.labeled_total << ',' << r.eval_accuracy
        << ',' << r.elapsed_ms << '\n';
  }
}

std::string round_report_json(const RoundReport& report) {
  nlohmann::json j;
  j["round"] = report.round;
  j["rectified"] = report.rectified_count;
  j["sampled"] = report.sampled_count;
  j["valid"] = report.valid_count;
  j["labeled_total"] = report.labeled_total;
  j["accuracy"] = report.eval_accuracy;
  j["ms"] = report.elapsed_ms;
  return j.dump(2) + "\n";
}

}  // namespace curator
