#include "curator/learner.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include <nlohmann/json.hpp>

#include "curator/errors.hpp"

namespace curator {

LearnerState train(const std::vector<LabeledSample>& labeled,
                   double temperature) {
  if (labeled.empty()) throw EmptyTrainingSetError();
  std::map<ConceptId, std::pair<std::vector<double>, std::size_t>> acc;
  const std::size_t dim = labeled.front().sample.features.size();
  for (const LabeledSample& ls : labeled) {
    if (ls.sample.features.size() != dim)
      throw DimMismatchError(ls.sample.features.size(), dim);
    auto& [sum, n] = acc[ls.label];
    if (sum.empty()) sum.assign(dim, 0.0);
    for (std::size_t t = 0; t < dim; ++t) sum[t] += ls.sample.features[t];
    ++n;
  }
  LearnerState state;
  state.temperature = temperature;
  for (auto& [cls, entry] : acc) {  // map iteration = lexicographic order
    auto& [sum, n] = entry;
    for (double& v : sum) v /= static_cast<double>(n);
    state.classes.push_back(cls);
    state.prototypes.push_back(std::move(sum));
  }
  return state;
}

std::vector<double> softmax_from_distances(const std::vector<double>& distances,
                                           double temperature) {
  std::vector<double> logits(distances.size());
  for (std::size_t i = 0; i < distances.size(); ++i)
    logits[i] = -distances[i] / temperature;
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0;
  for (double& l : logits) {
    l = std::exp(l - m);
    z += l;
  }
  for (double& l : logits) l /= z;
  return logits;
}

std::vector<double> class_distribution(const LearnerState& state,
                                       const std::vector<double>& features) {
  if (features.size() != state.dim())
    throw DimMismatchError(features.size(), state.dim());
  std::vector<double> dist(state.classes.size());
  for (std::size_t i = 0; i < state.prototypes.size(); ++i) {
    double d2 = 0;
    for (std::size_t t = 0; t < features.size(); ++t) {
      const double diff = features[t] - state.prototypes[i][t];
      d2 += diff * diff;
    }
    dist[i] = std::sqrt(d2);
  }
  return softmax_from_distances(dist, state.temperature);
}

Prediction predict(const LearnerState& state,
                   const std::vector<double>& features, std::size_t k) {
  const std::vector<double> probs = class_distribution(state, features);
  Prediction pred;
  pred.ranked.reserve(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    pred.ranked.emplace_back(state.classes[i], probs[i]);
  std::sort(pred.ranked.begin(), pred.ranked.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  if (k < pred.ranked.size()) pred.ranked.resize(k);
  return pred;
}

double margin(const LearnerState& state, const std::vector<double>& features) {
  if (state.classes.size() < 2) throw SingleClassError();
  std::vector<double> probs = class_distribution(state, features);
  std::nth_element(probs.begin(), probs.begin() + 1, probs.end(),
                   std::greater<>());
  const double p1 = std::max(probs[0], probs[1]);
  const double p2 = std::min(probs[0], probs[1]);
  return p1 - p2;
}

double entropy(const LearnerState& state, const std::vector<double>& features) {
  const std::vector<double> probs = class_distribution(state, features);
  double h = 0;
  for (double p : probs)
    if (p > 0) h -= p * std::log(p);
  return h;
}

double evaluate(
    const LearnerState& state,
    const std::vector<std::pair<std::vector<double>, ConceptId>>& eval_set) {
  if (eval_set.empty()) throw EmptyEvalSetError();
  std::size_t hits = 0;
  for (const auto& [features, truth] : eval_set) {
    const Prediction p = predict(state, features, 1);
    if (!p.ranked.empty() && p.ranked.front().first == truth) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(eval_set.size());
}

void save_learner(const LearnerState& state, std::ostream& out) {
  nlohmann::json j;
  j["classes"] = state.classes;
  j["prototypes"] = state.prototypes;
  j["temperature"] = state.temperature;
  out << j.dump() << '\n';
}

LearnerState load_learner(std::istream& in) {
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ParseError(1, "invalid learner checkpoint");
  LearnerState state;
  state.classes = j.at("classes").get<std::vector<ConceptId>>();
  state.prototypes = j.at("prototypes").get<std::vector<std::vector<double>>>();
  state.temperature = j.at("temperature").get<double>();
  return state;
}

}  // namespace curator
