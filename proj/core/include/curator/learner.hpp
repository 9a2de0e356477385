#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "curator/pool.hpp"
#include "curator/types.hpp"

namespace curator {

// Nearest-class-mean classifier: one prototype per class, softmax over
// negative distances scaled by temperature. Immutable after train();
// predict/margin/entropy are pure.
struct LearnerState {
  std::vector<ConceptId> classes;  // sorted lexicographically
  std::vector<std::vector<double>> prototypes;  // parallel to classes
  double temperature = 1.0;

  std::size_t dim() const { return prototypes.empty() ? 0 : prototypes[0].size(); }
  bool operator==(const LearnerState&) const = default;
};

struct Prediction {
  // Descending probability; exact ties rank the lexicographically smaller
  // concept first.
  std::vector<std::pair<ConceptId, double>> ranked;
};

// prototype_c = mean of features labeled c; classes with no samples are
// simply absent.
LearnerState train(const std::vector<LabeledSample>& labeled,
                   double temperature = 1.0);

// p(c) = softmax_c(-dist(x, prototype_c) / temperature); stable under a
// constant shift of all distances.
std::vector<double> softmax_from_distances(const std::vector<double>& distances,
                                           double temperature);

// Full distribution over state.classes for features x.
std::vector<double> class_distribution(const LearnerState& state,
                                       const std::vector<double>& features);

// Top-k slice of the ranked distribution (everything if k >= class count).
Prediction predict(const LearnerState& state,
                   const std::vector<double>& features, std::size_t k);

// p1 - p2 over the full distribution. Requires >= 2 classes.
double margin(const LearnerState& state, const std::vector<double>& features);

// Shannon entropy (natural log) of the full distribution.
double entropy(const LearnerState& state, const std::vector<double>& features);

// Fraction of eval pairs whose top-1 prediction equals the truth.
double evaluate(
    const LearnerState& state,
    const std::vector<std::pair<std::vector<double>, ConceptId>>& eval_set);

// Checkpoint format: {"classes": [...], "prototypes": [[...]], "temperature": t}.
void save_learner(const LearnerState& state, std::ostream& out);
LearnerState load_learner(std::istream& in);

}  // namespace curator
