#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "curator/dedup.hpp"
#include "curator/types.hpp"

namespace curator {

// Why a crawled sample is or is not usable for supervision.
enum class DistributionKind {
  InDistribution,  // query accurately describes the content
  Noisy,           // no usable semantic content at all
  CovariateShift,  // right content, too degraded to annotate
  SemanticShift,   // real content of an unrelated class
};

struct Proposal {
  ConceptId category;
  double score = 0;               // in [0, 1]
  double x = 0, y = 0, w = 0, h = 0;  // w > 0, h > 0

  bool operator==(const Proposal&) const = default;
};

struct Sample {
  SampleId id = 0;
  std::vector<double> features;
  ConceptId query;
  std::optional<ConceptId> truth;
  DistributionKind kind = DistributionKind::InDistribution;
  std::optional<std::vector<Proposal>> proposals;
  std::optional<DHash64> hash;

  bool operator==(const Sample&) const = default;
};

struct LabeledSample {
  Sample sample;
  ConceptId label;

  bool operator==(const LabeledSample&) const = default;
};

// The evolving labeled/unlabeled partition. Keys are disjoint; across
// rounds labeled only grows and unlabeled only shrinks.
struct PoolState {
  std::map<SampleId, LabeledSample> labeled;
  std::map<SampleId, Sample> unlabeled;
  int round = 0;
  std::size_t feature_dim = 0;
  std::uint64_t seed = 0;

  bool disjoint() const;
  bool operator==(const PoolState&) const = default;
};

struct ClassSpec {
  ConceptId id;
  std::vector<double> mean;
  double sigma = 1.0;
};

struct KindCounts {
  std::size_t id_n = 0;
  std::size_t noisy_n = 0;
  std::size_t covariate_n = 0;
  std::size_t semantic_n = 0;
};

// Declarative description of a synthetic crawl. Everything drawn from it is
// a pure function of `seed`.
struct PoolSpec {
  std::vector<ClassSpec> classes;
  KindCounts counts;
  double covariate_scale = 4.0;  // kappa > 1
  std::size_t feature_dim = 16;
  std::vector<ClassSpec> outside_classes;  // semantic-shift sources
  std::uint64_t seed = 0;
  double noise_range = 10.0;  // noisy samples are uniform on [-R, R]^d
};

// Proposal-count law for the simulated detector. Weights pick one of three
// per-image profiles: sparse (0-1 proposals), normal (2-15, mixed
// categories), crowded (>15 proposals of one category).
struct DetLaw {
  double sparse_weight = 0;
  double normal_weight = 1;
  double crowded_weight = 0;
};

// Draws the pool described by spec: per kind, classes are filled in listed
// order, each class receiving an equal share (earlier classes take the
// remainder). Sample ids start at 1 and follow generation order.
std::vector<Sample> generate_pool(const PoolSpec& spec);

// generate_pool plus a seeded proposal list per sample.
std::vector<Sample> generate_det_samples(const PoolSpec& spec, const DetLaw& law);

// Builds a PoolState with everything unlabeled and round = 0.
PoolState make_pool_state(std::vector<Sample> samples, const PoolSpec& spec);

// For every class below `quota` labeled samples, moves valid unlabeled
// samples of that query (ascending id) into the labeled set until the quota
// is met or candidates run out.
void cold_start(PoolState& pool,
                const std::function<bool(const Sample&)>& is_valid,
                std::size_t quota = 50);

// JSON-lines: a header object with dim/seed/round, then one sample per
// line; labeled samples carry a "label" field.
void save_pool(const PoolState& pool, std::ostream& out);
PoolState load_pool(std::istream& in);

const char* kind_name(DistributionKind k);

}  // namespace curator
