#include "curator/pool.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "curator/errors.hpp"
#include "curator/rng.hpp"

namespace curator {

bool PoolState::disjoint() const {
  for (const auto& [id, _] : labeled)
    if (unlabeled.count(id)) return false;
  return true;
}

namespace {

constexpr std::uint64_t kKindKey(DistributionKind k) {
  return static_cast<std::uint64_t>(k);
}

void validate(const PoolSpec& spec) {
  if (spec.feature_dim == 0) throw SpecError("feature_dim must be positive");
  if (spec.covariate_scale <= 1.0)
    throw SpecError("covariate_scale must be > 1");
  if (spec.noise_range <= 0) throw SpecError("noise_range must be positive");
  const std::size_t total = spec.counts.id_n + spec.counts.noisy_n +
                            spec.counts.covariate_n + spec.counts.semantic_n;
  if (total > 0 && spec.classes.empty())
    throw SpecError("pool with samples needs at least one class");
  if (spec.counts.semantic_n > 0 && spec.outside_classes.empty())
    throw SpecError("semantic-shift samples need outside_classes");
  for (const auto& c : spec.classes) {
    if (c.mean.size() != spec.feature_dim)
      throw SpecError("class " + c.id + " mean has dim " +
                      std::to_string(c.mean.size()) + ", expected " +
                      std::to_string(spec.feature_dim));
    if (c.sigma <= 0) throw SpecError("class " + c.id + " sigma must be > 0");
  }
  for (const auto& c : spec.outside_classes) {
    if (c.mean.size() != spec.feature_dim)
      throw SpecError("outside class " + c.id + " mean has dim " +
                      std::to_string(c.mean.size()) + ", expected " +
                      std::to_string(spec.feature_dim));
    if (c.sigma <= 0)
      throw SpecError("outside class " + c.id + " sigma must be > 0");
  }
}

// Equal share per class; the first (n % classes) classes take one extra.
std::size_t class_share(std::size_t total, std::size_t classes, std::size_t ci) {
  return total / classes + (ci < total % classes ? 1 : 0);
}

std::vector<double> gaussian_features(const PoolSpec& spec,
                                      DistributionKind kind, std::size_t ci,
                                      std::size_t j,
                                      const std::vector<double>& mean,
                                      double sigma) {
  std::vector<double> f(spec.feature_dim);
  for (std::size_t t = 0; t < spec.feature_dim; ++t)
    f[t] = mean[t] + sigma * rng::gaussian(spec.seed, rng::kPoolFeature,
                                           kKindKey(kind), ci, j, t);
  return f;
}

}  // namespace

std::vector<Sample> generate_pool(const PoolSpec& spec) {
  validate(spec);
  std::vector<Sample> out;
  SampleId next_id = 1;
  const std::size_t n_classes = spec.classes.size();

  // Draw order is fixed as (kind, class index, sample index, coordinate).
  auto emit = [&](DistributionKind kind, std::size_t total) {
    for (std::size_t ci = 0; ci < n_classes; ++ci) {
      const ClassSpec& cls = spec.classes[ci];
      const std::size_t share = class_share(total, n_classes, ci);
      for (std::size_t j = 0; j < share; ++j) {
        Sample s;
        s.id = next_id++;
        s.query = cls.id;
        s.kind = kind;
        switch (kind) {
          case DistributionKind::InDistribution:
            s.features = gaussian_features(spec, kind, ci, j, cls.mean, cls.sigma);
            s.truth = cls.id;
            break;
          case DistributionKind::CovariateShift:
            s.features = gaussian_features(spec, kind, ci, j, cls.mean,
                                           spec.covariate_scale * cls.sigma);
            s.truth = cls.id;
            break;
          case DistributionKind::Noisy: {
            s.features.resize(spec.feature_dim);
            for (std::size_t t = 0; t < spec.feature_dim; ++t) {
              const double u = rng::uniform(spec.seed, rng::kPoolFeature,
                                            kKindKey(kind), ci, j, t);
              s.features[t] = spec.noise_range * (2.0 * u - 1.0);
            }
            break;  // truth stays absent
          }
          case DistributionKind::SemanticShift: {
            const ClassSpec& outside =
                spec.outside_classes[(ci + j) % spec.outside_classes.size()];
            s.features = gaussian_features(spec, kind, ci, j, outside.mean,
                                           outside.sigma);
            s.truth = outside.id;
            break;
          }
        }
        out.push_back(std::move(s));
      }
    }
  };

  emit(DistributionKind::InDistribution, spec.counts.id_n);
  emit(DistributionKind::Noisy, spec.counts.noisy_n);
  emit(DistributionKind::CovariateShift, spec.counts.covariate_n);
  emit(DistributionKind::SemanticShift, spec.counts.semantic_n);
  return out;
}

std::vector<Sample> generate_det_samples(const PoolSpec& spec,
                                         const DetLaw& law) {
  const double wsum = law.sparse_weight + law.normal_weight + law.crowded_weight;
  if (wsum <= 0) throw SpecError("det law weights must not all be zero");
  std::vector<Sample> samples = generate_pool(spec);
  for (Sample& s : samples) {
    const double u = wsum * rng::uniform(spec.seed, rng::kProposal, s.id, 0, 0);
    std::size_t count;
    bool crowded = false;
    if (u < law.sparse_weight) {
      count = rng::draw(spec.seed, rng::kProposal, s.id, 1) % 2;  // 0 or 1
    } else if (u < law.sparse_weight + law.normal_weight) {
      count = 2 + rng::draw(spec.seed, rng::kProposal, s.id, 1) % 14;  // 2..15
    } else {
      count = 16 + rng::draw(spec.seed, rng::kProposal, s.id, 1) % 10;  // 16..25
      crowded = true;
    }
    std::vector<Proposal> props;
    props.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      Proposal p;
      if (crowded) {
        p.category = s.query;
      } else {
        const std::size_t pick =
            rng::draw(spec.seed, rng::kProposal, s.id, 2, k) %
            spec.classes.size();
        p.category = spec.classes[pick].id;
      }
      p.score = rng::uniform(spec.seed, rng::kProposal, s.id, 3, k);
      p.x = 100.0 * rng::uniform(spec.seed, rng::kProposal, s.id, 4, k);
      p.y = 100.0 * rng::uniform(spec.seed, rng::kProposal, s.id, 5, k);
      p.w = 1.0 + 49.0 * rng::uniform(spec.seed, rng::kProposal, s.id, 6, k);
      p.h = 1.0 + 49.0 * rng::uniform(spec.seed, rng::kProposal, s.id, 7, k);
      props.push_back(std::move(p));
    }
    s.proposals = std::move(props);
  }
  return samples;
}

PoolState make_pool_state(std::vector<Sample> samples, const PoolSpec& spec) {
  PoolState pool;
  pool.feature_dim = spec.feature_dim;
  pool.seed = spec.seed;
  for (Sample& s : samples) {
    const SampleId id = s.id;
    pool.unlabeled.emplace(id, std::move(s));
  }
  return pool;
}

void cold_start(PoolState& pool,
                const std::function<bool(const Sample&)>& is_valid,
                std::size_t quota) {
  // Classes are every concept that appears as a label or a query.
  std::set<ConceptId> classes;
  std::map<ConceptId, std::size_t> labeled_count;
  for (const auto& [_, ls] : pool.labeled) {
    classes.insert(ls.label);
    ++labeled_count[ls.label];
  }
  for (const auto& [_, s] : pool.unlabeled) classes.insert(s.query);

  for (const ConceptId& cls : classes) {
    std::size_t have = labeled_count[cls];
    if (have >= quota) continue;
    std::vector<SampleId> moved;
    for (const auto& [id, s] : pool.unlabeled) {  // ascending id
      if (have >= quota) break;
      if (s.query != cls || !is_valid(s)) continue;
      moved.push_back(id);
      ++have;
    }
    for (SampleId id : moved) {
      auto node = pool.unlabeled.extract(id);
      pool.labeled.emplace(id, LabeledSample{std::move(node.mapped()), cls});
    }
  }
}

const char* kind_name(DistributionKind k) {
  switch (k) {
    case DistributionKind::InDistribution: return "id";
    case DistributionKind::Noisy: return "noisy";
    case DistributionKind::CovariateShift: return "covariate";
    case DistributionKind::SemanticShift: return "semantic";
  }
  return "?";
}

namespace {

DistributionKind kind_from_name(const std::string& s, std::size_t line) {
  if (s == "id") return DistributionKind::InDistribution;
  if (s == "noisy") return DistributionKind::Noisy;
  if (s == "covariate") return DistributionKind::CovariateShift;
  if (s == "semantic") return DistributionKind::SemanticShift;
  throw ParseError(line, "unknown distribution kind: " + s);
}

nlohmann::json sample_to_json(const Sample& s) {
  nlohmann::json j;
  j["id"] = s.id;
  j["features"] = s.features;
  j["query"] = s.query;
  if (s.truth) j["truth"] = *s.truth;
  j["kind"] = kind_name(s.kind);
  if (s.proposals) {
    nlohmann::json props = nlohmann::json::array();
    for (const Proposal& p : *s.proposals)
      props.push_back({{"category", p.category},
                       {"score", p.score},
                       {"box", {p.x, p.y, p.w, p.h}}});
    j["proposals"] = std::move(props);
  }
  if (s.hash) j["hash"] = to_hex(*s.hash);
  return j;
}

Sample sample_from_json(const nlohmann::json& j, std::size_t line) {
  Sample s;
  s.id = j.at("id").get<SampleId>();
  s.features = j.at("features").get<std::vector<double>>();
  s.query = j.at("query").get<std::string>();
  if (j.contains("truth")) s.truth = j["truth"].get<std::string>();
  s.kind = kind_from_name(j.at("kind").get<std::string>(), line);
  if (j.contains("proposals")) {
    std::vector<Proposal> props;
    for (const auto& pj : j["proposals"]) {
      Proposal p;
      p.category = pj.at("category").get<std::string>();
      p.score = pj.at("score").get<double>();
      const auto& box = pj.at("box");
      p.x = box.at(0).get<double>();
      p.y = box.at(1).get<double>();
      p.w = box.at(2).get<double>();
      p.h = box.at(3).get<double>();
      props.push_back(std::move(p));
    }
    s.proposals = std::move(props);
  }
  if (j.contains("hash"))
    s.hash = std::stoull(j["hash"].get<std::string>(), nullptr, 16);
  return s;
}

}  // namespace

void save_pool(const PoolState& pool, std::ostream& out) {
  nlohmann::json header;
  header["dim"] = pool.feature_dim;
  header["seed"] = pool.seed;
  header["round"] = pool.round;
  out << header.dump() << '\n';
  // Single stream ascending id; membership in `labeled` is encoded by the
  // presence of the label field.
  auto lit = pool.labeled.begin();
  auto uit = pool.unlabeled.begin();
  while (lit != pool.labeled.end() || uit != pool.unlabeled.end()) {
    const bool take_labeled =
        uit == pool.unlabeled.end() ||
        (lit != pool.labeled.end() && lit->first < uit->first);
    if (take_labeled) {
      nlohmann::json j = sample_to_json(lit->second.sample);
      j["label"] = lit->second.label;
      out << j.dump() << '\n';
      ++lit;
    } else {
      out << sample_to_json(uit->second).dump() << '\n';
      ++uit;
    }
  }
}

PoolState load_pool(std::istream& in) {
  PoolState pool;
  std::string line;
  std::size_t lineno = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw ParseError(lineno, "invalid JSON object");
    try {
      if (!saw_header) {
        pool.feature_dim = j.at("dim").get<std::size_t>();
        pool.seed = j.at("seed").get<std::uint64_t>();
        pool.round = j.at("round").get<int>();
        saw_header = true;
        continue;
      }
      Sample s = sample_from_json(j, lineno);
      const SampleId id = s.id;
      if (pool.labeled.count(id) || pool.unlabeled.count(id))
        throw ParseError(lineno, "duplicate sample id " + std::to_string(id));
      if (j.contains("label")) {
        ConceptId label = j["label"].get<std::string>();
        pool.labeled.emplace(id, LabeledSample{std::move(s), std::move(label)});
      } else {
        pool.unlabeled.emplace(id, std::move(s));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return pool;
}

}  // namespace curator
