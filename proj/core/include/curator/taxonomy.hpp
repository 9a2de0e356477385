#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "curator/types.hpp"

namespace curator {

enum class ConceptSource { WordNetBase, PublicDataset, Wikidata };
enum class Visuality { Untagged, Visual, NonVisual };
enum class Commonality { Untagged, Common, NotCommon };

struct Concept {
  ConceptId id;
  std::vector<std::string> lemmas;  // non-empty, normalized lowercase
  std::string gloss;
  ConceptSource source = ConceptSource::WordNetBase;
  Visuality visuality = Visuality::Untagged;
  Commonality common = Commonality::Untagged;

  bool operator==(const Concept&) const = default;
};

// A concept arriving from an external resource, to be linked into the system.
struct ExternalConcept {
  std::string name;
  std::vector<ConceptId> subclass_of;
  std::optional<std::string> embedding_key;
  ConceptSource source = ConceptSource::Wikidata;
};

struct EmbeddingTable {
  std::size_t dim = 0;
  std::map<std::string, std::vector<double>> vectors;

  bool contains(const std::string& key) const { return vectors.count(key) > 0; }
};

enum class LinkStatus { Linked, AlreadyPresent, NoMatch, Error };
enum class LinkSolution { SubclassOf, HeadParse, Embedding, None };

struct LinkOutcome {
  LinkStatus status = LinkStatus::NoMatch;
  std::optional<ConceptId> attached_under;
  std::optional<ConceptId> new_id;
  LinkSolution solution_used = LinkSolution::None;
  std::string error;  // set when status == Error

  bool operator==(const LinkOutcome&) const = default;
};

struct IntegrationReport {
  std::vector<std::string> names;  // input order
  std::vector<LinkOutcome> outcomes;
  std::size_t linked_subclass_of = 0;
  std::size_t linked_head_parse = 0;
  std::size_t linked_embedding = 0;
  std::size_t already_present = 0;
  std::size_t no_match = 0;
  std::size_t errors = 0;

  bool operator==(const IntegrationReport&) const = default;
};

// Hierarchical label system: a DAG of concepts with hypernym (parent) edges.
// Multiple roots and multiple parents are allowed; cycles are rejected.
// Query operations never mutate, so concurrent reads are safe once
// integration is finished.
class LabelSystem {
 public:
  // Parses the line-oriented taxonomy format:
  //   C <id> <lemma1|lemma2|...> [gloss...]
  //   E <child_id> <parent_id>
  //   # comment
  // Throws ParseError, DanglingEdgeError, CycleError.
  static LabelSystem load(std::istream& in);

  // Inverse of load(); lines are sorted so output is deterministic.
  void save(std::ostream& out) const;

  bool contains(const ConceptId& id) const { return concepts_.count(id) > 0; }
  const Concept& concept_for(const ConceptId& id) const;
  std::size_t size() const { return concepts_.size(); }

  const std::map<ConceptId, Concept>& concepts() const { return concepts_; }
  const std::map<ConceptId, std::set<ConceptId>>& parent_edges() const {
    return parents_;
  }
  const std::map<std::string, std::set<ConceptId>>& lemma_index() const {
    return lemma_index_;
  }

  // Inserts a fresh concept; id must be unused, lemmas already normalized.
  void add_concept(Concept c);
  // Adds child -> parent hypernym edge between existing concepts. Rejects
  // edges that would close a cycle.
  void add_edge(const ConceptId& child, const ConceptId& parent);

  // Walks parent edges at most `levels` hops; result includes id itself.
  std::set<ConceptId> ancestors(const ConceptId& id, std::size_t levels) const;
  // Full hyponym closure, including id itself.
  std::set<ConceptId> descendants(const ConceptId& id) const;
  // Union of descendants over every ancestor within `levels` hops.
  std::set<ConceptId> related_categories(const ConceptId& query,
                                         std::size_t levels = 1) const;

  // Five annotators vote whether the concept is non-visual (true = less
  // concrete). Three or more non-visual votes tag it NonVisual.
  const Concept& tag_visuality(const ConceptId& id,
                               const std::vector<bool>& nonvisual_votes);
  // Five annotators vote whether a *visual* concept is an entry-level
  // category (true = common). Three or more positive votes tag it Common.
  const Concept& tag_commonality(const ConceptId& id,
                                 const std::vector<bool>& common_votes);

  bool operator==(const LabelSystem&) const = default;

 private:
  std::map<ConceptId, Concept> concepts_;
  std::map<ConceptId, std::set<ConceptId>> parents_;
  std::map<ConceptId, std::set<ConceptId>> children_;
  std::map<std::string, std::set<ConceptId>> lemma_index_;
};

// Lowercases, trims, and joins internal whitespace with '_' so multi-word
// names are comparable with file-format lemmas (which cannot carry spaces).
std::string normalize_lemma(const std::string& raw);

// Rightmost-token head extraction: lowercase, split on whitespace and
// hyphens, return the last surviving token.
std::string head_compound(const std::string& name);

// Solution 1: attach under the first subclass_of target present in the
// system. Does not mutate on NoMatch.
LinkOutcome link_by_subclass_of(LabelSystem& sys, const ExternalConcept& ext);

// Solution 2: if the whole name is already a known lemma, AlreadyPresent;
// else attach under the lexicographically smallest synset carrying the
// name's head compound.
LinkOutcome link_by_head_parse(LabelSystem& sys, const ExternalConcept& ext);

// Solution 3: attach under the concept whose first-lemma embedding has the
// highest cosine similarity to ext's vector, if at least min_sim.
LinkOutcome link_by_embedding(LabelSystem& sys, const ExternalConcept& ext,
                              const EmbeddingTable& table, double min_sim);

// Tries Solutions 1, 2, 3 in that order; first success wins. Per-concept
// errors are recorded in the report, never aborting the batch.
IntegrationReport integrate(LabelSystem& sys,
                            const std::vector<ExternalConcept>& batch,
                            const EmbeddingTable& table, double min_sim = 0.5);

// Embedding table format: header "<count> <dim>", then "<word> <f1> ... <fdim>".
EmbeddingTable load_embeddings(std::istream& in);

// JSON-lines external concepts:
//   {"name": "...", "subclass_of": ["..."], "embedding_key": "...", "source": "..."}
std::vector<ExternalConcept> load_external_concepts(std::istream& in);

std::string to_json_string(const IntegrationReport& report);

}  // namespace curator
