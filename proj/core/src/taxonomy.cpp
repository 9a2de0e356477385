#include "curator/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "curator/errors.hpp"

namespace curator {

namespace {

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

// Finds a parent-edge cycle reachable from `start`, as "a -> b -> ... -> a".
std::optional<std::string> find_cycle(
    const std::map<ConceptId, std::set<ConceptId>>& parents) {
  enum class Mark { White, Grey, Black };
  std::map<ConceptId, Mark> mark;
  std::vector<ConceptId> stack;

  // Iterative DFS over parent edges.
  struct Frame {
    ConceptId id;
    std::set<ConceptId>::const_iterator next, end;
  };
  for (const auto& [root, _] : parents) {
    if (mark.count(root) && mark[root] == Mark::Black) continue;
    std::vector<Frame> frames;
    auto push = [&](const ConceptId& id) -> std::optional<std::string> {
      if (mark[id] == Mark::Grey) {
        std::string cyc = id;
        for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
          cyc = *it + " -> " + cyc;
          if (*it == id) break;
        }
        return cyc;
      }
      if (mark[id] == Mark::White) {
        mark[id] = Mark::Grey;
        stack.push_back(id);
        auto pit = parents.find(id);
        if (pit == parents.end()) {
          static const std::set<ConceptId> kEmpty;
          frames.push_back({id, kEmpty.begin(), kEmpty.end()});
        } else {
          frames.push_back({id, pit->second.begin(), pit->second.end()});
        }
      }
      return std::nullopt;
    };
    if (auto cyc = push(root)) return cyc;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.next == f.end) {
        mark[f.id] = Mark::Black;
        stack.pop_back();
        frames.pop_back();
        continue;
      }
      ConceptId nxt = *f.next++;
      if (auto cyc = push(nxt)) return cyc;
    }
  }
  return std::nullopt;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

ConceptSource source_from_string(const std::string& s, std::size_t line) {
  if (s == "wordnet") return ConceptSource::WordNetBase;
  if (s == "dataset") return ConceptSource::PublicDataset;
  if (s == "wikidata") return ConceptSource::Wikidata;
  throw ParseError(line, "unknown source: " + s);
}

}  // namespace

std::string normalize_lemma(const std::string& raw) {
  std::string lowered = to_lower(raw);
  std::vector<std::string> toks = split_ws(lowered);
  std::string out;
  for (const auto& t : toks) {
    if (!out.empty()) out += '_';
    out += t;
  }
  return out;
}

std::string head_compound(const std::string& name) {
  std::string lowered = to_lower(name);
  for (char& c : lowered) {
    if (c == '-') c = ' ';
  }
  std::vector<std::string> toks = split_ws(lowered);
  if (toks.empty()) throw EmptyAfterTokenizeError(name);
  return toks.back();
}

const Concept& LabelSystem::concept_for(const ConceptId& id) const {
  auto it = concepts_.find(id);
  if (it == concepts_.end()) throw UnknownConceptError(id);
  return it->second;
}

void LabelSystem::add_concept(Concept c) {
  if (c.id.empty()) throw ParseError(0, "empty concept id");
  if (concepts_.count(c.id)) throw ParseError(0, "duplicate concept id: " + c.id);
  if (c.lemmas.empty()) throw ParseError(0, "concept without lemmas: " + c.id);
  for (const auto& lemma : c.lemmas) lemma_index_[lemma].insert(c.id);
  concepts_.emplace(c.id, std::move(c));
}

void LabelSystem::add_edge(const ConceptId& child, const ConceptId& parent) {
  if (!contains(child)) throw DanglingEdgeError(child);
  if (!contains(parent)) throw DanglingEdgeError(parent);
  // Reject edges closing a cycle: parent must not already descend from child.
  if (child == parent || descendants(child).count(parent))
    throw CycleError(child + " -> " + parent + " -> ... -> " + child);
  parents_[child].insert(parent);
  children_[parent].insert(child);
}

LabelSystem LabelSystem::load(std::istream& in) {
  LabelSystem sys;
  std::vector<std::tuple<std::size_t, ConceptId, ConceptId>> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream iss(line);
    std::string kind;
    iss >> kind;
    if (kind == "C") {
      std::string id, lemma_field;
      if (!(iss >> id >> lemma_field))
        throw ParseError(lineno, "expected: C <id> <lemma1|lemma2|...> [gloss]");
      std::string gloss;
      std::getline(iss, gloss);
      if (!gloss.empty() && gloss.front() == ' ') gloss.erase(0, 1);

      Concept c;
      c.id = id;
      c.gloss = gloss;
      std::string lemma;
      std::istringstream lf(lemma_field);
      while (std::getline(lf, lemma, '|')) {
        lemma = normalize_lemma(lemma);
        if (lemma.empty()) throw ParseError(lineno, "empty lemma for " + id);
        if (std::count(c.lemmas.begin(), c.lemmas.end(), lemma))
          throw ParseError(lineno, "duplicate lemma '" + lemma + "' for " + id);
        c.lemmas.push_back(lemma);
      }
      if (c.lemmas.empty()) throw ParseError(lineno, "no lemmas for " + id);
      if (sys.concepts_.count(id))
        throw ParseError(lineno, "duplicate concept id: " + id);
      sys.add_concept(std::move(c));
    } else if (kind == "E") {
      std::string child, parent;
      if (!(iss >> child >> parent))
        throw ParseError(lineno, "expected: E <child_id> <parent_id>");
      edges.emplace_back(lineno, child, parent);
    } else {
      throw ParseError(lineno, "unknown record type: " + kind);
    }
  }
  // Edges may reference concepts declared later in the file, so they are
  // resolved after the full read. Cycle detection runs once over the graph
  // to report a whole cycle rather than the closing edge.
  for (const auto& [ln, child, parent] : edges) {
    (void)ln;
    if (!sys.contains(child)) throw DanglingEdgeError(child);
    if (!sys.contains(parent)) throw DanglingEdgeError(parent);
    sys.parents_[child].insert(parent);
    sys.children_[parent].insert(child);
  }
  if (auto cyc = find_cycle(sys.parents_)) throw CycleError(*cyc);
  return sys;
}

void LabelSystem::save(std::ostream& out) const {
  for (const auto& [id, c] : concepts_) {
    out << "C " << id << ' ';
    for (std::size_t i = 0; i < c.lemmas.size(); ++i) {
      if (i) out << '|';
      out << c.lemmas[i];
    }
    if (!c.gloss.empty()) out << ' ' << c.gloss;
    out << '\n';
  }
  for (const auto& [child, ps] : parents_) {
    for (const auto& parent : ps) out << "E " << child << ' ' << parent << '\n';
  }
}

std::set<ConceptId> LabelSystem::ancestors(const ConceptId& id,
                                           std::size_t levels) const {
  if (!contains(id)) throw UnknownConceptError(id);
  std::set<ConceptId> seen{id};
  std::set<ConceptId> frontier{id};
  for (std::size_t hop = 0; hop < levels && !frontier.empty(); ++hop) {
    std::set<ConceptId> next;
    for (const auto& cur : frontier) {
      auto it = parents_.find(cur);
      if (it == parents_.end()) continue;
      for (const auto& p : it->second) {
        if (seen.insert(p).second) next.insert(p);
      }
    }
    frontier = std::move(next);
  }
  return seen;
}

std::set<ConceptId> LabelSystem::descendants(const ConceptId& id) const {
  if (!contains(id)) throw UnknownConceptError(id);
  std::set<ConceptId> seen{id};
  std::deque<ConceptId> queue{id};
  while (!queue.empty()) {
    ConceptId cur = queue.front();
    queue.pop_front();
    auto it = children_.find(cur);
    if (it == children_.end()) continue;
    for (const auto& c : it->second) {
      if (seen.insert(c).second) queue.push_back(c);
    }
  }
  return seen;
}

std::set<ConceptId> LabelSystem::related_categories(const ConceptId& query,
                                                    std::size_t levels) const {
  std::set<ConceptId> out;
  for (const auto& a : ancestors(query, levels)) {
    auto d = descendants(a);
    out.insert(d.begin(), d.end());
  }
  return out;
}

const Concept& LabelSystem::tag_visuality(const ConceptId& id,
                                          const std::vector<bool>& votes) {
  if (votes.size() != 5) throw VoteCountError(votes.size());
  auto it = concepts_.find(id);
  if (it == concepts_.end()) throw UnknownConceptError(id);
  std::size_t nonvisual = std::count(votes.begin(), votes.end(), true);
  Concept& c = it->second;
  c.visuality = nonvisual >= 3 ? Visuality::NonVisual : Visuality::Visual;
  if (c.visuality == Visuality::NonVisual) c.common = Commonality::Untagged;
  return c;
}

const Concept& LabelSystem::tag_commonality(const ConceptId& id,
                                            const std::vector<bool>& votes) {
  if (votes.size() != 5) throw VoteCountError(votes.size());
  auto it = concepts_.find(id);
  if (it == concepts_.end()) throw UnknownConceptError(id);
  Concept& c = it->second;
  if (c.visuality != Visuality::Visual) throw NotVisualError(id);
  std::size_t common = std::count(votes.begin(), votes.end(), true);
  c.common = common >= 3 ? Commonality::Common : Commonality::NotCommon;
  return c;
}

namespace {

// Derives a fresh unique id for an external concept from its name.
ConceptId fresh_id(const LabelSystem& sys, const std::string& name) {
  std::string base = normalize_lemma(name);
  if (base.empty()) base = "unnamed";
  if (!sys.contains(base)) return base;
  for (int k = 2;; ++k) {
    std::string candidate = base + "." + std::to_string(k);
    if (!sys.contains(candidate)) return candidate;
  }
}

}  // namespace

LinkOutcome link_by_subclass_of(LabelSystem& sys, const ExternalConcept& ext) {
  for (const auto& target : ext.subclass_of) {
    if (!sys.contains(target)) continue;
    ConceptId id = fresh_id(sys, ext.name);
    Concept c;
    c.id = id;
    c.lemmas = {normalize_lemma(ext.name)};
    c.source = ext.source;
    sys.add_concept(std::move(c));
    sys.add_edge(id, target);
    return {LinkStatus::Linked, target, id, LinkSolution::SubclassOf, {}};
  }
  return {LinkStatus::NoMatch, {}, {}, LinkSolution::None, {}};
}

LinkOutcome link_by_head_parse(LabelSystem& sys, const ExternalConcept& ext) {
  const std::string whole = normalize_lemma(ext.name);
  if (sys.lemma_index().count(whole))
    return {LinkStatus::AlreadyPresent, {}, {}, LinkSolution::HeadParse, {}};
  const std::string head = head_compound(ext.name);
  auto it = sys.lemma_index().find(head);
  if (it == sys.lemma_index().end() || it->second.empty())
    return {LinkStatus::NoMatch, {}, {}, LinkSolution::None, {}};
  const ConceptId& parent = *it->second.begin();  // lexicographically smallest
  ConceptId id = fresh_id(sys, ext.name);
  Concept c;
  c.id = id;
  c.lemmas = {whole};
  c.source = ext.source;
  sys.add_concept(std::move(c));
  sys.add_edge(id, parent);
  return {LinkStatus::Linked, parent, id, LinkSolution::HeadParse, {}};
}

LinkOutcome link_by_embedding(LabelSystem& sys, const ExternalConcept& ext,
                              const EmbeddingTable& table, double min_sim) {
  if (!ext.embedding_key || !table.contains(*ext.embedding_key))
    throw MissingEmbeddingError(ext.embedding_key.value_or("<unset>"));
  const std::vector<double>& v = table.vectors.at(*ext.embedding_key);

  std::optional<ConceptId> best;
  double best_sim = 0;
  bool any_candidate = false;
  for (const auto& [id, c] : sys.concepts()) {
    auto vit = table.vectors.find(c.lemmas.front());
    if (vit == table.vectors.end()) continue;
    any_candidate = true;
    double sim = cosine(v, vit->second);
    // argmax; exact ties resolve to the lexicographically smaller id,
    // which the sorted concept map yields for free.
    if (!best || sim > best_sim) {
      best = id;
      best_sim = sim;
    }
  }
  if (!any_candidate) throw MissingEmbeddingError("<no candidate lemma>");
  if (best_sim < min_sim)
    return {LinkStatus::NoMatch, {}, {}, LinkSolution::None, {}};
  ConceptId id = fresh_id(sys, ext.name);
  Concept c;
  c.id = id;
  c.lemmas = {normalize_lemma(ext.name)};
  c.source = ext.source;
  sys.add_concept(std::move(c));
  sys.add_edge(id, *best);
  return {LinkStatus::Linked, *best, id, LinkSolution::Embedding, {}};
}

IntegrationReport integrate(LabelSystem& sys,
                            const std::vector<ExternalConcept>& batch,
                            const EmbeddingTable& table, double min_sim) {
  IntegrationReport report;
  for (const ExternalConcept& ext : batch) {
    report.names.push_back(ext.name);
    LinkOutcome out;
    try {
      out = link_by_subclass_of(sys, ext);
      if (out.status == LinkStatus::NoMatch) out = link_by_head_parse(sys, ext);
      if (out.status == LinkStatus::NoMatch && ext.embedding_key)
        out = link_by_embedding(sys, ext, table, min_sim);
    } catch (const Error& e) {
      out = {LinkStatus::Error, {}, {}, LinkSolution::None, e.what()};
    }
    switch (out.status) {
      case LinkStatus::Linked:
        if (out.solution_used == LinkSolution::SubclassOf)
          ++report.linked_subclass_of;
        else if (out.solution_used == LinkSolution::HeadParse)
          ++report.linked_head_parse;
        else
          ++report.linked_embedding;
        break;
      case LinkStatus::AlreadyPresent:
        ++report.already_present;
        break;
      case LinkStatus::NoMatch:
        ++report.no_match;
        break;
      case LinkStatus::Error:
        ++report.errors;
        break;
    }
    report.outcomes.push_back(std::move(out));
  }
  return report;
}

EmbeddingTable load_embeddings(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  std::size_t lineno = 0;
  std::size_t count = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty embedding file");
  ++lineno;
  {
    std::istringstream iss(line);
    if (!(iss >> count >> table.dim) || table.dim == 0)
      throw ParseError(lineno, "expected header: <count> <dim>");
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream iss(line);
    std::string word;
    if (!(iss >> word)) throw ParseError(lineno, "missing word");
    std::vector<double> v(table.dim);
    double norm2 = 0;
    for (std::size_t i = 0; i < table.dim; ++i) {
      if (!(iss >> v[i]))
        throw ParseError(lineno, "expected " + std::to_string(table.dim) +
                                     " components for " + word);
      norm2 += v[i] * v[i];
    }
    if (norm2 == 0) throw ParseError(lineno, "zero vector for " + word);
    table.vectors[word] = std::move(v);
  }
  if (table.vectors.size() != count)
    throw ParseError(lineno, "header declared " + std::to_string(count) +
                                 " entries, found " +
                                 std::to_string(table.vectors.size()));
  return table;
}

std::vector<ExternalConcept> load_external_concepts(std::istream& in) {
  std::vector<ExternalConcept> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw ParseError(lineno, "invalid JSON object");
    ExternalConcept ext;
    if (!j.contains("name") || !j["name"].is_string() ||
        j["name"].get<std::string>().empty())
      throw ParseError(lineno, "missing or empty name");
    ext.name = j["name"].get<std::string>();
    if (j.contains("subclass_of"))
      ext.subclass_of = j["subclass_of"].get<std::vector<std::string>>();
    if (j.contains("embedding_key"))
      ext.embedding_key = j["embedding_key"].get<std::string>();
    if (j.contains("source"))
      ext.source = source_from_string(j["source"].get<std::string>(), lineno);
    out.push_back(std::move(ext));
  }
  return out;
}

namespace {

const char* status_name(LinkStatus s) {
  switch (s) {
    case LinkStatus::Linked: return "linked";
    case LinkStatus::AlreadyPresent: return "already_present";
    case LinkStatus::NoMatch: return "no_match";
    case LinkStatus::Error: return "error";
  }
  return "?";
}

const char* solution_name(LinkSolution s) {
  switch (s) {
    case LinkSolution::SubclassOf: return "subclass_of";
    case LinkSolution::HeadParse: return "head_parse";
    case LinkSolution::Embedding: return "embedding";
    case LinkSolution::None: return "none";
  }
  return "?";
}

}  // namespace

std::string to_json_string(const IntegrationReport& report) {
  nlohmann::json j;
  j["counts"] = {{"subclass_of", report.linked_subclass_of},
                 {"head_parse", report.linked_head_parse},
                 {"embedding", report.linked_embedding},
                 {"already_present", report.already_present},
                 {"no_match", report.no_match},
                 {"errors", report.errors}};
  nlohmann::json results = nlohmann::json::array();
  for (std::size_t i = 0; i < report.outcomes.size(); ++i) {
    const LinkOutcome& o = report.outcomes[i];
    nlohmann::json r;
    r["name"] = report.names[i];
    r["status"] = status_name(o.status);
    r["solution"] = solution_name(o.solution_used);
    if (o.attached_under) r["attached_under"] = *o.attached_under;
    if (o.new_id) r["new_id"] = *o.new_id;
    if (!o.error.empty()) r["error"] = o.error;
    results.push_back(std::move(r));
  }
  j["results"] = std::move(results);
  return j.dump(2) + "\n";
}

}  // namespace curator
