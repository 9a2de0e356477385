#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace curator {

// Root of the project error hierarchy. Everything thrown on a contract
// violation or malformed input derives from this.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed line in a text input (taxonomy file, embedding table,
// pool file, hash list, run config). Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& msg)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// The hypernym graph contains a cycle; the message lists one.
class CycleError : public Error {
 public:
  explicit CycleError(const std::string& cycle)
      : Error("cycle in taxonomy: " + cycle) {}
};

// An edge references a concept id that was never declared.
class DanglingEdgeError : public Error {
 public:
  explicit DanglingEdgeError(const std::string& id)
      : Error("edge references undeclared concept: " + id), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class UnknownConceptError : public Error {
 public:
  explicit UnknownConceptError(const std::string& id)
      : Error("unknown concept: " + id) {}
};

// Tagging requires exactly five votes.
class VoteCountError : public Error {
 public:
  explicit VoteCountError(std::size_t got)
      : Error("expected exactly 5 votes, got " + std::to_string(got)) {}
};

// Commonality can only be tagged on a concept already tagged Visual.
class NotVisualError : public Error {
 public:
  explicit NotVisualError(const std::string& id)
      : Error("concept is not tagged visual: " + id) {}
};

class MissingEmbeddingError : public Error {
 public:
  explicit MissingEmbeddingError(const std::string& key)
      : Error("no embedding for key: " + key) {}
};

// Head extraction found no token in the name.
class EmptyAfterTokenizeError : public Error {
 public:
  explicit EmptyAfterTokenizeError(const std::string& name)
      : Error("no token survives tokenization of: \"" + name + "\"") {}
};

// Image buffer size does not match the declared dimensions.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// Invalid pool generation spec (dimension mismatch, bad counts, ...).
class SpecError : public Error {
 public:
  explicit SpecError(const std::string& msg) : Error(msg) {}
};

class EmptyTrainingSetError : public Error {
 public:
  EmptyTrainingSetError() : Error("training set is empty") {}
};

class DimMismatchError : public Error {
 public:
  DimMismatchError(std::size_t got, std::size_t want)
      : Error("feature dim " + std::to_string(got) + " does not match model dim " +
              std::to_string(want)) {}
};

class SingleClassError : public Error {
 public:
  SingleClassError() : Error("operation requires at least 2 classes") {}
};

class EmptyEvalSetError : public Error {
 public:
  EmptyEvalSetError() : Error("evaluation set is empty") {}
};

class MissingProposalsError : public Error {
 public:
  explicit MissingProposalsError(std::uint64_t sample_id)
      : Error("sample " + std::to_string(sample_id) + " carries no proposals") {}
};

// Run configuration problem; carries the offending key path (e.g. "al.batch").
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key_path, const std::string& msg)
      : Error("config key " + key_path + ": " + msg), key_path_(key_path) {}
  const std::string& key_path() const { return key_path_; }

 private:
  std::string key_path_;
};

}  // namespace curator
