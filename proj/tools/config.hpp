#pragma once

// JSON experiment configuration: entity builders with field-path errors.
// The schema is documented in configs/README.md.

#include "oslab/grid.hpp"
#include "oslab/locprinc.hpp"
#include "oslab/semiclass.hpp"
#include "oslab/seqgen.hpp"
#include "oslab/symbol.hpp"

#include "json.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace oslab::cli {

using json = nlohmann::json;

// Schema violation at a dotted field path such as "pair.cases[0].symbol".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// A JSON value together with its path from the document root.
class Node {
 public:
  Node(const json* value, std::string path) : v_(value), path_(std::move(path)) {}

  const json& value() const { return *v_; }
  const std::string& path() const { return path_; }
  [[noreturn]] void fail(const std::string& message) const { throw ConfigError(path_, message); }

  bool has(const std::string& key) const;
  Node at(const std::string& key) const;  // required member
  Node operator[](std::size_t i) const;
  std::size_t size() const;  // array length (fails unless an array)
  std::vector<Node> elements() const;

  bool is_string() const { return v_->is_string(); }
  bool is_object() const { return v_->is_object(); }
  bool is_array() const { return v_->is_array(); }
  bool is_null() const { return v_->is_null(); }

  double number() const;
  long long integer() const;
  bool boolean() const;
  std::string string() const;
  Complex complex() const;  // number or [re, im]
  std::vector<double> numbers() const;
  std::vector<long long> integers() const;

  double number_or(const std::string& key, double fallback) const;
  long long integer_or(const std::string& key, long long fallback) const;
  bool boolean_or(const std::string& key, bool fallback) const;
  std::string string_or(const std::string& key, const std::string& fallback) const;
  Complex complex_or(const std::string& key, Complex fallback) const;

  // Reject members outside `allowed` (catches misspelt keys).
  void only(std::initializer_list<const char*> allowed) const;

 private:
  const json* v_;
  std::string path_;
};

// Parsed document plus the named entity sections. Entities are referenced
// either by name (a string) or inline (an object).
class Config {
 public:
  static Config load(const std::filesystem::path& file);
  static Config parse(const std::string& text, std::filesystem::path base_dir = ".");

  Node root() const { return Node(&doc_, ""); }
  Node section(const std::string& key) const;  // required top-level section
  bool has_section(const std::string& key) const { return doc_.contains(key); }
  const std::string& text() const { return text_; }

  Grid grid() const;
  Grid grid(const Node& n) const;

  Schedule schedule(const Node& n) const;
  Profile profile(const Node& n) const;
  SequenceFamily family(const Node& n) const;
  Symbol symbol(const Node& n) const;
  // Test function on a grid: {"profile": ..., "center": [...]} or a
  // profile spec with an optional "center".
  GridFunction test_function(const Node& n, const Grid& g) const;
  // Input function: a test function times e^{2 pi i k.x} for "frequency" k.
  GridFunction input_function(const Node& n, const Grid& g) const;
  PhaseSymbol phase_symbol(const Node& n, int d) const;
  PdeSystem system(const Node& n) const;
  TestBank bank(const Node& n, const Grid& g) const;
  std::vector<long long> n_schedule(const Node& n) const;  // list or {"dyadic": k}

  std::filesystem::path resolve_path(const std::string& p) const { return base_dir_ / p; }

 private:
  // Follow a name reference into the given top-level section.
  Node deref(const Node& n, const char* section) const;
  Point point(const Node& n, int d) const;

  json doc_;
  std::string text_;
  std::filesystem::path base_dir_;
};

}  // namespace oslab::cli
