#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace geome {

struct Triple {
  std::int32_t head = 0;
  std::int32_t relation = 0;
  std::int32_t tail = 0;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// Bidirectional name <-> id map. Ids are the positions in lexicographic
// order of the (unique) names, so they do not depend on input order.
class Dictionary {
 public:
  Dictionary() = default;
  explicit Dictionary(std::vector<std::string> names, std::string kind = "symbol");

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t id) const { return names_.at(id); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& kind() const { return kind_; }

  std::optional<std::int32_t> find(std::string_view name) const;
  // Throws VocabularyError for an unknown name.
  std::int32_t id(std::string_view name) const;

  friend bool operator==(const Dictionary& a, const Dictionary& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::string kind_ = "symbol";
  std::unordered_map<std::string, std::int32_t> index_;
};

struct TripleStore {
  std::vector<Triple> triples;
  std::shared_ptr<const Dictionary> entities;
  std::shared_ptr<const Dictionary> relations;  // raw relation names
  // Set by augment_reciprocal: relation ids [R, 2R) are the reciprocals.
  bool reciprocal = false;

  std::size_t num_entities() const { return entities ? entities->size() : 0; }
  std::size_t num_raw_relations() const { return relations ? relations->size() : 0; }
  std::size_t num_relations() const { return num_raw_relations() * (reciprocal ? 2 : 1); }
  std::size_t size() const { return triples.size(); }
  // Raw name, or "<name>^-1" for a reciprocal id.
  std::string relation_name(std::size_t id) const;
};

struct Vocabulary {
  std::shared_ptr<const Dictionary> entities;
  std::shared_ptr<const Dictionary> relations;
};

// Sorted union of the symbols of every file ("head<TAB>relation<TAB>tail").
Vocabulary build_dictionaries(std::span<const std::filesystem::path> files);

// Loads one split. Without dictionaries, builds sorted ones from this file;
// with them, every symbol must already be known (VocabularyError otherwise).
// Malformed lines raise ParseError, repeated triples DuplicateTripleError.
TripleStore load_triples(const std::filesystem::path& path,
                         std::shared_ptr<const Dictionary> entities = nullptr,
                         std::shared_ptr<const Dictionary> relations = nullptr);

void save_triples(const std::filesystem::path& path, const TripleStore& store);

// Adds (t, r + R, h) for every (h, r, t).
TripleStore augment_reciprocal(const TripleStore& store);

}  // namespace geome
