#include "geome/data.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "geome/error.hpp"

namespace geome {
namespace {

struct RawTriple {
  std::string head, relation, tail;
  std::size_t line;
};

std::vector<RawTriple> read_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<RawTriple> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3) {
      throw ParseError(path.string(), lineno,
                       "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      if (f.empty()) throw ParseError(path.string(), lineno, "empty field");
    }
    out.push_back({std::move(fields[0]), std::move(fields[1]), std::move(fields[2]), lineno});
  }
  return out;
}

}  // namespace

Dictionary::Dictionary(std::vector<std::string> names, std::string kind)
    : names_(std::move(names)), kind_(std::move(kind)) {
  std::ranges::sort(names_);
  names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
  index_.reserve(names_.size());
  for (std::size_t i = 0; i < names_.size(); ++i) {
    index_.emplace(names_[i], static_cast<std::int32_t>(i));
  }
}

std::optional<std::int32_t> Dictionary::find(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::int32_t Dictionary::id(std::string_view name) const {
  if (auto v = find(name)) return *v;
  throw VocabularyError(kind_, std::string(name));
}

std::string TripleStore::relation_name(std::size_t id) const {
  const std::size_t raw = num_raw_relations();
  if (id < raw) return relations->name(id);
  if (reciprocal && id < 2 * raw) return relations->name(id - raw) + "^-1";
  throw std::out_of_range("relation id " + std::to_string(id));
}

Vocabulary build_dictionaries(std::span<const std::filesystem::path> files) {
  std::set<std::string> ents;
  std::set<std::string> rels;
  for (const auto& f : files) {
    for (auto& t : read_raw(f)) {
      ents.insert(std::move(t.head));
      ents.insert(std::move(t.tail));
      rels.insert(std::move(t.relation));
    }
  }
  return {std::make_shared<const Dictionary>(std::vector<std::string>(ents.begin(), ents.end()),
                                             "entity"),
          std::make_shared<const Dictionary>(std::vector<std::string>(rels.begin(), rels.end()),
                                             "relation")};
}

TripleStore load_triples(const std::filesystem::path& path,
                         std::shared_ptr<const Dictionary> entities,
                         std::shared_ptr<const Dictionary> relations) {
  const std::vector<RawTriple> raw = read_raw(path);
  if (!entities || !relations) {
    std::vector<std::string> ents;
    std::vector<std::string> rels;
    for (const auto& t : raw) {
      ents.push_back(t.head);
      ents.push_back(t.tail);
      rels.push_back(t.relation);
    }
    if (!entities) entities = std::make_shared<const Dictionary>(std::move(ents), "entity");
    if (!relations) relations = std::make_shared<const Dictionary>(std::move(rels), "relation");
  }

  TripleStore store;
  store.entities = entities;
  store.relations = relations;
  store.triples.reserve(raw.size());
  std::map<Triple, std::size_t> seen;
  for (const auto& t : raw) {
    const Triple tr{entities->id(t.head), relations->id(t.relation), entities->id(t.tail)};
    const auto [it, inserted] = seen.emplace(tr, t.line);
    if (!inserted) throw DuplicateTripleError(path.string(), it->second, t.line);
    store.triples.push_back(tr);
  }
  return store;
}

void save_triples(const std::filesystem::path& path, const TripleStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& t : store.triples) {
    if (static_cast<std::size_t>(t.relation) >= store.num_raw_relations()) {
      throw std::invalid_argument("save_triples: reciprocal relations cannot be written as TSV");
    }
    out << store.entities->name(t.head) << '\t' << store.relations->name(t.relation) << '\t'
        << store.entities->name(t.tail) << '\n';
  }
}

TripleStore augment_reciprocal(const TripleStore& store) {
  if (store.reciprocal) throw std::invalid_argument("store is already reciprocal-augmented");
  TripleStore out;
  out.entities = store.entities;
  out.relations = store.relations;
  out.reciprocal = true;
  const auto offset = static_cast<std::int32_t>(store.num_raw_relations());
  out.triples.reserve(store.triples.size() * 2);
  out.triples = store.triples;
  for (const auto& t : store.triples) out.triples.push_back({t.tail, t.relation + offset, t.head});
  return out;
}

}  // namespace geome
