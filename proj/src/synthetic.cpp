#include "geome/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <utility>

#include <nlohmann/json.hpp>

#include "geome/error.hpp"

namespace geome {
namespace {

using Pair = std::pair<std::int32_t, std::int32_t>;

struct Draft {
  std::vector<std::string> relation_names;
  std::vector<Triple> ground;
  // implied triples grouped by relation, in generation order
  std::vector<std::vector<ImpliedTriple>> implied;

  std::int32_t add_relation(std::string name) {
    relation_names.push_back(std::move(name));
    implied.emplace_back();
    return static_cast<std::int32_t>(relation_names.size() - 1);
  }
};

std::size_t ground_count(double density, std::size_t n, const char* what) {
  const auto m = static_cast<std::size_t>(std::llround(density * static_cast<double>(n * n)));
  if (m == 0) {
    throw GenerationError(std::string(what) + " density " + std::to_string(density) +
                          " gives no ground triples for " + std::to_string(n) + " entities");
  }
  if (m > n * (n - 1) / 4) {
    throw GenerationError(std::string(what) + " density " + std::to_string(density) +
                          " is too high for " + std::to_string(n) + " entities");
  }
  return m;
}

// m distinct ordered pairs (a != b); with `exclude_reverse` never both (a,b) and (b,a).
std::vector<Pair> sample_pairs(std::mt19937_64& rng, std::size_t n, std::size_t m,
                               bool exclude_reverse) {
  std::uniform_int_distribution<std::int32_t> pick(0, static_cast<std::int32_t>(n) - 1);
  std::set<Pair> seen;
  std::vector<Pair> out;
  while (out.size() < m) {
    const std::int32_t a = pick(rng);
    const std::int32_t b = pick(rng);
    if (a == b || seen.contains({a, b})) continue;
    if (exclude_reverse && seen.contains({b, a})) continue;
    seen.insert({a, b});
    out.emplace_back(a, b);
  }
  return out;
}

std::vector<std::string> entity_names(std::size_t n) {
  const int width = static_cast<int>(std::to_string(n - 1).size());
  std::vector<std::string> names;
  names.reserve(n);
  char buf[32];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "e%0*zu", width, i);
    names.emplace_back(buf);
  }
  return names;
}

nlohmann::ordered_json triple_json(const Triple& t, const Dictionary& e, const Dictionary& r) {
  return {{"head", e.name(t.head)}, {"relation", r.name(t.relation)}, {"tail", e.name(t.tail)}};
}

}  // namespace

const char* pattern_name(Pattern p) {
  switch (p) {
    case Pattern::symmetric: return "symmetric";
    case Pattern::antisymmetric: return "antisymmetric";
    case Pattern::inverse: return "inverse";
    case Pattern::composition: return "composition";
  }
  return "unknown";
}

SyntheticKG generate_synthetic(const SyntheticSpec& spec) {
  const std::size_t n = spec.n_entities;
  if (n < 4) throw GenerationError("need at least 4 entities");
  if (spec.n_sym + spec.n_antisym + spec.n_inverse_pairs + spec.n_comp_triples == 0) {
    throw GenerationError("spec declares no relations");
  }
  if (!(spec.holdout_fraction >= 0.0 && spec.holdout_fraction < 1.0)) {
    throw GenerationError("holdout_fraction must lie in [0, 1)");
  }
  const bool plain = spec.n_sym + spec.n_antisym + spec.n_inverse_pairs > 0;
  const std::size_t m = plain ? ground_count(spec.density, n, "ground") : 0;
  if (spec.n_comp_triples > 0 && spec.n_chains == 0) {
    throw GenerationError("composition relations need at least one chain");
  }
  if (3 * spec.n_chains * spec.n_comp_triples > n) {
    throw GenerationError(std::to_string(spec.n_comp_triples * spec.n_chains) +
                          " entity-disjoint composition chains need " +
                          std::to_string(3 * spec.n_chains * spec.n_comp_triples) +
                          " entities, have " + std::to_string(n));
  }

  std::mt19937_64 rng(spec.seed);
  Draft d;
  std::vector<RelationPattern> patterns;

  for (std::size_t i = 0; i < spec.n_sym; ++i) {
    const std::string name = "sym" + std::to_string(i);
    const std::int32_t r = d.add_relation(name);
    patterns.push_back({name, Pattern::symmetric, {}});
    std::bernoulli_distribution flip(0.5);
    for (auto [a, b] : sample_pairs(rng, n, m, true)) {
      if (flip(rng)) std::swap(a, b);
      const Triple g{a, r, b};
      d.ground.push_back(g);
      d.implied[r].push_back({{b, r, a}, Pattern::symmetric, {g}});
    }
  }
  for (std::size_t i = 0; i < spec.n_antisym; ++i) {
    const std::string name = "antisym" + std::to_string(i);
    const std::int32_t r = d.add_relation(name);
    patterns.push_back({name, Pattern::antisymmetric, {}});
    for (const auto& [a, b] : sample_pairs(rng, n, m, true)) d.ground.push_back({a, r, b});
  }
  for (std::size_t i = 0; i < spec.n_inverse_pairs; ++i) {
    const std::string na = "inv" + std::to_string(i) + "_a";
    const std::string nb = "inv" + std::to_string(i) + "_b";
    const std::int32_t ra = d.add_relation(na);
    const std::int32_t rb = d.add_relation(nb);
    patterns.push_back({na, Pattern::inverse, {nb}});
    patterns.push_back({nb, Pattern::inverse, {na}});
    for (const auto& [a, b] : sample_pairs(rng, n, m, false)) {
      const Triple g{a, ra, b};
      d.ground.push_back(g);
      d.implied[rb].push_back({{b, rb, a}, Pattern::inverse, {g}});
    }
  }
  std::vector<std::int32_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  std::shuffle(pool.begin(), pool.end(), rng);
  std::size_t next = 0;
  for (std::size_t i = 0; i < spec.n_comp_triples; ++i) {
    const std::string base = "comp" + std::to_string(i);
    const std::int32_t r1 = d.add_relation(base + "_r1");
    const std::int32_t r2 = d.add_relation(base + "_r2");
    const std::int32_t r3 = d.add_relation(base + "_r3");
    patterns.push_back({base + "_r3", Pattern::composition, {base + "_r1", base + "_r2"}});
    for (std::size_t c = 0; c < spec.n_chains; ++c) {
      const std::int32_t x = pool[next], y = pool[next + 1], z = pool[next + 2];
      next += 3;
      const Triple g1{x, r1, y}, g2{y, r2, z};
      d.ground.push_back(g1);
      d.ground.push_back(g2);
      d.implied[r3].push_back({{x, r3, z}, Pattern::composition, {g1, g2}});
    }
  }

  // Hold out a fraction of each relation's implied triples, alternating test / valid.
  std::vector<Triple> train = d.ground;
  std::vector<ImpliedTriple> held_valid, held_test;
  for (auto& group : d.implied) {
    if (group.empty()) continue;
    std::shuffle(group.begin(), group.end(), rng);
    const auto held = static_cast<std::size_t>(
        std::ceil(spec.holdout_fraction * static_cast<double>(group.size())));
    for (std::size_t j = 0; j < group.size(); ++j) {
      if (j >= held) {
        train.push_back(group[j].triple);
      } else if (j % 2 == 0) {
        held_test.push_back(group[j]);
      } else {
        held_valid.push_back(group[j]);
      }
    }
  }

  // Dictionaries from the symbols that actually occur, so reloading the
  // written files reproduces the same ids.
  const auto all_names = entity_names(n);
  std::vector<bool> used(n, false);
  auto mark = [&](const Triple& t) { used[t.head] = used[t.tail] = true; };
  for (const auto& t : train) mark(t);
  for (const auto& t : held_valid) mark(t.triple);
  for (const auto& t : held_test) mark(t.triple);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) {
    if (used[i]) names.push_back(all_names[i]);
  }
  auto ents = std::make_shared<const Dictionary>(std::move(names), "entity");
  auto rels = std::make_shared<const Dictionary>(d.relation_names, "relation");

  auto remap = [&](const Triple& t) {
    return Triple{ents->id(all_names[t.head]), rels->id(d.relation_names[t.relation]),
                  ents->id(all_names[t.tail])};
  };
  auto remap_implied = [&](ImpliedTriple it) {
    it.triple = remap(it.triple);
    for (auto& p : it.premises) p = remap(p);
    return it;
  };

  SyntheticKG kg;
  for (auto* s : {&kg.train, &kg.valid, &kg.test}) {
    s->entities = ents;
    s->relations = rels;
  }
  for (const auto& t : train) kg.train.triples.push_back(remap(t));
  for (const auto& t : held_valid) {
    kg.implied_valid.push_back(remap_implied(t));
    kg.valid.triples.push_back(kg.implied_valid.back().triple);
  }
  for (const auto& t : held_test) {
    kg.implied_test.push_back(remap_implied(t));
    kg.test.triples.push_back(kg.implied_test.back().triple);
  }
  kg.relations = std::move(patterns);
  return kg;
}

std::string SyntheticKG::manifest_json() const {
  const Dictionary& e = *train.entities;
  const Dictionary& r = *train.relations;
  nlohmann::ordered_json j;
  j["relations"] = nlohmann::ordered_json::array();
  for (const auto& p : relations) {
    j["relations"].push_back(
        {{"name", p.relation}, {"pattern", pattern_name(p.pattern)}, {"partners", p.partners}});
  }
  auto implied = [&](const std::vector<ImpliedTriple>& v) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& it : v) {
      auto o = triple_json(it.triple, e, r);
      o["pattern"] = pattern_name(it.pattern);
      o["premises"] = nlohmann::ordered_json::array();
      for (const auto& p : it.premises) o["premises"].push_back(triple_json(p, e, r));
      arr.push_back(std::move(o));
    }
    return arr;
  };
  j["implied_valid"] = implied(implied_valid);
  j["implied_test"] = implied(implied_test);
  return j.dump(2);
}

void write_synthetic(const SyntheticKG& kg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_triples(dir / "train.tsv", kg.train);
  save_triples(dir / "valid.tsv", kg.valid);
  save_triples(dir / "test.tsv", kg.test);
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
  out << kg.manifest_json() << '\n';
}

}  // namespace geome
