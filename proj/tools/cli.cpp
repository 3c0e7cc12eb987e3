#include "cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "geome/checkpoint.hpp"
#include "geome/data.hpp"
#include "geome/error.hpp"
#include "geome/eval.hpp"
#include "geome/model.hpp"
#include "geome/synthetic.hpp"
#include "geome/train.hpp"

namespace geome::cli {
namespace {

namespace fs = std::filesystem;

const std::map<std::string, double> kPresetLambda = {
    {"wn18", 0.025}, {"fb15k-237", 0.05}, {"wn18rr", 0.1}};

struct TrainOpts {
  std::string model = "geome2d";
  std::string train, valid, test;
  std::size_t dim = 1000;
  double lambda = 0.01;
  double lr = 0.1;
  std::size_t batch = 1000;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  double init_std = 1e-2;
  std::size_t eval_every = 5;
  std::size_t patience = 3;
  std::string precision = "f64";
  std::string preset;
  std::vector<std::string> constrain_symmetric;
  std::vector<std::string> constrain_inverse;
  double constraint_weight = 10.0;
};

void add_train_options(CLI::App* cmd, TrainOpts& o, bool needs_valid) {
  cmd->add_option("--model", o.model, "geome1d | geome2d | geome3d")
      ->check(CLI::IsMember({"geome1d", "geome2d", "geome3d"}))
      ->capture_default_str();
  cmd->add_option("--train", o.train, "training triples (TSV)")->required()->check(CLI::ExistingFile);
  auto* valid = cmd->add_option("--valid", o.valid, "validation triples (TSV)")->check(CLI::ExistingFile);
  if (needs_valid) valid->required();
  cmd->add_option("--test", o.test, "test triples (TSV)")->check(CLI::ExistingFile);
  cmd->add_option("--dim", o.dim, "embedding dimensionality k")->capture_default_str()->check(CLI::PositiveNumber);
  auto* lambda = cmd->add_option("--lambda", o.lambda, "N3 weight")->capture_default_str()->check(CLI::NonNegativeNumber);
  cmd->add_option("--preset", o.preset, "dataset lambda preset")
      ->check(CLI::IsMember({"wn18", "fb15k-237", "wn18rr"}))
      ->excludes(lambda);
  cmd->add_option("--lr", o.lr, "Adagrad learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--batch", o.batch, "batch size")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", o.epochs, "maximum epochs")->capture_default_str();
  cmd->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--init-std", o.init_std, "initialization std")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--eval-every", o.eval_every, "epochs between validations")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--patience", o.patience, "evaluations without improvement")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--precision", o.precision, "f32 | f64")->check(CLI::IsMember({"f32", "f64"}))->capture_default_str();
  cmd->add_option("--constrain-symmetric", o.constrain_symmetric, "relation to train as symmetric");
  cmd->add_option("--constrain-inverse", o.constrain_inverse, "R1,R2 pair to train as inverses");
  cmd->add_option("--constraint-weight", o.constraint_weight, "weight of the pattern penalties")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
}

Grade model_grade(const std::string& model) {
  if (model == "geome1d") return Grade::one;
  if (model == "geome3d") return Grade::three;
  return Grade::two;
}

std::string fmt(double v, const char* spec = "%g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

struct Prepared {
  TripleStore train;  // reciprocal-augmented
  TripleStore valid;
  std::optional<TripleStore> test;
  TrainConfig cfg;
  std::string config_json;
};

Prepared prepare(const TrainOpts& o, std::size_t dim) {
  std::vector<fs::path> files{o.train};
  if (!o.valid.empty()) files.emplace_back(o.valid);
  if (!o.test.empty()) files.emplace_back(o.test);
  const Vocabulary vocab = build_dictionaries(files);

  Prepared p;
  p.train = augment_reciprocal(load_triples(o.train, vocab.entities, vocab.relations));
  if (!o.valid.empty()) {
    p.valid = load_triples(o.valid, vocab.entities, vocab.relations);
  } else {
    p.valid.entities = vocab.entities;
    p.valid.relations = vocab.relations;
  }
  if (!o.test.empty()) p.test = load_triples(o.test, vocab.entities, vocab.relations);

  TrainConfig& c = p.cfg;
  c.grade = model_grade(o.model);
  c.precision = o.precision == "f32" ? Precision::f32 : Precision::f64;
  c.dim_k = dim;
  c.lr = o.lr;
  c.batch_size = o.batch;
  c.lambda_reg = o.preset.empty() ? o.lambda : kPresetLambda.at(o.preset);
  c.max_epochs = o.epochs;
  c.seed = o.seed;
  c.init_std = o.init_std;
  c.eval_every = o.eval_every;
  c.patience = o.patience;

  // Constraints hold for the raw relations and, mirrored, for their reciprocals.
  const auto R = static_cast<std::int32_t>(p.train.num_raw_relations());
  const Dictionary& rels = *vocab.relations;
  auto add = [&](PatternConstraint::Kind kind, std::int32_t a, std::int32_t b) {
    c.constraints.push_back({kind, a, b, o.constraint_weight});
    c.constraints.push_back({kind, a + R, b + R, o.constraint_weight});
  };
  for (const auto& name : o.constrain_symmetric) {
    const std::int32_t r = rels.id(name);
    add(PatternConstraint::Kind::symmetric, r, r);
  }
  for (const auto& pair : o.constrain_inverse) {
    const auto comma = pair.find(',');
    if (comma == std::string::npos) {
      throw CLI::ValidationError("--constrain-inverse", "expected R1,R2 but got '" + pair + "'");
    }
    const std::int32_t a = rels.id(pair.substr(0, comma));
    const std::int32_t b = rels.id(pair.substr(comma + 1));
    add(PatternConstraint::Kind::inverse, a, b);
    add(PatternConstraint::Kind::inverse, b, a);
  }

  nlohmann::ordered_json j;
  j["model"] = o.model;
  j["dim"] = c.dim_k;
  j["lambda"] = c.lambda_reg;
  j["lr"] = c.lr;
  j["batch"] = c.batch_size;
  j["epochs"] = c.max_epochs;
  j["seed"] = c.seed;
  j["init_std"] = c.init_std;
  j["eval_every"] = c.eval_every;
  j["patience"] = c.patience;
  j["precision"] = o.precision;
  j["constrain_symmetric"] = o.constrain_symmetric;
  j["constrain_inverse"] = o.constrain_inverse;
  j["constraint_weight"] = o.constraint_weight;
  p.config_json = j.dump();
  return p;
}

FilterIndex filter_for(std::initializer_list<const TripleStore*> stores) {
  FilterIndex f;
  for (const auto* s : stores) {
    for (const auto& t : s->triples) {
      if (static_cast<std::size_t>(t.relation) < s->num_raw_relations()) f.add(t);
    }
  }
  return f;
}

int cmd_train(const TrainOpts& o, const std::string& out_path, std::ostream& out) {
  Prepared p = prepare(o, o.dim);
  const TrainConfig& c = p.cfg;
  out << "model=" << o.model << " lr=" << fmt(c.lr) << " b=" << c.batch_size << " k=" << c.dim_k
      << " lambda=" << fmt(c.lambda_reg) << " epochs=" << c.max_epochs << " seed=" << c.seed
      << " precision=" << o.precision << "\n";
  out << "entities=" << p.train.num_entities() << " relations=" << p.train.num_raw_relations()
      << " train=" << p.train.size() / 2 << " valid=" << p.valid.size() << "\n";

  const FitResult fr = fit(p.train, p.valid, c, &out);
  out << "best_epoch=" << fr.history.best_epoch << "\n";

  Checkpoint ck;
  ck.table = fr.table;
  ck.entities = p.train.entities;
  ck.relations = p.train.relations;
  ck.reciprocal = true;
  ck.config_json = p.config_json;
  save_checkpoint(out_path, ck);
  out << "checkpoint=" << out_path << "\n";

  if (p.test) {
    const FilterIndex filter = filter_for({&p.train, &p.valid, &*p.test});
    EvalOptions eo;
    eo.reciprocal_offset = p.train.num_raw_relations();
    const RankMetrics m = evaluate_split(TableScorer(fr.table), p.test->triples, filter, eo);
    out << "test " << m.to_json() << "\n";
  }
  return 0;
}

struct EvalOpts {
  std::string ckpt, ckpt2, test;
  std::vector<std::string> filters;
  bool raw = false;
};

int cmd_eval(const EvalOpts& o, std::ostream& out) {
  const Checkpoint a = load_checkpoint(o.ckpt);
  std::optional<Checkpoint> b;
  if (!o.ckpt2.empty()) {
    b = load_checkpoint(o.ckpt2);
    if (*a.entities != *b->entities || *a.relations != *b->relations ||
        a.reciprocal != b->reciprocal) {
      throw std::invalid_argument("--ckpt and --ckpt2 use different dictionaries");
    }
  }
  const TripleStore test = load_triples(o.test, a.entities, a.relations);
  FilterIndex filter;
  for (const auto& f : o.filters) filter.add(load_triples(f, a.entities, a.relations).triples);
  filter.add(test.triples);

  EvalOptions eo;
  eo.filtered = !o.raw;
  if (a.reciprocal) eo.reciprocal_offset = a.relations->size();
  RankMetrics m;
  if (b) {
    m = evaluate_split(EnsembleScorer(a.table, b->table), test.triples, filter, eo);
  } else {
    m = evaluate_split(TableScorer(a.table), test.triples, filter, eo);
  }
  out << m.to_json() << "\n" << m.to_table();
  return 0;
}

std::size_t resolve_relation(const Checkpoint& ck, const std::string& name) {
  constexpr std::string_view suffix = "^-1";
  if (ck.reciprocal && name.size() > suffix.size() && name.ends_with(suffix)) {
    const std::string base = name.substr(0, name.size() - suffix.size());
    if (const auto id = ck.relations->find(base); id && !ck.relations->find(name)) {
      return static_cast<std::size_t>(*id) + ck.relations->size();
    }
  }
  return static_cast<std::size_t>(ck.relations->id(name));
}

int cmd_score(const std::string& ckpt, const std::string& triple, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(ckpt);
  std::vector<std::string> f;
  if (triple.find('\t') != std::string::npos) {
    std::size_t start = 0;
    while (true) {
      const auto tab = triple.find('\t', start);
      f.push_back(triple.substr(start, tab == std::string::npos ? tab : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
  } else {
    std::istringstream in(triple);
    for (std::string w; in >> w;) f.push_back(w);
  }
  if (f.size() != 3) throw CLI::ValidationError("--triple", "expected \"head<TAB>relation<TAB>tail\"");
  const double phi = score_triple(ck.table, static_cast<std::size_t>(ck.entities->id(f[0])),
                                  resolve_relation(ck, f[1]),
                                  static_cast<std::size_t>(ck.entities->id(f[2])));
  out << fmt(phi, "%.17g") << "\n";
  return 0;
}

int cmd_inspect(const std::string& ckpt, const std::string& rel, const std::string& pair,
                std::ostream& out) {
  const Checkpoint ck = load_checkpoint(ckpt);
  std::optional<std::size_t> partner;
  if (!pair.empty()) partner = resolve_relation(ck, pair);
  const RelationReport rep = inspect_relation(ck.table, resolve_relation(ck, rel), partner);
  out << "relation=" << rel << " grade=" << static_cast<int>(rep.grade) << "\n";
  out << "scalar=" << fmt(rep.scalar_norm, "%.6g") << " vector=" << fmt(rep.vector_norm, "%.6g")
      << " bivector=" << fmt(rep.bivector_norm, "%.6g");
  if (rep.grade == Grade::three) out << " trivector=" << fmt(rep.trivector_norm, "%.6g");
  out << "\n";
  if (partner) {
    out << "pair=" << pair << " conjugacy_distance=" << fmt(*rep.conjugacy_distance, "%.6g")
        << " conjugacy_normalized=" << fmt(*rep.conjugacy_normalized, "%.6g") << "\n";
  }
  return 0;
}

int cmd_gen_synth(const SyntheticSpec& spec, const std::string& dir, std::ostream& out) {
  const SyntheticKG kg = generate_synthetic(spec);
  write_synthetic(kg, dir);
  out << "entities=" << kg.train.num_entities() << " relations=" << kg.train.num_raw_relations()
      << " train=" << kg.train.size() << " valid=" << kg.valid.size()
      << " test=" << kg.test.size() << " dir=" << dir << "\n";
  return 0;
}

int cmd_sweep(const TrainOpts& o, const std::vector<std::size_t>& dims, std::ostream& out,
              std::ostream& err) {
  if (o.test.empty() && o.valid.empty()) {
    throw CLI::ValidationError("sweep", "needs --test or --valid to score each dimension");
  }
  out << "dim,mrr,hits10\n";
  for (const std::size_t k : dims) {
    Prepared p = prepare(o, k);
    err << "dim=" << k << "\n";
    const FitResult fr = fit(p.train, p.valid, p.cfg, &err);
    const TripleStore& target = p.test ? *p.test : p.valid;
    const FilterIndex filter =
        p.test ? filter_for({&p.train, &p.valid, &*p.test}) : filter_for({&p.train, &p.valid});
    EvalOptions eo;
    eo.reciprocal_offset = p.train.num_raw_relations();
    const RankMetrics m = evaluate_split(TableScorer(fr.table), target.triples, filter, eo);
    char row[96];
    std::snprintf(row, sizeof(row), "%zu,%.6f,%.6f\n", k, m.mrr, m.hits10);
    out << row << std::flush;
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"GeomE knowledge-graph embeddings", "geome"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = OpenMP default)")
      ->check(CLI::NonNegativeNumber);

  TrainOpts train_opts;
  std::string out_path;
  auto* train = app.add_subcommand("train", "train a model and write a checkpoint");
  add_train_options(train, train_opts, false);
  train->add_option("--out", out_path, "checkpoint path")->required();

  EvalOpts eval_opts;
  auto* eval = app.add_subcommand("eval", "filtered link-prediction metrics");
  eval->add_option("--ckpt", eval_opts.ckpt, "checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--ckpt2", eval_opts.ckpt2, "second checkpoint (GeomE+ ensemble)")
      ->check(CLI::ExistingFile);
  eval->add_option("--test", eval_opts.test, "test triples")->required()->check(CLI::ExistingFile);
  eval->add_option("--filter", eval_opts.filters, "known-true triple files")
      ->delimiter(',')
      ->check(CLI::ExistingFile);
  eval->add_flag("--raw", eval_opts.raw, "unfiltered ranking");

  std::string score_ckpt, score_triple_arg;
  auto* score = app.add_subcommand("score", "print the score of one triple");
  score->add_option("--ckpt", score_ckpt, "checkpoint")->required()->check(CLI::ExistingFile);
  score->add_option("--triple", score_triple_arg, "head<TAB>relation<TAB>tail")->required();

  std::string insp_ckpt, insp_rel, insp_pair;
  auto* inspect = app.add_subcommand("inspect", "blade-group norms of a relation");
  inspect->add_option("--ckpt", insp_ckpt, "checkpoint")->required()->check(CLI::ExistingFile);
  inspect->add_option("--relation", insp_rel, "relation name")->required();
  inspect->add_option("--pair", insp_pair, "partner relation for the conjugacy distance");

  SyntheticSpec spec;
  std::string synth_dir;
  auto* gen = app.add_subcommand("gen-synth", "write a synthetic pattern KG");
  gen->add_option("--out", synth_dir, "output directory")->required();
  gen->add_option("--seed", spec.seed)->capture_default_str();
  gen->add_option("--entities", spec.n_entities)->capture_default_str();
  gen->add_option("--sym", spec.n_sym)->capture_default_str();
  gen->add_option("--antisym", spec.n_antisym)->capture_default_str();
  gen->add_option("--inverse", spec.n_inverse_pairs)->capture_default_str();
  gen->add_option("--comp", spec.n_comp_triples)->capture_default_str();
  gen->add_option("--density", spec.density)->capture_default_str();
  gen->add_option("--chains", spec.n_chains)->capture_default_str();
  gen->add_option("--holdout", spec.holdout_fraction)->capture_default_str();

  TrainOpts sweep_opts;
  std::vector<std::size_t> dims{20, 50, 100, 200, 500, 1000};
  auto* sweep = app.add_subcommand("sweep", "retrain over several k and print CSV");
  add_train_options(sweep, sweep_opts, false);
  sweep->add_option("--dims", dims, "comma-separated k values")->delimiter(',')->capture_default_str();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  if (threads > 0) omp_set_num_threads(threads);
  try {
    if (*train) return cmd_train(train_opts, out_path, out);
    if (*eval) return cmd_eval(eval_opts, out);
    if (*score) return cmd_score(score_ckpt, score_triple_arg, out);
    if (*inspect) return cmd_inspect(insp_ckpt, insp_rel, insp_pair, out);
    if (*gen) return cmd_gen_synth(spec, synth_dir, out);
    if (*sweep) return cmd_sweep(sweep_opts, dims, out, err);
  } catch (const CLI::ValidationError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace geome::cli
