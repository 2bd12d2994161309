#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <unordered_map>

#include <CLI11.hpp>
#include <json.hpp>

#include "citex/analysis.hpp"
#include "citex/config.hpp"
#include "citex/context.hpp"
#include "citex/corpus.hpp"
#include "citex/embed.hpp"
#include "citex/errors.hpp"
#include "citex/metrics.hpp"
#include "citex/rerank.hpp"
#include "citex/retrieval.hpp"
#include "citex/synth.hpp"
#include "citex/textkit.hpp"

namespace fs = std::filesystem;
using namespace citex;

namespace {

struct GlobalArgs {
  std::string config_path;
  bool serial = false;

  Exec exec() const { return serial ? Exec::serial : Exec::parallel; }

  PipelineConfig load_config() const {
    std::string path = config_path;
    if (path.empty()) {
      if (const char* env = std::getenv("CITEX_CONFIG")) path = env;
    }
    if (path.empty()) return PipelineConfig{};
    return PipelineConfig::from_file(path);
  }
};

std::vector<ExplanationInstance> split_subset(
    const std::vector<ExplanationInstance>& all, const std::string& split) {
  if (split == "all") return all;
  Split want = split_from_string(split);
  std::vector<ExplanationInstance> out;
  for (const auto& inst : all)
    if (inst.split == want) out.push_back(inst);
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir);
}

std::unordered_set<std::string> held_out_ids(const SplitPlan& plan) {
  std::unordered_set<std::string> out(plan.test_principals.begin(),
                                      plan.test_principals.end());
  out.insert(plan.validation_principals.begin(),
             plan.validation_principals.end());
  return out;
}

void write_json_file(const nlohmann::ordered_json& j, const std::string& path,
                     int indent = 2) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(indent) << "\n";
}

// System/rerank/retrieval output rows: {"instance": idx, "text": ...}.
std::vector<std::string> read_system_outputs(const std::string& path,
                                             std::size_t expected) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open system output file: " + path);
  std::vector<std::string> texts(expected);
  std::vector<bool> seen(expected, false);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      std::size_t idx = j.at("instance").get<std::size_t>();
      if (idx >= expected)
        throw DataError("instance index " + std::to_string(idx) +
                        " out of range (expected < " +
                        std::to_string(expected) + ")");
      if (seen[idx]) throw DataError("duplicate instance index " +
                                     std::to_string(idx));
      seen[idx] = true;
      texts[idx] = j.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, line_no,
                       std::string("bad output record: ") + e.what());
    } catch (const DataError& e) {
      throw ParseError(path, line_no, e.what());
    }
  }
  for (std::size_t i = 0; i < expected; ++i)
    if (!seen[i])
      throw DataError(path + ": no output for instance " + std::to_string(i));
  return texts;
}

// --- subcommands ---------------------------------------------------------

int cmd_synth(const GlobalArgs& g, const std::string& out_dir,
              std::size_t docs, std::size_t topics, std::size_t candidates,
              int dim, std::uint64_t seed, std::size_t n_test,
              std::size_t n_val, std::size_t neighbors_k) {
  (void)g;
  ensure_dir(out_dir);
  SynthSpec spec;
  spec.n_docs = docs;
  spec.n_topics = topics;
  spec.n_candidates = candidates;
  spec.embedding_dim = dim;
  spec.seed = seed;

  const std::string corpus_path = out_dir + "/corpus.jsonl";
  write_corpus_jsonl(spec, corpus_path);
  Corpus corpus = make_synthetic_corpus(spec);

  Tokenizer tokenizer;
  make_synthetic_embeddings(corpus, spec, tokenizer)
      .save(out_dir + "/embeddings.tsv");

  // Candidate/judgment files are indexed against the test split that
  // build-dataset will produce under the same seed and sizes.
  SplitPlan plan = make_split_plan(corpus, n_test, n_val, seed);
  auto instances = build_splits(corpus, plan, tokenizer);
  auto test_instances = split_subset(instances, "test");
  write_candidates(make_synthetic_candidates(corpus, test_instances, spec),
                   out_dir + "/candidates.jsonl");
  write_completions(make_synthetic_completions(test_instances, spec),
                    out_dir + "/completions.jsonl");
  write_judgments(
      make_synthetic_judgments(test_instances, {"ir", "rerank"}, spec),
      out_dir + "/judgments.csv");

  nlohmann::ordered_json cfg;
  cfg["seed"] = seed;
  cfg["paths"] = {{"corpus", corpus_path},
                  {"embeddings", out_dir + "/embeddings.tsv"},
                  {"candidates", out_dir + "/candidates.jsonl"},
                  {"judgments", out_dir + "/judgments.csv"},
                  {"output_dir", out_dir + "/out"}};
  cfg["split"] = {{"test_principals", n_test},
                  {"validation_principals", n_val}};
  cfg["retrieval"] = {{"alpha", 1.0}, {"beta", 1.0}, {"k", neighbors_k}};
  write_json_file(cfg, out_dir + "/config.json");

  std::cerr << "synth: " << corpus.documents().size() << " docs, "
            << corpus.edges().size() << " kept edges, "
            << test_instances.size() << " test instances\n";
  return 0;
}

int cmd_build_dataset(const GlobalArgs& g, PipelineConfig cfg,
                      const std::string& out_dir) {
  cfg.require_inputs({"corpus"});
  ensure_dir(out_dir);
  Corpus corpus = load_corpus(cfg.paths.corpus);
  if (!cfg.paths.entities.empty())
    corpus.load_entity_annotations(cfg.paths.entities);
  Tokenizer tokenizer;
  SplitPlan plan = make_split_plan(corpus, cfg.test_principals,
                                   cfg.validation_principals, cfg.seed);
  SplitStats split_stats;
  auto instances = build_splits(corpus, plan, tokenizer,
                                cfg.context.target_budget, &split_stats);
  write_instances(instances, out_dir + "/instances.jsonl");
  write_split_plan(plan, out_dir + "/plan.json");

  // Corpus-level stats in the shape of the dataset table: documents,
  // tokens, unique tokens, explanations, with per-document averages.
  std::uint64_t total_tokens = 0, total_unique = 0;
  std::unordered_set<std::string> global_vocab;
  for (const auto& doc : corpus.documents()) {
    std::unordered_set<std::string> vocab;
    auto count = [&](const std::string& text) {
      for (auto& tok : tokenizer.tokenize(text)) {
        ++total_tokens;
        vocab.insert(std::move(tok));
      }
    };
    count(doc.title);
    count(doc.abstract_text);
    count(doc.introduction);
    for (const auto& p : doc.body_paragraphs) count(p);
    total_unique += vocab.size();
    global_vocab.insert(vocab.begin(), vocab.end());
  }
  const double n_docs = static_cast<double>(corpus.documents().size());
  const auto& ls = corpus.stats();
  nlohmann::ordered_json stats;
  stats["documents"] = corpus.documents().size();
  stats["tokens"] = {{"total", total_tokens},
                     {"average_per_document", total_tokens / n_docs}};
  stats["unique_tokens"] = {{"total", global_vocab.size()},
                            {"average_per_document", total_unique / n_docs}};
  stats["explanations"] = {{"total", corpus.edges().size()},
                           {"average_per_document",
                            corpus.edges().size() / n_docs}};
  stats["splits"] = {{"train", split_stats.train},
                     {"validation", split_stats.validation},
                     {"test", split_stats.test}};
  stats["dropped"] = {{"unresolved", ls.dropped_unresolved},
                      {"self_citation", ls.dropped_self},
                      {"multi_citation", ls.dropped_multi_citation},
                      {"leakage", split_stats.dropped_leakage},
                      {"missing_fields", split_stats.dropped_missing_fields}};
  stats["citation_records"] = ls.citation_records;
  write_json_file(stats, out_dir + "/stats.json");
  std::cerr << "build-dataset: " << split_stats.train << " train / "
            << split_stats.validation << " validation / " << split_stats.test
            << " test\n";
  (void)g;
  return 0;
}

int cmd_build_context(const GlobalArgs& g, PipelineConfig cfg,
                      const std::string& instances_path,
                      const std::string& view, const std::string& split,
                      const std::string& out_dir, bool no_target) {
  cfg.require_inputs({"corpus"});
  ensure_dir(out_dir);
  Corpus corpus = load_corpus(cfg.paths.corpus);
  if (!cfg.paths.entities.empty())
    corpus.load_entity_annotations(cfg.paths.entities);
  Tokenizer tokenizer;
  auto all = read_instances(instances_path, &corpus);
  auto instances = split_subset(all, split);
  if (instances.empty()) throw DataError("no instances in split: " + split);

  std::vector<std::pair<PrincipalView, CitedView>> views;
  if (view == "all") {
    for (auto p : {PrincipalView::abstract_text, PrincipalView::introduction})
      for (auto c : {CitedView::abstract_text, CitedView::introduction,
                     CitedView::sampled, CitedView::tfidf, CitedView::entities})
        views.emplace_back(p, c);
  } else {
    // Accept "intro x abs", "introxabs", "intro:abs", UTF-8 multiply sign.
    std::string cleaned;
    for (std::size_t i = 0; i < view.size(); ++i) {
      if (view[i] == ' ') continue;
      if (view.compare(i, 2, "\xc3\x97") == 0) {  // matches the sign U+00D7
        cleaned += 'x';
        ++i;
        continue;
      }
      cleaned += view[i];
    }
    std::size_t sep = cleaned.find_first_of("x:");
    if (sep == std::string::npos)
      throw UsageError("view must look like 'intro x abs' (got '" + view +
                       "')");
    views.emplace_back(principal_view_from_string(cleaned.substr(0, sep)),
                       cited_view_from_string(cleaned.substr(sep + 1)));
  }

  bool needs_model = false;
  for (const auto& [p, c] : views)
    needs_model |= (c == CitedView::tfidf || c == CitedView::entities);
  std::optional<TfidfModel> model;
  if (needs_model) {
    model = TfidfModel::fit(corpus, FieldSelector{}, tokenizer);
    model->save(out_dir + "/tfidf_model.json");
  }

  bool warned_entities = false;
  for (const auto& [p, c] : views) {
    ContextSpec spec = cfg.context;
    spec.principal_view = p;
    spec.cited_view = c;
    if (c == CitedView::entities && !warned_entities) {
      std::size_t missing = 0;
      for (const auto& inst : instances)
        if (!corpus.doc(inst.cited_id).entity_annotations) ++missing;
      if (missing) {
        std::cerr << "warning: " << missing
                  << " cited documents lack entity annotations; their "
                     "contexts degrade to the tf-idf list\n";
        warned_entities = true;
      }
    }
    auto contexts =
        build_contexts(corpus, instances, model ? &*model : nullptr, spec,
                       cfg.special_tokens, tokenizer, !no_target, g.exec());
    const std::string name = "contexts_" + to_string(p) + "x" + to_string(c);
    write_contexts(contexts, out_dir + "/" + name + ".jsonl");
    std::cerr << name << ": " << contexts.size() << " contexts\n";
  }
  return 0;
}

int cmd_retrieve(const GlobalArgs& g, PipelineConfig cfg,
                 const std::string& instances_path,
                 const std::string& plan_path, const std::string& split,
                 bool tune, const std::string& out_path,
                 const std::string& tune_out) {
  cfg.require_inputs({"corpus", "embeddings"});
  Corpus corpus = load_corpus(cfg.paths.corpus);
  Tokenizer tokenizer;
  auto all = read_instances(instances_path, &corpus);
  SplitPlan plan = read_split_plan(plan_path);
  EmbeddingStore store = EmbeddingStore::load(cfg.paths.embeddings);
  TrainCitationIndex index = TrainCitationIndex::build(
      corpus, plan, tokenizer, cfg.context.target_budget);
  auto exclude = held_out_ids(plan);

  RetrievalWeights weights = cfg.weights;
  if (tune) {
    auto validation = split_subset(all, "validation");
    if (validation.empty()) throw DataError("no validation instances to tune");
    auto grid = cfg.grid.empty() ? default_weight_grid() : cfg.grid;
    TuneResult tuned = mert_tune(validation, store, index, cfg.neighbors_k,
                                 grid, exclude, g.exec());
    weights = tuned.weights;
    nlohmann::ordered_json j;
    j["alpha"] = tuned.weights.alpha;
    j["beta"] = tuned.weights.beta;
    j["validation_bleu"] = tuned.bleu;
    j["grid"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < grid.size(); ++i)
      j["grid"].push_back({{"alpha", grid[i].alpha},
                           {"beta", grid[i].beta},
                           {"bleu", tuned.grid_bleu[i]}});
    write_json_file(j, tune_out);
    std::cerr << "mert: alpha=" << weights.alpha << " beta=" << weights.beta
              << " validation BLEU=" << tuned.bleu << "\n";
  }

  auto instances = split_subset(all, split);
  if (instances.empty()) throw DataError("no instances in split: " + split);
  auto results = retrieve_batch(instances, store, index, weights,
                                cfg.neighbors_k, exclude, g.exec());
  std::ofstream out(out_path);
  if (!out) throw DataError("cannot write " + out_path);
  for (std::size_t i = 0; i < results.size(); ++i) {
    nlohmann::ordered_json j;
    j["instance"] = i;
    std::string text;
    for (std::size_t t = 0; t < results[i].explanation.size(); ++t) {
      if (t) text += ' ';
      text += results[i].explanation[t];
    }
    j["text"] = text;
    j["ns"] = results[i].neighbor_principal;
    j["nc"] = results[i].neighbor_cited;
    j["score"] = results[i].score;
    out << j.dump() << "\n";
  }
  std::cerr << "retrieve: " << results.size() << " instances (alpha="
            << weights.alpha << ", beta=" << weights.beta << ")\n";
  return 0;
}

int cmd_rerank(const GlobalArgs& g, PipelineConfig cfg,
               const std::string& instances_path, const std::string& split,
               const std::string& out_path) {
  cfg.require_inputs({"corpus", "candidates"});
  Corpus corpus = load_corpus(cfg.paths.corpus);
  if (!cfg.paths.entities.empty())
    corpus.load_entity_annotations(cfg.paths.entities);
  Tokenizer tokenizer;
  auto instances = split_subset(read_instances(instances_path, &corpus), split);
  if (instances.empty()) throw DataError("no instances in split: " + split);
  auto sets = read_candidates(cfg.paths.candidates);
  if (sets.size() != instances.size())
    throw DataError("candidate count mismatch: " +
                    std::to_string(sets.size()) + " sets for " +
                    std::to_string(instances.size()) + " instances");
  for (std::size_t i = 0; i < sets.size(); ++i)
    if (sets[i].instance_ref != i)
      throw DataError("candidate sets must be sorted by instance index");

  TfidfModel model = TfidfModel::fit(corpus, FieldSelector{}, tokenizer);
  std::vector<RankedEntityList> cited_lists(instances.size());
  for_each_index(instances.size(), g.exec(), [&](std::size_t i) {
    cited_lists[i] =
        rank_entities(corpus.doc(instances[i].cited_id), model, tokenizer);
  });
  auto selections =
      select_best_batch(sets, cited_lists, cfg.match, tokenizer, g.exec());

  std::ofstream out(out_path);
  if (!out) throw DataError("cannot write " + out_path);
  for (std::size_t i = 0; i < selections.size(); ++i) {
    nlohmann::ordered_json j;
    j["instance"] = i;
    j["text"] = sets[i].candidates[selections[i].index];
    j["index"] = selections[i].index;
    j["mrr"] = selections[i].mrr;
    out << j.dump() << "\n";
  }
  std::cerr << "rerank: " << selections.size() << " instances\n";
  return 0;
}

int cmd_evaluate(const GlobalArgs& g, PipelineConfig cfg,
                 const std::string& instances_path, const std::string& split,
                 const std::vector<std::string>& system_args,
                 const std::vector<std::string>& overlap_args,
                 const std::string& completions_path, bool with_bounds,
                 const std::string& out_dir) {
  cfg.require_inputs({"corpus"});
  if (system_args.empty()) throw UsageError("at least one --system required");
  ensure_dir(out_dir);
  Corpus corpus = load_corpus(cfg.paths.corpus);
  Tokenizer tokenizer;
  auto instances = split_subset(read_instances(instances_path, &corpus), split);
  if (instances.empty()) throw DataError("no instances in split: " + split);

  ReportInputs inputs;
  inputs.seed = cfg.seed;
  inputs.max_n = cfg.bleu_max_n;
  inputs.bootstrap_iterations = cfg.bootstrap_iterations;
  inputs.bootstrap_sample = cfg.bootstrap_sample_size;

  for (const auto& arg : system_args) {
    std::size_t eq = arg.find('=');
    if (eq == std::string::npos)
      throw UsageError("--system expects name=path (got '" + arg + "')");
    SystemOutputs sys;
    sys.name = arg.substr(0, eq);
    auto texts = read_system_outputs(arg.substr(eq + 1), instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
      EvalPair pair;
      pair.hypothesis = tokenizer.tokenize(texts[i]);
      pair.reference = instances[i].target;
      pair.instance_ref = i;
      pair.acl_flag = instances[i].acl_flag;
      sys.pairs.push_back(std::move(pair));
    }
    inputs.systems.push_back(std::move(sys));
  }

  if (!cfg.paths.judgments.empty()) {
    cfg.require_inputs({"judgments"});
    inputs.judgments = read_judgments(cfg.paths.judgments);
  }

  for (const auto& arg : overlap_args) {
    std::size_t eq = arg.find('=');
    if (eq == std::string::npos)
      throw UsageError("--overlap expects label=contexts.jsonl");
    auto contexts = read_contexts(arg.substr(eq + 1));
    if (contexts.size() != instances.size())
      throw DataError("overlap contexts count mismatch for " + arg);
    std::vector<std::vector<std::string>> ctx_tokens(contexts.size());
    std::vector<std::vector<std::string>> golds(contexts.size());
    for (std::size_t i = 0; i < contexts.size(); ++i) {
      const auto& c = contexts[i].context;
      // Only the conditioning context X: principal ++ sep ++ cited.
      const std::size_t len = c.principal_len + 1 + c.cited_len;
      ctx_tokens[i].assign(c.tokens.begin(), c.tokens.begin() + len);
      golds[i] = instances[contexts[i].instance_ref].target;
    }
    inputs.overlap.emplace_back(
        arg.substr(0, eq), mean_token_overlap(ctx_tokens, golds, g.exec()));
  }

  if (with_bounds) {
    cfg.require_inputs({"candidates"});
    auto sets = read_candidates(cfg.paths.candidates);
    if (sets.size() != instances.size())
      throw DataError("candidate count mismatch for bounds");
    std::vector<std::vector<std::string>> refs(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i)
      refs[i] = instances[i].target;
    inputs.bounds = oracle_bounds(sets, refs, cfg.bounds_ks, g.exec());
  }

  if (!completions_path.empty()) {
    auto completions = read_completions(completions_path);
    std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>
        pairs;
    for (const auto& c : completions) {
      if (c.instance_ref >= instances.size())
        throw DataError("completion references unknown instance " +
                        std::to_string(c.instance_ref));
      pairs.emplace_back(instances[c.instance_ref].target,
                         tokenizer.tokenize(c.completion));
    }
    inputs.autocomplete = autocomplete_eval(pairs);
  }

  Report report = build_report(inputs, g.exec());
  write_json_file(report.to_json(), out_dir + "/report.json");
  {
    std::ofstream out(out_dir + "/report.txt");
    if (!out) throw DataError("cannot write report.txt");
    out << report.to_text();
  }
  std::cout << report.to_text();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corpus-to-report toolkit for citation relationship pipelines"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs global;
  app.add_option("--config", global.config_path,
                 "pipeline config JSON (default: $CITEX_CONFIG)");
  app.add_flag("--serial", global.serial,
               "run kernels on a single thread (reference path)");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic fixture");
  std::string synth_out = "synthetic";
  std::size_t synth_docs = 200, synth_topics = 8, synth_cands = 20;
  std::size_t synth_test = 15, synth_val = 15, synth_k = 32;
  int synth_dim = 64;
  std::uint64_t synth_seed = 7;
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--docs", synth_docs, "number of documents");
  synth->add_option("--topics", synth_topics, "number of topics");
  synth->add_option("--candidates", synth_cands, "candidates per instance");
  synth->add_option("--dim", synth_dim, "embedding dimension");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--test", synth_test, "held-out test principals");
  synth->add_option("--val", synth_val, "held-out validation principals");
  synth->add_option("--k", synth_k, "neighbor count written to config");

  // build-dataset
  auto* bd = app.add_subcommand("build-dataset",
                                "extract instances and splits from a corpus");
  std::string bd_corpus, bd_out = "dataset";
  std::size_t bd_test = 0, bd_val = 0;
  std::uint64_t bd_seed = 0;
  bd->add_option("--corpus", bd_corpus, "corpus-jsonl path");
  bd->add_option("--out", bd_out, "output directory");
  auto* bd_test_opt = bd->add_option("--test", bd_test, "test principals");
  auto* bd_val_opt = bd->add_option("--val", bd_val, "validation principals");
  auto* bd_seed_opt = bd->add_option("--seed", bd_seed, "split seed");

  // build-context
  auto* bc = app.add_subcommand("build-context",
                                "assemble conditioning contexts");
  std::string bc_corpus, bc_instances, bc_view = "abs x abs";
  std::string bc_split = "test", bc_out = "contexts", bc_entities;
  bool bc_no_target = false;
  bc->add_option("--corpus", bc_corpus, "corpus-jsonl path");
  bc->add_option("--instances", bc_instances, "instances-jsonl path")
      ->required();
  bc->add_option("--view", bc_view,
                 "principal x cited view, e.g. 'intro x tfidf' or 'all'");
  bc->add_option("--split", bc_split, "train|validation|test|all");
  bc->add_option("--out", bc_out, "output directory");
  bc->add_option("--entities", bc_entities, "entity annotations sidecar");
  bc->add_flag("--no-target", bc_no_target,
               "inference-time layout without the target segment");

  // retrieve
  auto* rt = app.add_subcommand("retrieve", "nearest-neighbor IR baseline");
  std::string rt_corpus, rt_embeddings, rt_instances, rt_plan;
  std::string rt_split = "test", rt_out = "retrieval.jsonl";
  std::string rt_tune_out = "tune.json";
  double rt_alpha = 0, rt_beta = 0;
  std::size_t rt_k = 0;
  bool rt_tune = false;
  rt->add_option("--corpus", rt_corpus, "corpus-jsonl path");
  rt->add_option("--embeddings", rt_embeddings, "embeddings file");
  rt->add_option("--instances", rt_instances, "instances-jsonl path")
      ->required();
  rt->add_option("--plan", rt_plan, "split plan JSON")->required();
  rt->add_option("--split", rt_split, "which split to answer");
  auto* rt_alpha_opt = rt->add_option("--alpha", rt_alpha, "principal weight");
  auto* rt_beta_opt = rt->add_option("--beta", rt_beta, "cited weight");
  auto* rt_k_opt = rt->add_option("--k", rt_k, "neighbors per query");
  rt->add_flag("--tune", rt_tune, "grid-search weights on validation BLEU");
  rt->add_option("--out", rt_out, "retrieval output jsonl");
  rt->add_option("--tune-out", rt_tune_out, "tuning summary JSON");

  // rerank
  auto* rr = app.add_subcommand("rerank", "entity-MRR candidate selection");
  std::string rr_corpus, rr_candidates, rr_instances, rr_split = "test";
  std::string rr_out = "rerank.jsonl", rr_extractor, rr_entities;
  double rr_threshold = 0;
  rr->add_option("--corpus", rr_corpus, "corpus-jsonl path");
  rr->add_option("--candidates", rr_candidates, "candidates-jsonl path");
  rr->add_option("--instances", rr_instances, "instances-jsonl path")
      ->required();
  rr->add_option("--split", rr_split, "which split the candidates cover");
  auto* rr_thr_opt =
      rr->add_option("--threshold", rr_threshold, "fuzzy match threshold");
  rr->add_option("--extractor", rr_extractor, "ngram_scan|ingested");
  rr->add_option("--entities", rr_entities, "entity annotations sidecar");
  rr->add_option("--out", rr_out, "selection output jsonl");

  // evaluate / analyze
  auto* ev = app.add_subcommand("evaluate",
                                "metrics, significance, and analyses");
  ev->alias("analyze");
  std::string ev_corpus, ev_instances, ev_split = "test", ev_out = "report";
  std::string ev_judgments, ev_completions, ev_candidates;
  std::vector<std::string> ev_systems, ev_overlap;
  bool ev_bounds = false;
  std::uint64_t ev_seed = 0;
  ev->add_option("--corpus", ev_corpus, "corpus-jsonl path");
  ev->add_option("--instances", ev_instances, "instances-jsonl path")
      ->required();
  ev->add_option("--split", ev_split, "which split was evaluated");
  ev->add_option("--system", ev_systems, "name=outputs.jsonl (repeatable)");
  ev->add_option("--judgments", ev_judgments, "judgments CSV");
  ev->add_option("--candidates", ev_candidates,
                 "candidates-jsonl for oracle bounds");
  ev->add_flag("--bounds", ev_bounds, "compute oracle ranking bounds");
  ev->add_option("--completions", ev_completions, "completions-jsonl");
  ev->add_option("--overlap", ev_overlap,
                 "label=contexts.jsonl for token-overlap analysis");
  ev->add_option("--out", ev_out, "report output directory");
  auto* ev_seed_opt = ev->add_option("--seed", ev_seed, "bootstrap seed");

  try {
    app.parse(argc, argv);

    PipelineConfig cfg = global.load_config();

    if (synth->parsed())
      return cmd_synth(global, synth_out, synth_docs, synth_topics,
                       synth_cands, synth_dim, synth_seed, synth_test,
                       synth_val, synth_k);

    if (bd->parsed()) {
      if (!bd_corpus.empty()) cfg.paths.corpus = bd_corpus;
      if (bd_test_opt->count()) cfg.test_principals = bd_test;
      if (bd_val_opt->count()) cfg.validation_principals = bd_val;
      if (bd_seed_opt->count()) cfg.seed = bd_seed;
      return cmd_build_dataset(global, cfg, bd_out);
    }
    if (bc->parsed()) {
      if (!bc_corpus.empty()) cfg.paths.corpus = bc_corpus;
      if (!bc_entities.empty()) cfg.paths.entities = bc_entities;
      return cmd_build_context(global, cfg, bc_instances, bc_view, bc_split,
                               bc_out, bc_no_target);
    }
    if (rt->parsed()) {
      if (!rt_corpus.empty()) cfg.paths.corpus = rt_corpus;
      if (!rt_embeddings.empty()) cfg.paths.embeddings = rt_embeddings;
      if (rt_alpha_opt->count()) cfg.weights.alpha = rt_alpha;
      if (rt_beta_opt->count()) cfg.weights.beta = rt_beta;
      if (rt_k_opt->count()) cfg.neighbors_k = rt_k;
      return cmd_retrieve(global, cfg, rt_instances, rt_plan, rt_split,
                          rt_tune, rt_out, rt_tune_out);
    }
    if (rr->parsed()) {
      if (!rr_corpus.empty()) cfg.paths.corpus = rr_corpus;
      if (!rr_candidates.empty()) cfg.paths.candidates = rr_candidates;
      if (!rr_entities.empty()) cfg.paths.entities = rr_entities;
      if (rr_thr_opt->count()) cfg.match.threshold = rr_threshold;
      if (!rr_extractor.empty()) {
        if (rr_extractor == "ingested")
          cfg.match.extractor = MatchConfig::Extractor::ingested;
        else if (rr_extractor == "ngram_scan")
          cfg.match.extractor = MatchConfig::Extractor::ngram_scan;
        else
          throw UsageError("unknown extractor: " + rr_extractor);
      }
      cfg.match.validate();
      return cmd_rerank(global, cfg, rr_instances, rr_split, rr_out);
    }
    if (ev->parsed()) {
      if (!ev_corpus.empty()) cfg.paths.corpus = ev_corpus;
      if (!ev_judgments.empty()) cfg.paths.judgments = ev_judgments;
      if (!ev_candidates.empty()) cfg.paths.candidates = ev_candidates;
      if (ev_seed_opt->count()) cfg.seed = ev_seed;
      return cmd_evaluate(global, cfg, ev_instances, ev_split, ev_systems,
                          ev_overlap, ev_completions, ev_bounds, ev_out);
    }
    throw UsageError("no subcommand selected");
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
