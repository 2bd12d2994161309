// Compares the OpenMP kernels against their serial reference twins on a
// synthetic workload and reports timings plus an exact-equality check.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "citex/analysis.hpp"
#include "citex/corpus.hpp"
#include "citex/embed.hpp"
#include "citex/exec.hpp"
#include "citex/metrics.hpp"
#include "citex/rerank.hpp"
#include "citex/retrieval.hpp"
#include "citex/rng.hpp"
#include "citex/synth.hpp"

using namespace citex;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

struct Row {
  std::string name;
  double serial_ms = 0;
  double parallel_ms = 0;
  bool equal = false;
};

void print_rows(const std::vector<Row>& rows) {
  std::printf("%-28s %12s %12s %9s %7s\n", "kernel", "serial (ms)",
              "omp (ms)", "speedup", "equal");
  for (const auto& r : rows) {
    std::printf("%-28s %12.1f %12.1f %8.2fx %7s\n", r.name.c_str(),
                r.serial_ms, r.parallel_ms, r.serial_ms / r.parallel_ms,
                r.equal ? "yes" : "NO");
  }
}

template <typename Fn>
Row bench(const std::string& name, Fn&& fn) {
  Row row;
  row.name = name;
  fn(Exec::serial);  // warm-up
  auto t0 = Clock::now();
  auto serial = fn(Exec::serial);
  row.serial_ms = ms_since(t0);
  t0 = Clock::now();
  auto parallel = fn(Exec::parallel);
  row.parallel_ms = ms_since(t0);
  row.equal = serial == parallel;
  return row;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP kernel benchmark"};
  std::size_t docs = 3000;
  std::size_t queries = 300;
  int dim = 96;
  app.add_option("--docs", docs, "synthetic corpus size");
  app.add_option("--queries", queries, "retrieval queries to answer");
  app.add_option("--dim", dim, "embedding dimension");
  CLI11_PARSE(app, argc, argv);

  SynthSpec spec;
  spec.n_docs = docs;
  spec.embedding_dim = dim;
  std::printf("threads: %d, docs: %zu, dim: %d\n", max_threads(), docs, dim);

  Tokenizer tokenizer;
  Corpus corpus = make_synthetic_corpus(spec);
  EmbeddingStore store = make_synthetic_embeddings(corpus, spec, tokenizer);
  SplitPlan plan = make_split_plan(corpus, 25, 25, spec.seed);
  auto instances = build_splits(corpus, plan, tokenizer);
  std::vector<ExplanationInstance> test;
  for (const auto& inst : instances)
    if (inst.split == Split::test) test.push_back(inst);
  if (test.size() > queries) test.resize(queries);
  TrainCitationIndex index = TrainCitationIndex::build(corpus, plan, tokenizer);
  std::unordered_set<std::string> exclude(plan.test_principals.begin(),
                                          plan.test_principals.end());
  exclude.insert(plan.validation_principals.begin(),
                 plan.validation_principals.end());

  std::vector<Row> rows;

  rows.push_back(bench("nearest_neighbors", [&](Exec exec) {
    std::vector<std::string> out;
    for (std::size_t q = 0; q < std::min<std::size_t>(64, test.size()); ++q) {
      auto hits =
          exec == Exec::serial
              ? nearest_neighbors_serial(store, test[q].cited_id, 32, exclude)
              : nearest_neighbors(store, test[q].cited_id, 32, exclude, exec);
      for (const auto& h : hits.hits) out.push_back(h.doc_id);
    }
    return out;
  }));

  rows.push_back(bench("retrieve_batch", [&](Exec exec) {
    auto results =
        retrieve_batch(test, store, index, {1.0, 1.0}, 64, exclude, exec);
    std::vector<std::string> out;
    for (const auto& r : results) {
      out.push_back(r.neighbor_principal);
      out.push_back(r.neighbor_cited);
    }
    return out;
  }));

  {
    // Per-instance values for the bootstrap comparison.
    std::size_t n = 200000;
    std::vector<double> a(n), b(n);
    Rng rng(11);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform();
      b[i] = rng.uniform();
    }
    rows.push_back(bench("bootstrap_compare", [&](Exec exec) {
      auto r = bootstrap_compare(a, b, 2000, 1000, 5, exec);
      return std::vector<double>{r.mean_diff, r.p_value};
    }));
  }

  {
    auto sets = make_synthetic_candidates(corpus, test, spec);
    std::vector<std::vector<std::string>> refs;
    for (const auto& inst : test) refs.push_back(inst.target);
    rows.push_back(bench("oracle_bounds", [&](Exec exec) {
      auto curve = oracle_bounds(sets, refs, {1, 2, 5, 10, 20}, exec);
      std::vector<double> out = curve.upper;
      out.insert(out.end(), curve.lower.begin(), curve.lower.end());
      return out;
    }));

    TfidfModel model = TfidfModel::fit(corpus, FieldSelector{}, tokenizer);
    std::vector<RankedEntityList> lists;
    for (const auto& inst : test)
      lists.push_back(rank_entities(corpus.doc(inst.cited_id), model,
                                    tokenizer));
    rows.push_back(bench("select_best_batch", [&](Exec exec) {
      auto picks = select_best_batch(sets, lists, MatchConfig{}, tokenizer,
                                     exec);
      std::vector<double> out;
      for (const auto& p : picks) {
        out.push_back(static_cast<double>(p.index));
        out.push_back(p.mrr);
      }
      return out;
    }));
  }

  {
    std::vector<EvalPair> pairs;
    Rng rng(3);
    for (std::size_t i = 0; i < 20000; ++i) {
      EvalPair p;
      for (int t = 0; t < 24; ++t)
        p.reference.push_back("w" + std::to_string(rng.bounded(60)));
      for (int t = 0; t < 24; ++t)
        p.hypothesis.push_back("w" + std::to_string(rng.bounded(60)));
      pairs.push_back(std::move(p));
    }
    rows.push_back(bench("corpus_bleu", [&](Exec exec) {
      return std::vector<double>{corpus_bleu(pairs, 4, exec)};
    }));
    rows.push_back(bench("rouge_l", [&](Exec exec) {
      auto r = rouge_l(pairs, exec);
      return std::vector<double>{r.precision, r.recall, r.f1};
    }));
  }

  print_rows(rows);
  for (const auto& r : rows)
    if (!r.equal) return 1;
  return 0;
}
