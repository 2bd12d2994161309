#include <doctest.h>

#include <cmath>

#include "citex/errors.hpp"
#include "citex/metrics.hpp"
#include "citex/retrieval.hpp"
#include "citex/rng.hpp"
#include "citex/synth.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace citex;
using testutil::make_doc;

namespace {

const Tokenizer tok;

// Small retrieval world: documents q* are held out (queries), the rest are
// train docs; every train doc t<i> cites base docs b<j> with one sentence.
struct Fixture {
  Corpus corpus;
  EmbeddingStore store;
  SplitPlan plan;
  std::unordered_set<std::string> exclude;
  std::vector<std::tuple<std::string, std::string, std::vector<std::string>>>
      train_pairs;  // (cited, citing, target)
  TrainCitationIndex index;

  Fixture(std::size_t n_base, std::size_t n_citers, int dim,
          std::uint64_t seed) {
    index = build_world(n_base, n_citers, dim, seed);
  }

 private:
  TrainCitationIndex build_world(std::size_t n_base, std::size_t n_citers,
                                 int dim, std::uint64_t seed) {
    Rng rng(seed);
    auto add_vec = [&](const std::string& id) {
      std::vector<double> v(dim);
      for (auto& x : v) x = rng.uniform() * 2 - 1;
      store.add(id, std::move(v));
    };
    for (std::size_t b = 0; b < n_base; ++b) {
      std::string id = "b" + std::to_string(b);
      corpus.add_document(make_doc(id, "base " + id));
      add_vec(id);
    }
    for (std::size_t c = 0; c < n_citers; ++c) {
      std::string id = "t" + std::to_string(c);
      corpus.add_document(make_doc(id, "citer " + id));
      add_vec(id);
      std::size_t n_cites = 1 + rng.bounded(3);
      for (std::size_t e = 0; e < n_cites; ++e) {
        std::string cited = "b" + std::to_string(rng.bounded(n_base));
        corpus.add_citation({id, cited,
                             id + " uses [CITE:" + cited + "] for task " +
                                 std::to_string(e) + " .",
                             static_cast<int>(e), 0});
      }
    }
    corpus.add_document(make_doc("qS", "query principal"));
    corpus.add_document(make_doc("qC", "query cited"));
    corpus.add_citation({"qS", "qC", "query [CITE:qC] .", 0, 0});
    add_vec("qS");
    add_vec("qC");
    corpus.finalize();

    plan.test_principals = {"qS"};
    exclude = {"qS"};
    auto idx = TrainCitationIndex::build(corpus, plan, tok);
    for (const auto& edge : corpus.edges()) {
      if (classify_edge(corpus, plan, edge) != EdgeFate::train) continue;
      const auto* citers = idx.citers(edge.cited_id);
      REQUIRE(citers != nullptr);
    }
    // Mirror the index contents for the exhaustive oracle.
    for (const auto& doc : corpus.documents()) {
      const auto* citers = idx.citers(doc.doc_id);
      if (!citers) continue;
      for (const auto& citer : *citers)
        train_pairs.emplace_back(doc.doc_id, citer.principal_id, citer.target);
    }
    return idx;
  }
};

}  // namespace

TEST_SUITE("retrieval") {

TEST_CASE("weights validate") {
  CHECK_THROWS_AS((RetrievalWeights{-1, 1}).validate(), UsageError);
  CHECK_THROWS_AS((RetrievalWeights{0, 0}).validate(), UsageError);
  CHECK_NOTHROW((RetrievalWeights{0, 1}).validate());
}

TEST_CASE("a train pair with identical embeddings wins with score 2") {
  Corpus corpus;
  corpus.add_document(make_doc("S", "query side"));
  corpus.add_document(make_doc("C", "cited side"));
  corpus.add_document(make_doc("NS", "train citer"));
  corpus.add_document(make_doc("NC", "train cited"));
  corpus.add_document(make_doc("far", "unrelated"));
  corpus.add_citation({"NS", "NC", "NS builds on [CITE:NC] .", 0, 0});
  corpus.add_citation({"S", "C", "S builds on [CITE:C] .", 0, 0});
  corpus.add_citation({"far", "NC", "far uses [CITE:NC] .", 0, 0});
  corpus.finalize();

  EmbeddingStore store;
  store.add("S", {1, 0, 0});
  store.add("NS", {1, 0, 0});
  store.add("C", {0, 1, 0});
  store.add("NC", {0, 1, 0});
  store.add("far", {0, 0, 1});

  SplitPlan plan;
  plan.test_principals = {"S"};
  auto index = TrainCitationIndex::build(corpus, plan, tok);
  auto result = retrieve("S", "C", store, index, {1, 1}, 10, {"S"});
  CHECK(result.neighbor_principal == "NS");
  CHECK(result.neighbor_cited == "NC");
  CHECK(result.score == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(result.explanation ==
        tok.tokenize(mask_citations("NS builds on [CITE:NC] .")));
}

TEST_CASE("alpha=0 ignores the principal document") {
  Fixture fx(6, 10, 8, 21);
  auto a = retrieve("qS", "qC", fx.store, fx.index, {0, 1}, fx.store.size(),
                    fx.exclude);
  // Any other principal embedding must give the same pair when alpha=0.
  auto b = retrieve("t0", "qC", fx.store, fx.index, {0, 1}, fx.store.size(),
                    fx.exclude);
  CHECK(a.neighbor_principal == b.neighbor_principal);
  CHECK(a.neighbor_cited == b.neighbor_cited);
  CHECK(a.score == b.score);
}

TEST_CASE("retrieve equals exhaustive pair maximization at full K") {
  Fixture fx(8, 22, 12, 22);
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    double alpha = rng.uniform() * 3;
    double beta = 0.1 + rng.uniform() * 3;
    auto got = retrieve("qS", "qC", fx.store, fx.index, {alpha, beta},
                        fx.store.size(), fx.exclude);
    auto expected = oracle::exhaustive_retrieve("qS", "qC", fx.store,
                                                fx.train_pairs, alpha, beta);
    REQUIRE(expected.found);
    CHECK(got.neighbor_principal == expected.neighbor_principal);
    CHECK(got.neighbor_cited == expected.neighbor_cited);
    CHECK(got.score == doctest::Approx(expected.score).epsilon(1e-12));
  }
}

TEST_CASE("argmax is invariant under positive weight scaling") {
  Fixture fx(8, 18, 10, 23);
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    double alpha = rng.uniform() * 2;
    double beta = 0.05 + rng.uniform() * 2;
    auto base = retrieve("qS", "qC", fx.store, fx.index, {alpha, beta},
                         fx.store.size(), fx.exclude);
    for (int ci = 0; ci < 10; ++ci) {
      double c = std::ldexp(1.0, static_cast<int>(rng.bounded(9)) - 4);
      auto scaled = retrieve("qS", "qC", fx.store, fx.index,
                             {c * alpha, c * beta}, fx.store.size(),
                             fx.exclude);
      CHECK(scaled.neighbor_principal == base.neighbor_principal);
      CHECK(scaled.neighbor_cited == base.neighbor_cited);
      CHECK(scaled.explanation == base.explanation);
    }
  }
}

TEST_CASE("multiple sentences from one pair resolve by location") {
  Corpus corpus;
  corpus.add_document(make_doc("S", "s"));
  corpus.add_document(make_doc("C", "c"));
  corpus.add_document(make_doc("NS", "ns"));
  corpus.add_citation({"S", "C", "q [CITE:C] .", 0, 0});
  corpus.add_citation({"NS", "C", "later sentence [CITE:C] .", 2, 4});
  corpus.add_citation({"NS", "C", "early sentence [CITE:C] .", 0, 1});
  corpus.finalize();
  EmbeddingStore store;
  store.add("S", {1, 0});
  store.add("C", {0, 1});
  store.add("NS", {1, 0});
  SplitPlan plan;
  plan.test_principals = {"S"};
  auto index = TrainCitationIndex::build(corpus, plan, tok);
  auto result = retrieve("S", "C", store, index, {1, 1}, 10, {"S"});
  CHECK(result.explanation[0] == "early");
}

TEST_CASE("exact ties break by neighbor ids ascending") {
  Corpus corpus;
  corpus.add_document(make_doc("S", "s"));
  corpus.add_document(make_doc("C", "c"));
  corpus.add_document(make_doc("nb", "nb"));
  corpus.add_document(make_doc("na", "na"));
  corpus.add_document(make_doc("z1", "z1"));
  corpus.add_document(make_doc("z2", "z2"));
  corpus.add_citation({"S", "C", "q [CITE:C] .", 0, 0});
  corpus.add_citation({"z2", "nb", "from z2 [CITE:nb] .", 0, 0});
  corpus.add_citation({"z1", "na", "from z1 [CITE:na] .", 0, 0});
  corpus.add_citation({"z2", "na", "z2 on na [CITE:na] .", 0, 0});
  corpus.finalize();
  EmbeddingStore store;
  store.add("S", {1, 0});
  store.add("C", {0, 1});
  // Both neighbor cited docs sit at the same cosine from C, and both
  // citers at the same cosine from S: every pair scores identically.
  store.add("na", {0, 1});
  store.add("nb", {0, 1});
  store.add("z1", {1, 0});
  store.add("z2", {1, 0});
  SplitPlan plan;
  plan.test_principals = {"S"};
  auto index = TrainCitationIndex::build(corpus, plan, tok);
  auto result = retrieve("S", "C", store, index, {1, 1}, 10, {"S"});
  CHECK(result.neighbor_cited == "na");
  CHECK(result.neighbor_principal == "z1");
}

TEST_CASE("no candidate pairs raises a data error") {
  Corpus corpus;
  corpus.add_document(make_doc("S", "s"));
  corpus.add_document(make_doc("C", "c"));
  corpus.add_document(make_doc("lone", "no citers"));
  corpus.add_document(make_doc("far_ns", "cites far"));
  corpus.add_document(make_doc("far_nc", "cited far"));
  corpus.add_citation({"S", "C", "q [CITE:C] .", 0, 0});
  corpus.add_citation({"far_ns", "far_nc", "pair [CITE:far_nc] .", 0, 0});
  corpus.finalize();
  EmbeddingStore store;
  store.add("S", {1, 0, 0});
  store.add("C", {0, 1, 0});
  store.add("lone", {0, 1, 0});   // nearest to C, but nobody cites it
  store.add("far_ns", {0, 0, 1});
  store.add("far_nc", {0, 0, 1});
  SplitPlan plan;
  plan.test_principals = {"S"};
  auto index = TrainCitationIndex::build(corpus, plan, tok);
  CHECK_FALSE(index.empty());
  // With K=1 the single neighbor is 'lone', which has no citing documents.
  CHECK_THROWS_WITH_AS(retrieve("S", "C", store, index, {1, 1}, 1, {"S"}),
                       doctest::Contains("no candidate pairs"), DataError);
  // An empty index fails up front.
  TrainCitationIndex empty;
  CHECK_THROWS_AS(retrieve("S", "C", store, empty, {1, 1}, 1, {"S"}),
                  DataError);
}

TEST_CASE("retrieve_batch matches per-instance retrieve and both exec modes") {
  SynthSpec spec;
  spec.n_docs = 120;
  Corpus corpus = make_synthetic_corpus(spec);
  auto store = make_synthetic_embeddings(corpus, spec, tok);
  auto plan = make_split_plan(corpus, 8, 8, 11);
  auto instances = build_splits(corpus, plan, tok);
  std::vector<ExplanationInstance> test;
  for (const auto& inst : instances)
    if (inst.split == Split::test) test.push_back(inst);
  REQUIRE(!test.empty());
  auto index = TrainCitationIndex::build(corpus, plan, tok);
  std::unordered_set<std::string> exclude(plan.test_principals.begin(),
                                          plan.test_principals.end());
  exclude.insert(plan.validation_principals.begin(),
                 plan.validation_principals.end());

  auto parallel = retrieve_batch(test, store, index, {1, 1}, 16, exclude,
                                 Exec::parallel);
  auto serial =
      retrieve_batch(test, store, index, {1, 1}, 16, exclude, Exec::serial);
  REQUIRE(parallel.size() == serial.size());
  for (std::size_t i = 0; i < parallel.size(); ++i) {
    CHECK(parallel[i].neighbor_principal == serial[i].neighbor_principal);
    CHECK(parallel[i].neighbor_cited == serial[i].neighbor_cited);
    CHECK(parallel[i].score == serial[i].score);
    auto single = retrieve(test[i].principal_id, test[i].cited_id, store,
                           index, {1, 1}, 16, exclude);
    CHECK(single.neighbor_principal == parallel[i].neighbor_principal);
    CHECK(single.neighbor_cited == parallel[i].neighbor_cited);
  }
}

TEST_CASE("mert_tune") {
  SynthSpec spec;
  spec.n_docs = 140;
  Corpus corpus = make_synthetic_corpus(spec);
  auto store = make_synthetic_embeddings(corpus, spec, tok);
  auto plan = make_split_plan(corpus, 10, 10, 13);
  auto instances = build_splits(corpus, plan, tok);
  std::vector<ExplanationInstance> validation;
  for (const auto& inst : instances)
    if (inst.split == Split::validation) validation.push_back(inst);
  REQUIRE(!validation.empty());
  auto index = TrainCitationIndex::build(corpus, plan, tok);
  std::unordered_set<std::string> exclude(plan.test_principals.begin(),
                                          plan.test_principals.end());
  exclude.insert(plan.validation_principals.begin(),
                 plan.validation_principals.end());
  const std::size_t k = 24;

  // Singleton grid echoes its only point.
  auto echo = mert_tune(validation, store, index, k, {{2.5, 1.0}}, exclude);
  CHECK(echo.weights.alpha == 2.5);
  CHECK(echo.weights.beta == 1.0);

  auto grid = default_weight_grid();
  auto tuned = mert_tune(validation, store, index, k, grid, exclude);

  // Tuned BLEU is the max over the grid and >= the (1,1) point; re-evaluate
  // every point through the plain retrieval path to confirm.
  double best = -1, at_unit = -1;
  for (const auto& w : grid) {
    auto results = retrieve_batch(validation, store, index, w, k, exclude);
    std::vector<EvalPair> pairs;
    for (std::size_t i = 0; i < validation.size(); ++i)
      pairs.push_back({results[i].explanation, validation[i].target, i, false});
    double bleu = corpus_bleu(pairs);
    best = std::max(best, bleu);
    if (w.alpha == 1.0 && w.beta == 1.0) at_unit = bleu;
  }
  CHECK(tuned.bleu == doctest::Approx(best).epsilon(1e-12));
  CHECK(tuned.bleu >= at_unit);

  auto serial = mert_tune(validation, store, index, k, grid, exclude,
                          Exec::serial);
  CHECK(serial.weights.alpha == tuned.weights.alpha);
  CHECK(serial.bleu == tuned.bleu);

  CHECK_THROWS_AS(mert_tune({}, store, index, k, grid, exclude), DataError);
  CHECK_THROWS_AS(mert_tune(validation, store, index, k, {}, exclude),
                  DataError);
}

TEST_CASE("degenerate grid keeps the first point on ties") {
  // One train pair only: every weight setting retrieves it, so all grid
  // points tie and the first entry must be returned.
  Corpus corpus;
  corpus.add_document(make_doc("S", "s"));
  corpus.add_document(make_doc("C", "c"));
  corpus.add_document(make_doc("NS", "ns"));
  corpus.add_document(make_doc("NC", "nc"));
  corpus.add_citation({"S", "C", "q [CITE:C] .", 0, 0});
  corpus.add_citation({"NS", "NC", "only pair [CITE:NC] .", 0, 0});
  corpus.finalize();
  EmbeddingStore store;
  store.add("S", {1, 0});
  store.add("C", {0, 1});
  store.add("NS", {0.6, 0.8});
  store.add("NC", {0.8, 0.6});
  SplitPlan plan;
  plan.validation_principals = {"S"};
  auto index = TrainCitationIndex::build(corpus, plan, tok);
  auto instances = build_splits(corpus, plan, tok);
  std::vector<ExplanationInstance> validation;
  for (const auto& inst : instances)
    if (inst.split == Split::validation) validation.push_back(inst);
  std::vector<RetrievalWeights> grid{{4, 1}, {2, 1}, {1, 1}};
  auto tuned = mert_tune(validation, store, index, 10, grid, {"S"});
  CHECK(tuned.weights.alpha == 4.0);
}

}
