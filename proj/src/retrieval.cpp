#include "citex/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "citex/errors.hpp"
#include "citex/metrics.hpp"

namespace citex {

void RetrievalWeights::validate() const {
  if (alpha < 0 || beta < 0)
    throw UsageError("retrieval weights must be non-negative");
  if (alpha + beta <= 0)
    throw UsageError("at least one retrieval weight must be positive");
}

TrainCitationIndex TrainCitationIndex::build(const Corpus& corpus,
                                             const SplitPlan& plan,
                                             const Tokenizer& tokenizer,
                                             std::size_t target_budget) {
  // (cited, principal) -> best edge so far by document location.
  std::map<std::pair<std::string, std::string>, const CitationEdge*> best;
  for (const auto& edge : corpus.edges()) {
    if (classify_edge(corpus, plan, edge) != EdgeFate::train) continue;
    auto key = std::make_pair(edge.cited_id, edge.citing_id);
    auto it = best.find(key);
    if (it == best.end() ||
        std::make_pair(edge.paragraph_index, edge.sentence_index) <
            std::make_pair(it->second->paragraph_index,
                           it->second->sentence_index)) {
      best[key] = &edge;
    }
  }
  TrainCitationIndex index;
  for (const auto& [key, edge] : best) {
    auto target = tokenizer.tokenize(edge->sentence);
    if (target.size() > target_budget) target.resize(target_budget);
    index.by_cited_[key.first].push_back({key.second, std::move(target)});
    ++index.pairs_;
  }
  // std::map iteration already yields citers sorted by principal_id.
  return index;
}

const std::vector<TrainCitationIndex::Citer>* TrainCitationIndex::citers(
    const std::string& cited_id) const {
  auto it = by_cited_.find(cited_id);
  return it == by_cited_.end() ? nullptr : &it->second;
}

namespace {

RetrievalResult best_pair(const std::string& principal_id,
                          const EmbeddingStore& store,
                          const TrainCitationIndex& index,
                          const RetrievalWeights& weights,
                          const NeighborList& neighbors) {
  std::span<const double> s_vec = store.vec(principal_id);
  RetrievalResult best;
  bool found = false;
  for (const auto& nc : neighbors.hits) {
    const auto* citers = index.citers(nc.doc_id);
    if (!citers) continue;
    for (const auto& citer : *citers) {
      const double score =
          weights.alpha * cosine(s_vec, store.vec(citer.principal_id)) +
          weights.beta * nc.score;
      const bool better =
          !found || score > best.score ||
          (score == best.score &&
           std::make_pair(nc.doc_id, citer.principal_id) <
               std::make_pair(best.neighbor_cited, best.neighbor_principal));
      if (better) {
        best = {citer.target, citer.principal_id, nc.doc_id, score};
        found = true;
      }
    }
  }
  if (!found) throw DataError("no candidate pairs for " + principal_id);
  return best;
}

}  // namespace

RetrievalResult retrieve(const std::string& principal_id,
                         const std::string& cited_id,
                         const EmbeddingStore& store,
                         const TrainCitationIndex& index,
                         const RetrievalWeights& weights, std::size_t k,
                         const std::unordered_set<std::string>& exclude,
                         Exec exec) {
  weights.validate();
  if (index.empty()) throw DataError("empty train citation index");
  NeighborList neighbors =
      nearest_neighbors_including_query(store, cited_id, k, exclude, exec);
  return best_pair(principal_id, store, index, weights, neighbors);
}

std::vector<RetrievalResult> retrieve_batch(
    const std::vector<ExplanationInstance>& instances,
    const EmbeddingStore& store, const TrainCitationIndex& index,
    const RetrievalWeights& weights, std::size_t k,
    const std::unordered_set<std::string>& exclude, Exec exec) {
  weights.validate();
  if (index.empty()) throw DataError("empty train citation index");
  std::vector<RetrievalResult> out(instances.size());
  // Parallel over instances; each query runs its scan serially.
  for_each_index(instances.size(), exec, [&](std::size_t i) {
    NeighborList neighbors = nearest_neighbors_including_query(
        store, instances[i].cited_id, k, exclude, Exec::serial);
    out[i] = best_pair(instances[i].principal_id, store, index, weights,
                       neighbors);
  });
  return out;
}

std::vector<RetrievalWeights> default_weight_grid() {
  std::vector<RetrievalWeights> grid;
  grid.push_back({0.0, 1.0});
  for (int p = -4; p <= 4; ++p) grid.push_back({std::ldexp(1.0, p), 1.0});
  return grid;
}

namespace {

// Everything about an instance's candidate pairs that does not depend on
// the weights, so tuning rescans pairs instead of redoing neighbor search.
struct CachedPairs {
  struct Pair {
    double cos_s, cos_c;
    const TrainCitationIndex::Citer* citer;
    const std::string* neighbor_cited;
  };
  std::vector<Pair> pairs;
  NeighborList neighbors;
};

RetrievalResult pick(const CachedPairs& cached,
                     const RetrievalWeights& weights) {
  const CachedPairs::Pair* best = nullptr;
  double best_score = 0;
  for (const auto& p : cached.pairs) {
    const double score = weights.alpha * p.cos_s + weights.beta * p.cos_c;
    const bool better =
        !best || score > best_score ||
        (score == best_score &&
         std::make_pair(*p.neighbor_cited, p.citer->principal_id) <
             std::make_pair(*best->neighbor_cited,
                            best->citer->principal_id));
    if (better) {
      best = &p;
      best_score = score;
    }
  }
  if (!best) throw DataError("no candidate pairs");
  return {best->citer->target, best->citer->principal_id,
          *best->neighbor_cited, best_score};
}

}  // namespace

TuneResult mert_tune(const std::vector<ExplanationInstance>& validation,
                     const EmbeddingStore& store,
                     const TrainCitationIndex& index, std::size_t k,
                     const std::vector<RetrievalWeights>& grid,
                     const std::unordered_set<std::string>& exclude,
                     Exec exec) {
  if (validation.empty()) throw DataError("mert_tune: empty validation set");
  if (grid.empty()) throw DataError("mert_tune: empty weight grid");
  for (const auto& w : grid) w.validate();

  std::vector<CachedPairs> cached(validation.size());
  for_each_index(validation.size(), exec, [&](std::size_t i) {
    auto& c = cached[i];
    c.neighbors = nearest_neighbors_including_query(
        store, validation[i].cited_id, k, exclude, Exec::serial);
    std::span<const double> s_vec = store.vec(validation[i].principal_id);
    for (const auto& nc : c.neighbors.hits) {
      const auto* citers = index.citers(nc.doc_id);
      if (!citers) continue;
      for (const auto& citer : *citers) {
        c.pairs.push_back({cosine(s_vec, store.vec(citer.principal_id)),
                           nc.score, &citer, &nc.doc_id});
      }
    }
    if (c.pairs.empty())
      throw DataError("no candidate pairs for " + validation[i].principal_id);
  });

  TuneResult result;
  result.grid_bleu.resize(grid.size());
  for_each_index(grid.size(), exec, [&](std::size_t g) {
    std::vector<EvalPair> pairs(validation.size());
    for (std::size_t i = 0; i < validation.size(); ++i) {
      pairs[i].hypothesis = pick(cached[i], grid[g]).explanation;
      pairs[i].reference = validation[i].target;
      pairs[i].instance_ref = i;
    }
    result.grid_bleu[g] = corpus_bleu(pairs, 4, Exec::serial);
  });

  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (result.grid_bleu[g] > result.grid_bleu[best]) best = g;
  result.weights = grid[best];
  result.bleu = result.grid_bleu[best];
  return result;
}

}  // namespace citex
