#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "citex/corpus.hpp"
#include "citex/embed.hpp"
#include "citex/exec.hpp"

namespace citex {

struct RetrievalWeights {
  double alpha = 1.0;
  double beta = 1.0;

  void validate() const;  // alpha, beta >= 0 and alpha + beta > 0
};

struct RetrievalResult {
  std::vector<std::string> explanation;  // t'
  std::string neighbor_principal;        // N_S
  std::string neighbor_cited;            // N_C
  double score = 0;
};

// cited_id -> train documents citing it, each carrying its first-by-location
// citing sentence for that pair. Built with the same edge classification as
// build_splits, so the two can never disagree about the train set.
class TrainCitationIndex {
 public:
  struct Citer {
    std::string principal_id;
    std::vector<std::string> target;
  };

  static TrainCitationIndex build(const Corpus& corpus, const SplitPlan& plan,
                                  const Tokenizer& tokenizer,
                                  std::size_t target_budget = 100);

  const std::vector<Citer>* citers(const std::string& cited_id) const;
  std::size_t pair_count() const { return pairs_; }
  bool empty() const { return pairs_ == 0; }

 private:
  std::unordered_map<std::string, std::vector<Citer>> by_cited_;
  std::size_t pairs_ = 0;
};

// N_C ranges over the K nearest neighbors of C; for each, N_S over train
// documents citing N_C. Returns the pair maximizing
// alpha*cos(S,N_S) + beta*cos(C,N_C); exact score ties break by
// (N_C id, N_S id) ascending.
RetrievalResult retrieve(const std::string& principal_id,
                         const std::string& cited_id,
                         const EmbeddingStore& store,
                         const TrainCitationIndex& index,
                         const RetrievalWeights& weights, std::size_t k,
                         const std::unordered_set<std::string>& exclude,
                         Exec exec = Exec::parallel);

std::vector<RetrievalResult> retrieve_batch(
    const std::vector<ExplanationInstance>& instances,
    const EmbeddingStore& store, const TrainCitationIndex& index,
    const RetrievalWeights& weights, std::size_t k,
    const std::unordered_set<std::string>& exclude,
    Exec exec = Exec::parallel);

struct TuneResult {
  RetrievalWeights weights;
  double bleu = 0;
  std::vector<double> grid_bleu;  // one per grid point, in grid order
};

// Direct search over the weight grid maximizing corpus BLEU of the
// retrieved explanations against the gold targets (first-seen argmax).
TuneResult mert_tune(const std::vector<ExplanationInstance>& validation,
                     const EmbeddingStore& store,
                     const TrainCitationIndex& index, std::size_t k,
                     const std::vector<RetrievalWeights>& grid,
                     const std::unordered_set<std::string>& exclude,
                     Exec exec = Exec::parallel);

// beta = 1 with alpha log-spaced over [1/16, 16], plus the no-source
// ablation alpha = 0.
std::vector<RetrievalWeights> default_weight_grid();

}  // namespace citex
