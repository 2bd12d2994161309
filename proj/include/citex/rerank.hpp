#pragma once

#include <optional>
#include <string>
#include <vector>

#include "citex/exec.hpp"

namespace citex {

struct Document;
struct Tokenizer;
class TfidfModel;

// Externally generated candidate sentences for one instance, optionally
// with pre-extracted entity lists (ingested IE output).
struct CandidateSet {
  std::size_t instance_ref = 0;
  std::vector<std::string> candidates;
  std::optional<std::vector<std::vector<std::string>>> candidate_entities;
};

// Cited document's entity surfaces, descending tf-idf, deduplicated
// case-insensitively.
struct RankedEntityList {
  std::vector<std::string> entities;
};

RankedEntityList rank_entities(const Document& doc, const TfidfModel& model,
                               const Tokenizer& tokenizer);

struct MatchConfig {
  double threshold = 0.7;
  enum class Extractor { ingested, ngram_scan };
  Extractor extractor = Extractor::ngram_scan;
  std::size_t ngram_max = 6;

  void validate() const;  // 0 < threshold <= 1
};

// Candidate-side entity surfaces. ngram_scan emits, for each cited entity,
// the candidate n-gram (n <= ngram_max) that matches it best at or above
// the threshold; duplicates collapse.
std::vector<std::string> candidate_entities(const std::string& candidate,
                                            const RankedEntityList& cited,
                                            const MatchConfig& cfg,
                                            const Tokenizer& tokenizer);

// Smallest 1-based rank j with gestalt_ratio(q, e_j) >= threshold.
std::optional<std::size_t> match_rank(const std::string& q,
                                      const RankedEntityList& cited,
                                      const MatchConfig& cfg);

// MRR = (1/Q) * sum over extracted entities of 1/rank; unmatched entities
// contribute 0, and Q = 0 scores 0.
double mrr_of_entities(const std::vector<std::string>& qs,
                       const RankedEntityList& cited, const MatchConfig& cfg);

double mrr(const std::string& candidate, const RankedEntityList& cited,
           const MatchConfig& cfg, const Tokenizer& tokenizer);

struct Selection {
  std::size_t index = 0;
  double mrr = 0;
};

// Argmax of MRR over the candidate set; ties keep the earliest candidate.
Selection select_best(const CandidateSet& set, const RankedEntityList& cited,
                      const MatchConfig& cfg, const Tokenizer& tokenizer);

std::vector<Selection> select_best_batch(
    const std::vector<CandidateSet>& sets,
    const std::vector<RankedEntityList>& cited_lists, const MatchConfig& cfg,
    const Tokenizer& tokenizer, Exec exec = Exec::parallel);

// candidates-jsonl: {"instance": idx, "candidates": [...],
//                    "candidate_entities": [[...]]?}
std::vector<CandidateSet> read_candidates(const std::string& path);
void write_candidates(const std::vector<CandidateSet>& sets,
                      const std::string& path);

}  // namespace citex
