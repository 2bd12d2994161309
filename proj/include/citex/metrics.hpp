#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "citex/exec.hpp"

namespace citex {

struct EvalPair {
  std::vector<std::string> hypothesis;
  std::vector<std::string> reference;  // never empty
  std::size_t instance_ref = 0;
  bool acl_flag = false;
};

// Single-reference corpus BLEU: clipped modified n-gram precisions
// (n = 1..max_n), geometric mean, brevity penalty, scaled to [0, 100].
// Orders with no hypothesis n-grams at all are excluded from the mean;
// any zero precision among the remaining orders gives 0 (no smoothing).
double corpus_bleu(const std::vector<EvalPair>& pairs, int max_n = 4,
                   Exec exec = Exec::parallel);

// Sentence BLEU with add-one smoothing on orders n >= 2 (numerator and
// denominator); the unigram precision is left raw.
double sentence_bleu(std::span<const std::string> hypothesis,
                     std::span<const std::string> reference, int max_n = 4);

struct RougeScore {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Micro-averaged n-gram overlap (clipped counts), n in {1, 2}.
RougeScore rouge_n(const std::vector<EvalPair>& pairs, int n,
                   Exec exec = Exec::parallel);

// Micro-averaged LCS-based score: P = LCS/|hyp|, R = LCS/|ref|.
RougeScore rouge_l(const std::vector<EvalPair>& pairs,
                   Exec exec = Exec::parallel);

// Single-pair ROUGE-L F1, used when correlating metric scores with
// per-instance human judgments.
double sentence_rouge_l(std::span<const std::string> hypothesis,
                        std::span<const std::string> reference);

// LCS length; bit-parallel, checked against a quadratic DP oracle in tests.
std::size_t lcs_length(std::span<const std::string> a,
                       std::span<const std::string> b);

// 100 * |distinct gold tokens covered by context| / |distinct gold tokens|.
double token_overlap(std::span<const std::string> context,
                     std::span<const std::string> gold);
double mean_token_overlap(
    const std::vector<std::vector<std::string>>& contexts,
    const std::vector<std::vector<std::string>>& golds,
    Exec exec = Exec::parallel);

// corpus_bleu restricted to pairs whose acl_flag equals flag_value.
double subset_bleu(const std::vector<EvalPair>& pairs, bool flag_value = true,
                   int max_n = 4);

// Point-biserial correlation of a continuous score against a dichotomous
// label; equals Pearson on the 0/1 encoding. s is the population SD.
double point_biserial(std::span<const double> scores,
                      std::span<const int> labels);

struct BootstrapResult {
  double mean_diff = 0;
  double p_value = 0;  // one-sided: fraction of iterations with diff <= 0
  std::size_t iterations = 0;
  std::size_t sample_size = 0;
};

// Paired bootstrap over per-instance values: each iteration resamples
// indices with replacement (sample capped at the population size) and
// compares the means. Deterministic under seed; iterations use derived,
// independent streams so serial and parallel runs agree exactly.
BootstrapResult bootstrap_compare(std::span<const double> scores_a,
                                  std::span<const double> scores_b,
                                  std::size_t iterations = 100,
                                  std::size_t sample_size = 1000,
                                  std::uint64_t seed = 0,
                                  Exec exec = Exec::parallel);

double bonferroni(double p, std::size_t comparisons);

enum class JudgmentDimension { correct, specific, plausible };
enum class Verdict { yes, no, skip };

struct JudgmentRecord {
  std::size_t instance_ref = 0;
  std::string system;
  JudgmentDimension dimension = JudgmentDimension::correct;
  Verdict verdict = Verdict::yes;
};

JudgmentDimension dimension_from_string(const std::string& s);
std::string to_string(JudgmentDimension d);
Verdict verdict_from_string(const std::string& s);

// judgments-csv: instance,system,dimension,verdict (with header line).
std::vector<JudgmentRecord> read_judgments(const std::string& path);

}  // namespace citex
