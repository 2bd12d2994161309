#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "citex/exec.hpp"
#include "citex/metrics.hpp"
#include "citex/rerank.hpp"

namespace citex {

struct BoundCurve {
  std::vector<std::size_t> ks;
  std::vector<double> upper;  // corpus BLEU of best-of-k selections
  std::vector<double> lower;  // corpus BLEU of worst-of-k selections
};

// For each k, per instance pick the argmax (resp. argmin) smoothed sentence
// BLEU among the first k candidates, then report corpus BLEU of the picks.
// Candidate pools are nested: the first k candidates form the k-pool.
BoundCurve oracle_bounds(const std::vector<CandidateSet>& sets,
                         const std::vector<std::vector<std::string>>& refs,
                         const std::vector<std::size_t>& ks,
                         Exec exec = Exec::parallel);

struct AutocompleteResult {
  double bleu = 0;
  std::size_t scored = 0;
  std::size_t skipped = 0;  // gold targets with <= prefix_len tokens
};

// corpus BLEU of externally supplied completions against the gold target
// minus its first prefix_len tokens.
AutocompleteResult autocomplete_eval(
    const std::vector<std::pair<std::vector<std::string>,
                                std::vector<std::string>>>& gold_and_completion,
    std::size_t prefix_len = 3);

struct SystemOutputs {
  std::string name;
  std::vector<EvalPair> pairs;  // aligned across systems by position
};

struct SystemEval {
  std::string name;
  double bleu = 0;
  std::optional<double> acl_bleu;
  RougeScore rouge1, rouge2, rougeL;
  std::size_t n = 0;
};

struct SignificanceEntry {
  std::string system_a, system_b;
  std::string metric;
  BootstrapResult result;
  double p_bonferroni = 1.0;
};

struct CorrelationEntry {
  std::string system;
  std::string metric;
  std::string dimension;
  double r_pb = 0;
  std::size_t n = 0;
};

struct ReportInputs {
  std::vector<SystemOutputs> systems;
  std::vector<JudgmentRecord> judgments;
  std::vector<std::pair<std::string, double>> overlap;  // label -> mean %
  std::optional<BoundCurve> bounds;
  std::optional<AutocompleteResult> autocomplete;
  std::size_t bootstrap_iterations = 100;
  std::size_t bootstrap_sample = 1000;
  std::uint64_t seed = 0;
  int max_n = 4;
};

struct Report {
  int schema_version = 1;
  std::vector<SystemEval> systems;
  std::vector<SignificanceEntry> significance;
  std::vector<CorrelationEntry> correlations;
  std::vector<std::pair<std::string, double>> overlap;
  std::optional<BoundCurve> bounds;
  std::optional<AutocompleteResult> autocomplete;

  nlohmann::ordered_json to_json() const;
  std::string to_text() const;
};

// Full metrics table plus significance matrix and judgment correlations.
// Deterministic: the same inputs and seed reproduce the document byte for
// byte.
Report build_report(const ReportInputs& inputs, Exec exec = Exec::parallel);

}  // namespace citex
