#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "citex/context.hpp"
#include "citex/rerank.hpp"
#include "citex/retrieval.hpp"

namespace citex {

// Declarative pipeline settings; JSON file, CLI flags win over file values.
struct PipelineConfig {
  std::uint64_t seed = 7;

  struct Paths {
    std::string corpus;
    std::string embeddings;
    std::string entities;  // optional sidecar annotations
    std::string candidates;
    std::string judgments;
    std::string output_dir;
  } paths;

  ContextSpec context;
  SpecialTokens special_tokens;
  MatchConfig match;

  RetrievalWeights weights;
  std::size_t neighbors_k = 64;
  std::vector<RetrievalWeights> grid;  // empty: default_weight_grid()

  int bleu_max_n = 4;
  std::size_t bootstrap_iterations = 100;
  std::size_t bootstrap_sample_size = 1000;
  std::vector<std::size_t> bounds_ks = {1, 2, 5, 10, 20};

  std::size_t test_principals = 500;
  std::size_t validation_principals = 500;

  static PipelineConfig from_file(const std::string& path);

  // Throws DataError when a named input path is missing on disk.
  void require_inputs(const std::vector<std::string>& fields) const;
};

}  // namespace citex
