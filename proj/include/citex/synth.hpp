#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "citex/corpus.hpp"
#include "citex/embed.hpp"
#include "citex/metrics.hpp"
#include "citex/rerank.hpp"

namespace citex {

// Deterministic fixture generator: a topical citation-graph corpus plus the
// ingested artifacts the pipeline consumes (embeddings, candidate sentences,
// completions, human judgments).
struct SynthSpec {
  std::size_t n_docs = 200;
  std::size_t n_topics = 8;
  std::size_t max_citations = 4;
  std::size_t n_candidates = 20;  // per evaluation instance
  int embedding_dim = 64;
  std::uint64_t seed = 7;
  // Every Nth document also emits a degenerate citation record so the
  // ingestion counters stay exercised; 0 disables.
  std::size_t unresolved_every = 41;
  std::size_t multi_every = 29;
  std::size_t self_every = 53;
};

Corpus make_synthetic_corpus(const SynthSpec& spec);

// Writes the same corpus as corpus-jsonl; loading it back reproduces
// make_synthetic_corpus exactly, ingestion counters included.
void write_corpus_jsonl(const SynthSpec& spec, const std::string& path);

EmbeddingStore make_synthetic_embeddings(const Corpus& corpus,
                                         const SynthSpec& spec,
                                         const Tokenizer& tokenizer);

// Candidate sets for the given instances (typically the test split), with
// quality varying per candidate; carries ingested entity lists as well.
std::vector<CandidateSet> make_synthetic_candidates(
    const Corpus& corpus, const std::vector<ExplanationInstance>& instances,
    const SynthSpec& spec);

// completions-jsonl records aligned with the instances by index.
struct Completion {
  std::size_t instance_ref = 0;
  std::string completion;
};
std::vector<Completion> make_synthetic_completions(
    const std::vector<ExplanationInstance>& instances, const SynthSpec& spec,
    std::size_t prefix_len = 3);

std::vector<JudgmentRecord> make_synthetic_judgments(
    const std::vector<ExplanationInstance>& instances,
    const std::vector<std::string>& systems, const SynthSpec& spec,
    std::size_t max_instances = 50);

void write_completions(const std::vector<Completion>& completions,
                       const std::string& path);
std::vector<Completion> read_completions(const std::string& path);

void write_judgments(const std::vector<JudgmentRecord>& records,
                     const std::string& path);

}  // namespace citex
