#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "citex/corpus.hpp"
#include "citex/exec.hpp"
#include "citex/textkit.hpp"

namespace citex {

enum class PrincipalView { abstract_text, introduction };
enum class CitedView { abstract_text, introduction, sampled, tfidf, entities };

PrincipalView principal_view_from_string(const std::string& s);
CitedView cited_view_from_string(const std::string& s);
std::string to_string(PrincipalView v);
std::string to_string(CitedView v);

struct ContextSpec {
  PrincipalView principal_view = PrincipalView::abstract_text;
  CitedView cited_view = CitedView::abstract_text;
  std::size_t principal_budget = 450;
  std::size_t cited_budget = 450;
  std::size_t target_budget = 100;
  std::size_t term_list_size = 100;
  std::uint64_t sample_seed = 0;

  void validate() const;
};

struct SpecialTokens {
  std::string sep_principal = "⟨SEP⟩";
  std::string sep_target = "⟨TGT⟩";
  std::string sep_tfidf = "⟨TF⟩";
  std::string sep_entity = "⟨ENT⟩";
  std::string pad = "⟨PAD⟩";

  void validate() const;  // five pairwise-distinct surfaces
};

struct AssembledContext {
  std::vector<std::string> tokens;
  std::size_t principal_len = 0;  // j
  std::size_t cited_len = 0;      // k
  std::size_t target_len = 0;     // m; 0 at inference time
};

// First principal_budget tokens of the chosen field with the instance's
// target sentence removed when a masked sentence of the field matches it.
std::vector<std::string> build_principal_view(
    const Document& doc, const ExplanationInstance& instance,
    const ContextSpec& spec, const Tokenizer& tokenizer);

// abstract/introduction: budgeted prefix. sampled: seeded uniform sample of
// the document's non-citing sentences, re-ordered by document position,
// filling the budget sentence by sentence.
std::vector<std::string> build_cited_sentences(const Document& doc,
                                               const ContextSpec& spec,
                                               const Tokenizer& tokenizer);

// Top term_list_size unigrams by tf-idf, descending, interleaved with the
// tf separator; truncated at a term boundary if the budget intervenes.
std::vector<std::string> build_cited_tfidf(const Document& doc,
                                           const TfidfModel& model,
                                           const ContextSpec& spec,
                                           const SpecialTokens& toks);

// Deduplicated entities sorted by mean token tf-idf, entity separator
// between them, then tf-idf unigram backfill (term_list_size - n terms,
// skipping unigrams already inside an emitted entity).
std::vector<std::string> build_cited_entities(const Document& doc,
                                              const TfidfModel& model,
                                              const ContextSpec& spec,
                                              const SpecialTokens& toks,
                                              const Tokenizer& tokenizer);

std::vector<std::string> build_cited_view(const Document& doc,
                                          const TfidfModel* model,
                                          const ContextSpec& spec,
                                          const SpecialTokens& toks,
                                          const Tokenizer& tokenizer);

// principal ++ sep_principal ++ cited [++ sep_target ++ target], padded to
// principal_budget + cited_budget + target_budget + 2 tokens.
AssembledContext assemble(std::vector<std::string> principal_tokens,
                          std::vector<std::string> cited_tokens,
                          const std::optional<std::vector<std::string>>& target,
                          const SpecialTokens& toks, const ContextSpec& spec);

struct BuiltContext {
  std::size_t instance_ref = 0;
  AssembledContext context;
};

std::vector<BuiltContext> build_contexts(
    const Corpus& corpus, const std::vector<ExplanationInstance>& instances,
    const TfidfModel* model, const ContextSpec& spec,
    const SpecialTokens& toks, const Tokenizer& tokenizer,
    bool include_target = true, Exec exec = Exec::parallel);

void write_contexts(const std::vector<BuiltContext>& contexts,
                    const std::string& path);
std::vector<BuiltContext> read_contexts(const std::string& path);

}  // namespace citex
