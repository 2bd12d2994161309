#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace citex {

class Corpus;
struct Document;

// Word tokenizer: splits on whitespace, peels ASCII punctuation off as
// single-character tokens, and treats any non-ASCII codepoint as a word
// character (so multi-byte scripts and reserved surfaces like the citation
// placeholder stay glued together). A custom tokenize function can be
// plugged in for subword schemes; budgets then count subwords.
struct Tokenizer {
  enum class Mode { word, pluggable };

  Mode mode = Mode::word;
  bool lowercase = true;
  std::function<std::vector<std::string>(std::string_view)> custom;

  std::vector<std::string> tokenize(std::string_view text) const;
};

// Deterministic sentence splitter: a sentence ends at '.', '!' or '?'
// (optionally followed by closing quotes/brackets) before whitespace or
// end of text. No abbreviation handling; boundaries only need to be stable.
std::vector<std::string> split_sentences(std::string_view text);

// Which document fields feed tf-idf fitting and scoring.
struct FieldSelector {
  bool title = false;
  bool abstract_text = true;
  bool introduction = true;
  bool body = true;
};

struct TermScore {
  std::string term;
  double score;
};

// Document-frequency table over a corpus. score = tf(t,d) * ln(N / df(t)),
// with df floored at 1 for terms unseen at fit time.
class TfidfModel {
 public:
  static TfidfModel fit(const Corpus& corpus, const FieldSelector& fields,
                        const Tokenizer& tokenizer);

  // Descending by score, ties by term ascending.
  std::vector<TermScore> score_terms(const Document& doc) const;
  std::vector<TermScore> score_terms(
      const std::vector<std::string>& tokens) const;

  // tf-idf of a single term given a term-frequency map of the document.
  double score(const std::string& term, std::uint64_t tf) const;

  double idf(const std::string& term) const;

  std::uint64_t doc_count() const { return n_docs_; }
  std::uint64_t doc_freq(const std::string& term) const;
  std::uint64_t fingerprint() const { return fingerprint_; }
  const FieldSelector& fields() const { return fields_; }

  void save(const std::string& path) const;
  static TfidfModel load(const std::string& path);

  std::vector<std::string> field_tokens(const Document& doc) const;

 private:
  std::uint64_t n_docs_ = 0;
  std::unordered_map<std::string, std::uint64_t> doc_freq_;
  std::uint64_t fingerprint_ = 0;
  FieldSelector fields_;
  Tokenizer tokenizer_;  // word-mode settings persist; a custom fn does not
};

// Ratcliff-Obershelp similarity in [0, 1] over the lowercased byte strings:
// 2M / (|a| + |b|) where M totals the characters matched by recursively
// taking the longest common block (leftmost in a, then in b, on ties).
// Both empty -> 1. No junk heuristic.
double gestalt_ratio(std::string_view a, std::string_view b);

std::string ascii_lower(std::string_view s);

}  // namespace citex
