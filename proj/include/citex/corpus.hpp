#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "citex/textkit.hpp"

namespace citex {

// Surface of the token that replaces every citation marker.
inline constexpr const char* kCitationPlaceholder = "⟨CITE⟩";

struct Document {
  std::string doc_id;
  std::string title;
  std::string abstract_text;
  std::string introduction;
  std::vector<std::string> body_paragraphs;
  std::optional<std::vector<std::string>> entity_annotations;
  bool acl = false;
};

// One citing sentence, already masked; kept only when it resolves to a
// document in the corpus and carries exactly one citation placeholder.
struct CitationEdge {
  std::string citing_id;
  std::string cited_id;
  std::string sentence;
  int paragraph_index = 0;
  int sentence_index = 0;
};

enum class Split { train, validation, test };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct ExplanationInstance {
  std::string principal_id;
  std::string cited_id;
  std::vector<std::string> target;  // <= target budget tokens
  Split split = Split::train;
  bool acl_flag = false;
};

struct SplitPlan {
  std::set<std::string> test_principals;
  std::set<std::string> validation_principals;
  std::uint64_t seed = 0;
};

struct LoadStats {
  std::uint64_t documents = 0;
  std::uint64_t citation_records = 0;
  std::uint64_t kept_edges = 0;  // resolved, non-self, single-citation
  std::uint64_t dropped_unresolved = 0;
  std::uint64_t dropped_self = 0;
  std::uint64_t dropped_multi_citation = 0;
};

struct SplitStats {
  std::uint64_t train = 0;
  std::uint64_t validation = 0;
  std::uint64_t test = 0;
  std::uint64_t dropped_leakage = 0;
  std::uint64_t dropped_missing_fields = 0;

  std::uint64_t total() const {
    return train + validation + test + dropped_leakage +
           dropped_missing_fields;
  }
};

class Corpus {
 public:
  struct RawCitation {
    std::string citing_id;
    std::string cited_id;
    std::string sentence;  // unmasked, as it appears in the source markup
    int paragraph_index = 0;
    int sentence_index = 0;
  };

  const std::vector<Document>& documents() const { return docs_; }
  const std::vector<CitationEdge>& edges() const { return edges_; }
  const LoadStats& stats() const { return stats_; }

  bool contains(const std::string& doc_id) const;
  const Document& doc(const std::string& doc_id) const;
  const Document* find(const std::string& doc_id) const;

  void add_document(Document doc);
  // Citations are pended so records may cite documents defined later in the
  // file; finalize() masks, resolves and counts them in insertion order.
  void add_citation(RawCitation record);
  void finalize();

  // Replaces/sets entity annotations from a sidecar file of
  // {"doc_id":..., "entities":[...]} lines.
  void load_entity_annotations(const std::string& path);

 private:
  std::vector<Document> docs_;
  std::vector<CitationEdge> edges_;
  std::vector<RawCitation> pending_;
  std::unordered_map<std::string, std::size_t> by_id_;
  LoadStats stats_;
};

// Reads corpus-jsonl: one document object per line with embedded citation
// records. Throws ParseError with the line number on malformed input and
// DataError on duplicate doc ids.
Corpus load_corpus(const std::string& path);

// Replaces every [CITE:...] marker with the placeholder token.
std::string mask_citations(std::string_view sentence);

// True if the text still carries a citation marker or the placeholder.
bool has_citation(std::string_view sentence);

// Randomly selects held-out principal documents among those with at least
// one kept outgoing edge. Deterministic under seed.
SplitPlan make_split_plan(const Corpus& corpus, std::size_t n_test,
                          std::size_t n_val, std::uint64_t seed);

// Classification of one edge under a plan; build_splits and the retrieval
// train index share this so the two can never disagree.
enum class EdgeFate { train, validation, test, dropped_leakage,
                      dropped_missing_fields };
EdgeFate classify_edge(const Corpus& corpus, const SplitPlan& plan,
                       const CitationEdge& edge);

std::vector<ExplanationInstance> build_splits(const Corpus& corpus,
                                              const SplitPlan& plan,
                                              const Tokenizer& tokenizer,
                                              std::size_t target_budget = 100,
                                              SplitStats* stats = nullptr);

void write_instances(const std::vector<ExplanationInstance>& instances,
                     const std::string& path);
std::vector<ExplanationInstance> read_instances(const std::string& path,
                                                const Corpus* corpus = nullptr);

void write_split_plan(const SplitPlan& plan, const std::string& path);
SplitPlan read_split_plan(const std::string& path);

}  // namespace citex
