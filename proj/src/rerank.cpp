#include "citex/rerank.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "citex/corpus.hpp"
#include "citex/errors.hpp"
#include "citex/textkit.hpp"

namespace citex {

void MatchConfig::validate() const {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw UsageError("match threshold must be in (0, 1]");
  if (ngram_max == 0) throw UsageError("ngram_max must be positive");
}

RankedEntityList rank_entities(const Document& doc, const TfidfModel& model,
                               const Tokenizer& tokenizer) {
  RankedEntityList list;
  if (!doc.entity_annotations) return list;

  std::vector<std::string> unique;
  std::unordered_set<std::string> seen;
  for (const auto& s : *doc.entity_annotations)
    if (seen.insert(ascii_lower(s)).second) unique.push_back(s);

  std::unordered_map<std::string, std::uint64_t> tf;
  for (const auto& tok : model.field_tokens(doc)) ++tf[tok];
  auto score = [&](const std::string& surface) {
    auto tokens = tokenizer.tokenize(surface);
    if (tokens.empty()) return 0.0;
    double sum = 0;
    for (const auto& t : tokens) {
      auto it = tf.find(t);
      sum += model.score(t, it == tf.end() ? 0 : it->second);
    }
    return sum / static_cast<double>(tokens.size());
  };

  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 0; i < unique.size(); ++i)
    ranked.emplace_back(score(unique[i]), i);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [s, idx] : ranked) list.entities.push_back(unique[idx]);
  return list;
}

std::optional<std::size_t> match_rank(const std::string& q,
                                      const RankedEntityList& cited,
                                      const MatchConfig& cfg) {
  for (std::size_t j = 0; j < cited.entities.size(); ++j) {
    if (gestalt_ratio(q, cited.entities[j]) >= cfg.threshold) return j + 1;
  }
  return std::nullopt;
}

std::vector<std::string> candidate_entities(const std::string& candidate,
                                            const RankedEntityList& cited,
                                            const MatchConfig& cfg,
                                            const Tokenizer& tokenizer) {
  cfg.validate();
  auto tokens = tokenizer.tokenize(candidate);
  std::vector<std::string> ngrams;
  for (std::size_t n = 1; n <= cfg.ngram_max && n <= tokens.size(); ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string g = tokens[i];
      for (std::size_t t = 1; t < n; ++t) {
        g += ' ';
        g += tokens[i + t];
      }
      ngrams.push_back(std::move(g));
    }
  }

  // For each cited entity keep only its best-matching n-gram, then collapse
  // duplicates across entities; output follows entity rank order.
  std::vector<std::string> out;
  std::unordered_set<std::string> emitted;
  for (const auto& entity : cited.entities) {
    double best = 0;
    const std::string* pick = nullptr;
    for (const auto& g : ngrams) {
      double r = gestalt_ratio(g, entity);
      if (r > best) {
        best = r;
        pick = &g;
      }
    }
    if (pick && best >= cfg.threshold && emitted.insert(*pick).second)
      out.push_back(*pick);
  }
  return out;
}

double mrr_of_entities(const std::vector<std::string>& qs,
                       const RankedEntityList& cited, const MatchConfig& cfg) {
  cfg.validate();
  if (qs.empty()) return 0.0;
  double sum = 0;
  for (const auto& q : qs) {
    auto rank = match_rank(q, cited, cfg);
    if (rank) sum += 1.0 / static_cast<double>(*rank);
  }
  return sum / static_cast<double>(qs.size());
}

double mrr(const std::string& candidate, const RankedEntityList& cited,
           const MatchConfig& cfg, const Tokenizer& tokenizer) {
  return mrr_of_entities(candidate_entities(candidate, cited, cfg, tokenizer),
                         cited, cfg);
}

Selection select_best(const CandidateSet& set, const RankedEntityList& cited,
                      const MatchConfig& cfg, const Tokenizer& tokenizer) {
  cfg.validate();
  if (set.candidates.empty())
    throw DataError("candidate set " + std::to_string(set.instance_ref) +
                    " is empty");
  if (cfg.extractor == MatchConfig::Extractor::ingested &&
      !set.candidate_entities)
    throw DataError("instance " + std::to_string(set.instance_ref) +
                    ": ingested extractor needs candidate_entities");
  if (set.candidate_entities &&
      set.candidate_entities->size() != set.candidates.size())
    throw DataError("instance " + std::to_string(set.instance_ref) +
                    ": candidate_entities count mismatch");

  Selection best{0, -1.0};
  for (std::size_t i = 0; i < set.candidates.size(); ++i) {
    double score;
    if (cfg.extractor == MatchConfig::Extractor::ingested) {
      score = mrr_of_entities((*set.candidate_entities)[i], cited, cfg);
    } else {
      score = mrr(set.candidates[i], cited, cfg, tokenizer);
    }
    if (score > best.mrr) best = {i, score};
  }
  if (best.mrr < 0) best.mrr = 0;
  return best;
}

std::vector<Selection> select_best_batch(
    const std::vector<CandidateSet>& sets,
    const std::vector<RankedEntityList>& cited_lists, const MatchConfig& cfg,
    const Tokenizer& tokenizer, Exec exec) {
  if (sets.size() != cited_lists.size())
    throw DataError("select_best_batch: size mismatch");
  std::vector<Selection> out(sets.size());
  for_each_index(sets.size(), exec, [&](std::size_t i) {
    out[i] = select_best(sets[i], cited_lists[i], cfg, tokenizer);
  });
  return out;
}

std::vector<CandidateSet> read_candidates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open candidates file: " + path);
  std::vector<CandidateSet> sets;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      CandidateSet set;
      set.instance_ref = j.at("instance").get<std::size_t>();
      set.candidates = j.at("candidates").get<std::vector<std::string>>();
      if (set.candidates.empty())
        throw DataError("candidate set with no candidates");
      if (j.contains("candidate_entities") &&
          !j["candidate_entities"].is_null()) {
        set.candidate_entities =
            j["candidate_entities"]
                .get<std::vector<std::vector<std::string>>>();
        if (set.candidate_entities->size() != set.candidates.size())
          throw DataError("candidate_entities count mismatch");
      }
      sets.push_back(std::move(set));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, line_no,
                       std::string("bad candidates record: ") + e.what());
    } catch (const DataError& e) {
      throw ParseError(path, line_no, e.what());
    }
  }
  return sets;
}

void write_candidates(const std::vector<CandidateSet>& sets,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write candidates to " + path);
  for (const auto& set : sets) {
    nlohmann::ordered_json j;
    j["instance"] = set.instance_ref;
    j["candidates"] = set.candidates;
    if (set.candidate_entities) j["candidate_entities"] = *set.candidate_entities;
    out << j.dump() << "\n";
  }
}

}  // namespace citex
