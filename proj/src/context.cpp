#include "citex/context.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "citex/errors.hpp"
#include "citex/rng.hpp"

namespace citex {

PrincipalView principal_view_from_string(const std::string& s) {
  if (s == "abs" || s == "abstract") return PrincipalView::abstract_text;
  if (s == "intro" || s == "introduction") return PrincipalView::introduction;
  throw UsageError("unknown principal view: " + s);
}

CitedView cited_view_from_string(const std::string& s) {
  if (s == "abs" || s == "abstract") return CitedView::abstract_text;
  if (s == "intro" || s == "introduction") return CitedView::introduction;
  if (s == "sampled" || s == "sample") return CitedView::sampled;
  if (s == "tfidf") return CitedView::tfidf;
  if (s == "entities") return CitedView::entities;
  throw UsageError("unknown cited view: " + s);
}

std::string to_string(PrincipalView v) {
  return v == PrincipalView::abstract_text ? "abs" : "intro";
}

std::string to_string(CitedView v) {
  switch (v) {
    case CitedView::abstract_text: return "abs";
    case CitedView::introduction: return "intro";
    case CitedView::sampled: return "sampled";
    case CitedView::tfidf: return "tfidf";
    case CitedView::entities: return "entities";
  }
  return "abs";
}

void ContextSpec::validate() const {
  if (principal_budget == 0 || cited_budget == 0 || target_budget == 0)
    throw UsageError("context budgets must be positive");
  if (term_list_size == 0) throw UsageError("term_list_size must be positive");
}

void SpecialTokens::validate() const {
  const std::string* all[] = {&sep_principal, &sep_target, &sep_tfidf,
                              &sep_entity, &pad};
  for (int i = 0; i < 5; ++i) {
    if (all[i]->empty()) throw UsageError("special token surface is empty");
    for (int j = i + 1; j < 5; ++j)
      if (*all[i] == *all[j])
        throw UsageError("special token surfaces must be distinct: " +
                         *all[i]);
  }
}

namespace {

const std::string& field_of(const Document& doc, PrincipalView view) {
  return view == PrincipalView::abstract_text ? doc.abstract_text
                                              : doc.introduction;
}

void truncate(std::vector<std::string>& tokens, std::size_t budget) {
  if (tokens.size() > budget) tokens.resize(budget);
}

}  // namespace

std::vector<std::string> build_principal_view(
    const Document& doc, const ExplanationInstance& instance,
    const ContextSpec& spec, const Tokenizer& tokenizer) {
  const std::string& field = field_of(doc, spec.principal_view);
  if (field.empty())
    throw DataError("document " + doc.doc_id + " has no " +
                    (spec.principal_view == PrincipalView::abstract_text
                         ? std::string("abstract")
                         : std::string("introduction")));
  std::vector<std::string> out;
  for (const auto& sentence : split_sentences(field)) {
    auto masked = tokenizer.tokenize(mask_citations(sentence));
    // The target was truncated at the budget, so compare prefixes.
    if (masked.size() >= instance.target.size() &&
        std::equal(instance.target.begin(), instance.target.end(),
                   masked.begin()) &&
        (masked.size() == instance.target.size() ||
         instance.target.size() == spec.target_budget)) {
      continue;  // this is t; keep S' = S without t
    }
    out.insert(out.end(), masked.begin(), masked.end());
    if (out.size() >= spec.principal_budget) break;
  }
  truncate(out, spec.principal_budget);
  return out;
}

std::vector<std::string> build_cited_sentences(const Document& doc,
                                               const ContextSpec& spec,
                                               const Tokenizer& tokenizer) {
  if (spec.cited_view == CitedView::abstract_text ||
      spec.cited_view == CitedView::introduction) {
    const std::string& field = spec.cited_view == CitedView::abstract_text
                                   ? doc.abstract_text
                                   : doc.introduction;
    if (field.empty())
      throw DataError("document " + doc.doc_id + " has no " +
                      to_string(spec.cited_view) + " text");
    auto tokens = tokenizer.tokenize(field);
    truncate(tokens, spec.cited_budget);
    return tokens;
  }
  if (spec.cited_view != CitedView::sampled)
    throw UsageError("build_cited_sentences only handles sentence views");

  struct Candidate {
    std::size_t position;
    std::vector<std::string> tokens;
  };
  std::vector<Candidate> eligible;
  std::size_t position = 0;
  auto consider = [&](const std::string& text) {
    for (const auto& sentence : split_sentences(text)) {
      if (!has_citation(sentence)) {
        auto toks = tokenizer.tokenize(sentence);
        if (!toks.empty()) eligible.push_back({position, std::move(toks)});
      }
      ++position;
    }
  };
  consider(doc.abstract_text);
  consider(doc.introduction);
  for (const auto& para : doc.body_paragraphs) consider(para);
  if (eligible.empty())
    throw DataError("document " + doc.doc_id +
                    " has no citation-free sentences to sample");

  std::vector<std::size_t> order(eligible.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(spec.sample_seed ^ stable_hash(doc.doc_id));
  rng.shuffle(order);

  std::vector<std::size_t> chosen;
  std::size_t remaining = spec.cited_budget;
  for (std::size_t idx : order) {
    const auto& cand = eligible[idx];
    if (cand.tokens.size() > remaining) break;  // window full
    chosen.push_back(idx);
    remaining -= cand.tokens.size();
  }
  std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
    return eligible[a].position < eligible[b].position;
  });
  std::vector<std::string> out;
  for (std::size_t idx : chosen)
    out.insert(out.end(), eligible[idx].tokens.begin(),
               eligible[idx].tokens.end());
  return out;
}

namespace {

// Appends an item plus separator, stopping at term boundaries when the
// budget would be crossed. Returns false once the window is full.
struct ListWriter {
  std::vector<std::string>& out;
  const std::string& separator;
  std::size_t budget;
  bool first = true;

  bool append(const std::vector<std::string>& item_tokens) {
    const std::size_t need = item_tokens.size() + (first ? 0 : 1);
    if (out.size() + need > budget) return false;
    if (!first) out.push_back(separator);
    out.insert(out.end(), item_tokens.begin(), item_tokens.end());
    first = false;
    return true;
  }
};

}  // namespace

std::vector<std::string> build_cited_tfidf(const Document& doc,
                                           const TfidfModel& model,
                                           const ContextSpec& spec,
                                           const SpecialTokens& toks) {
  auto scored = model.score_terms(doc);
  std::vector<std::string> out;
  ListWriter writer{out, toks.sep_tfidf, spec.cited_budget};
  std::size_t emitted = 0;
  for (const auto& ts : scored) {
    if (emitted >= spec.term_list_size) break;
    if (!writer.append({ts.term})) break;
    ++emitted;
  }
  return out;
}

std::vector<std::string> build_cited_entities(const Document& doc,
                                              const TfidfModel& model,
                                              const ContextSpec& spec,
                                              const SpecialTokens& toks,
                                              const Tokenizer& tokenizer) {
  std::vector<std::string> surfaces;
  if (doc.entity_annotations) surfaces = *doc.entity_annotations;

  // Deduplicate case-insensitively, first occurrence wins.
  std::vector<std::string> unique;
  {
    std::unordered_set<std::string> seen;
    for (const auto& s : surfaces)
      if (seen.insert(ascii_lower(s)).second) unique.push_back(s);
  }

  // Rank by mean tf-idf of the surface tokens; stable on ties.
  std::unordered_map<std::string, std::uint64_t> tf;
  for (const auto& tok : model.field_tokens(doc)) ++tf[tok];
  auto entity_score = [&](const std::string& surface) {
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
    ranked.emplace_back(entity_score(unique[i]), i);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  std::vector<std::string> out;
  ListWriter entity_writer{out, toks.sep_entity, spec.cited_budget};
  std::unordered_set<std::string> covered;  // unigrams inside emitted entities
  std::size_t emitted_entities = 0;
  for (const auto& [score, idx] : ranked) {
    auto tokens = tokenizer.tokenize(unique[idx]);
    if (tokens.empty()) continue;
    if (!entity_writer.append(tokens)) break;
    ++emitted_entities;
    for (auto& t : tokens) covered.insert(std::move(t));
  }

  if (emitted_entities >= spec.term_list_size) return out;
  const std::size_t backfill = spec.term_list_size - emitted_entities;

  auto scored = model.score_terms(doc);
  std::size_t emitted_terms = 0;
  bool first_term = true;
  for (const auto& ts : scored) {
    if (emitted_terms >= backfill) break;
    if (covered.count(ts.term)) continue;
    // Every list item is preceded by a separator: the first backfill term
    // follows the entity block with the tf separator.
    const std::size_t need = (out.empty() && first_term) ? 1 : 2;
    if (out.size() + need > spec.cited_budget) break;
    if (!(out.empty() && first_term)) out.push_back(toks.sep_tfidf);
    out.push_back(ts.term);
    first_term = false;
    ++emitted_terms;
  }
  return out;
}

std::vector<std::string> build_cited_view(const Document& doc,
                                          const TfidfModel* model,
                                          const ContextSpec& spec,
                                          const SpecialTokens& toks,
                                          const Tokenizer& tokenizer) {
  switch (spec.cited_view) {
    case CitedView::abstract_text:
    case CitedView::introduction:
    case CitedView::sampled:
      return build_cited_sentences(doc, spec, tokenizer);
    case CitedView::tfidf:
      if (!model) throw UsageError("tfidf view needs a fitted model");
      return build_cited_tfidf(doc, *model, spec, toks);
    case CitedView::entities:
      if (!model) throw UsageError("entities view needs a fitted model");
      return build_cited_entities(doc, *model, spec, toks, tokenizer);
  }
  throw UsageError("unknown cited view");
}

AssembledContext assemble(std::vector<std::string> principal_tokens,
                          std::vector<std::string> cited_tokens,
                          const std::optional<std::vector<std::string>>& target,
                          const SpecialTokens& toks, const ContextSpec& spec) {
  toks.validate();
  if (principal_tokens.size() > spec.principal_budget)
    throw DataError("principal view exceeds budget: " +
                    std::to_string(principal_tokens.size()));
  if (cited_tokens.size() > spec.cited_budget)
    throw DataError("cited view exceeds budget: " +
                    std::to_string(cited_tokens.size()));
  if (target && target->size() > spec.target_budget)
    throw DataError("target exceeds budget: " +
                    std::to_string(target->size()));

  AssembledContext ctx;
  ctx.principal_len = principal_tokens.size();
  ctx.cited_len = cited_tokens.size();
  ctx.target_len = target ? target->size() : 0;

  const std::size_t total =
      spec.principal_budget + spec.cited_budget + spec.target_budget + 2;
  ctx.tokens = std::move(principal_tokens);
  ctx.tokens.reserve(total);
  ctx.tokens.push_back(toks.sep_principal);
  ctx.tokens.insert(ctx.tokens.end(),
                    std::make_move_iterator(cited_tokens.begin()),
                    std::make_move_iterator(cited_tokens.end()));
  if (target) {
    ctx.tokens.push_back(toks.sep_target);
    ctx.tokens.insert(ctx.tokens.end(), target->begin(), target->end());
  }
  ctx.tokens.resize(total, toks.pad);
  return ctx;
}

std::vector<BuiltContext> build_contexts(
    const Corpus& corpus, const std::vector<ExplanationInstance>& instances,
    const TfidfModel* model, const ContextSpec& spec,
    const SpecialTokens& toks, const Tokenizer& tokenizer,
    bool include_target, Exec exec) {
  spec.validate();
  toks.validate();
  std::vector<BuiltContext> out(instances.size());
  for_each_index(instances.size(), exec, [&](std::size_t i) {
    const auto& inst = instances[i];
    auto principal = build_principal_view(corpus.doc(inst.principal_id), inst,
                                          spec, tokenizer);
    auto cited =
        build_cited_view(corpus.doc(inst.cited_id), model, spec, toks,
                         tokenizer);
    std::optional<std::vector<std::string>> target;
    if (include_target) target = inst.target;
    out[i] = {i, assemble(std::move(principal), std::move(cited), target,
                          toks, spec)};
  });
  return out;
}

void write_contexts(const std::vector<BuiltContext>& contexts,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write contexts to " + path);
  for (const auto& c : contexts) {
    nlohmann::ordered_json j;
    j["instance"] = c.instance_ref;
    j["tokens"] = c.context.tokens;
    j["j"] = c.context.principal_len;
    j["k"] = c.context.cited_len;
    j["m"] = c.context.target_len;
    out << j.dump() << "\n";
  }
}

std::vector<BuiltContext> read_contexts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open contexts file: " + path);
  std::vector<BuiltContext> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      BuiltContext c;
      c.instance_ref = j.at("instance").get<std::size_t>();
      c.context.tokens = j.at("tokens").get<std::vector<std::string>>();
      c.context.principal_len = j.at("j").get<std::size_t>();
      c.context.cited_len = j.at("k").get<std::size_t>();
      c.context.target_len = j.at("m").get<std::size_t>();
      out.push_back(std::move(c));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, line_no,
                       std::string("bad context record: ") + e.what());
    }
  }
  return out;
}

}  // namespace citex
