#include "citex/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "citex/errors.hpp"
#include "citex/rng.hpp"

namespace citex {

namespace {
constexpr std::string_view kMarkerOpen = "[CITE:";
}

std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "train";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "validation") return Split::validation;
  if (s == "test") return Split::test;
  throw DataError("unknown split label: " + s);
}

std::string mask_citations(std::string_view sentence) {
  std::string out;
  out.reserve(sentence.size());
  std::size_t i = 0;
  while (i < sentence.size()) {
    if (sentence.compare(i, kMarkerOpen.size(), kMarkerOpen) == 0) {
      std::size_t close = sentence.find(']', i + kMarkerOpen.size());
      if (close != std::string_view::npos) {
        out += kCitationPlaceholder;
        i = close + 1;
        continue;
      }
    }
    out += sentence[i++];
  }
  return out;
}

bool has_citation(std::string_view sentence) {
  return sentence.find(kMarkerOpen) != std::string_view::npos ||
         sentence.find(kCitationPlaceholder) != std::string_view::npos;
}

namespace {

std::size_t count_placeholders(std::string_view sentence) {
  std::size_t count = 0, pos = 0;
  const std::string_view ph = kCitationPlaceholder;
  while ((pos = sentence.find(ph, pos)) != std::string_view::npos) {
    ++count;
    pos += ph.size();
  }
  return count;
}

}  // namespace

bool Corpus::contains(const std::string& doc_id) const {
  return by_id_.count(doc_id) != 0;
}

const Document* Corpus::find(const std::string& doc_id) const {
  auto it = by_id_.find(doc_id);
  return it == by_id_.end() ? nullptr : &docs_[it->second];
}

const Document& Corpus::doc(const std::string& doc_id) const {
  const Document* d = find(doc_id);
  if (!d) throw DataError("unknown document id: " + doc_id);
  return *d;
}

void Corpus::add_document(Document doc) {
  if (doc.doc_id.empty()) throw DataError("document with empty doc_id");
  if (!by_id_.emplace(doc.doc_id, docs_.size()).second)
    throw DataError("duplicate doc_id: " + doc.doc_id);
  docs_.push_back(std::move(doc));
  ++stats_.documents;
}

void Corpus::add_citation(RawCitation record) {
  pending_.push_back(std::move(record));
  ++stats_.citation_records;
}

void Corpus::finalize() {
  for (auto& rec : pending_) {
    if (!contains(rec.cited_id)) {
      ++stats_.dropped_unresolved;
      continue;
    }
    if (rec.cited_id == rec.citing_id) {
      ++stats_.dropped_self;
      continue;
    }
    std::string masked = mask_citations(rec.sentence);
    if (count_placeholders(masked) != 1) {
      ++stats_.dropped_multi_citation;
      continue;
    }
    edges_.push_back({std::move(rec.citing_id), std::move(rec.cited_id),
                      std::move(masked), rec.paragraph_index,
                      rec.sentence_index});
  }
  pending_.clear();
  stats_.kept_edges = edges_.size();
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, line_no, std::string("bad JSON: ") + e.what());
    }
    try {
      Document doc;
      doc.doc_id = j.at("doc_id").get<std::string>();
      doc.title = j.at("title").get<std::string>();
      doc.abstract_text = j.at("abstract").get<std::string>();
      doc.introduction = j.at("introduction").get<std::string>();
      doc.body_paragraphs = j.at("body").get<std::vector<std::string>>();
      if (j.contains("entities") && !j["entities"].is_null())
        doc.entity_annotations = j["entities"].get<std::vector<std::string>>();
      doc.acl = j.value("acl", false);
      const std::string citing_id = doc.doc_id;
      corpus.add_document(std::move(doc));
      if (j.contains("citations")) {
        for (const auto& c : j["citations"]) {
          corpus.add_citation({citing_id, c.at("cited_id").get<std::string>(),
                               c.at("sentence").get<std::string>(),
                               c.value("para", 0), c.value("sent", 0)});
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, line_no,
                       std::string("bad document record: ") + e.what());
    }
  }
  corpus.finalize();
  return corpus;
}

void Corpus::load_entity_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open entities file: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      const std::string id = j.at("doc_id").get<std::string>();
      auto it = by_id_.find(id);
      if (it == by_id_.end())
        throw DataError("entities for unknown doc_id: " + id);
      docs_[it->second].entity_annotations =
          j.at("entities").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, line_no,
                       std::string("bad entities record: ") + e.what());
    }
  }
}

SplitPlan make_split_plan(const Corpus& corpus, std::size_t n_test,
                          std::size_t n_val, std::uint64_t seed) {
  std::vector<std::string> citing;
  {
    std::set<std::string> seen;
    for (const auto& e : corpus.edges()) seen.insert(e.citing_id);
    citing.assign(seen.begin(), seen.end());
  }
  if (citing.size() < n_test + n_val)
    throw DataError("not enough citing documents to hold out " +
                    std::to_string(n_test + n_val) + " principals (" +
                    std::to_string(citing.size()) + " available)");
  Rng rng(seed);
  rng.shuffle(citing);
  SplitPlan plan;
  plan.seed = seed;
  plan.test_principals.insert(citing.begin(), citing.begin() + n_test);
  plan.validation_principals.insert(citing.begin() + n_test,
                                    citing.begin() + n_test + n_val);
  return plan;
}

EdgeFate classify_edge(const Corpus& corpus, const SplitPlan& plan,
                       const CitationEdge& edge) {
  const Document& principal = corpus.doc(edge.citing_id);
  if (principal.abstract_text.empty() && principal.introduction.empty())
    return EdgeFate::dropped_missing_fields;
  if (plan.test_principals.count(edge.citing_id)) return EdgeFate::test;
  if (plan.validation_principals.count(edge.citing_id))
    return EdgeFate::validation;
  if (plan.test_principals.count(edge.cited_id) ||
      plan.validation_principals.count(edge.cited_id))
    return EdgeFate::dropped_leakage;
  return EdgeFate::train;
}

std::vector<ExplanationInstance> build_splits(const Corpus& corpus,
                                              const SplitPlan& plan,
                                              const Tokenizer& tokenizer,
                                              std::size_t target_budget,
                                              SplitStats* stats) {
  for (const auto& id : plan.test_principals)
    if (plan.validation_principals.count(id))
      throw DataError("split plan overlap on principal: " + id);
  for (const auto& id : plan.test_principals)
    if (!corpus.contains(id))
      throw DataError("plan test principal not in corpus: " + id);
  for (const auto& id : plan.validation_principals)
    if (!corpus.contains(id))
      throw DataError("plan validation principal not in corpus: " + id);

  SplitStats local;
  std::vector<ExplanationInstance> instances;
  for (const auto& edge : corpus.edges()) {
    EdgeFate fate = classify_edge(corpus, plan, edge);
    switch (fate) {
      case EdgeFate::dropped_missing_fields:
        ++local.dropped_missing_fields;
        continue;
      case EdgeFate::dropped_leakage:
        ++local.dropped_leakage;
        continue;
      case EdgeFate::test: ++local.test; break;
      case EdgeFate::validation: ++local.validation; break;
      case EdgeFate::train: ++local.train; break;
    }
    ExplanationInstance inst;
    inst.principal_id = edge.citing_id;
    inst.cited_id = edge.cited_id;
    inst.target = tokenizer.tokenize(edge.sentence);
    if (inst.target.size() > target_budget) inst.target.resize(target_budget);
    inst.split = fate == EdgeFate::test       ? Split::test
                 : fate == EdgeFate::validation ? Split::validation
                                                : Split::train;
    inst.acl_flag = corpus.doc(edge.citing_id).acl;
    instances.push_back(std::move(inst));
  }
  if (stats) *stats = local;
  return instances;
}

void write_instances(const std::vector<ExplanationInstance>& instances,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write instances to " + path);
  for (const auto& inst : instances) {
    nlohmann::ordered_json j;
    j["principal"] = inst.principal_id;
    j["cited"] = inst.cited_id;
    std::string target;
    for (std::size_t i = 0; i < inst.target.size(); ++i) {
      if (i) target += ' ';
      target += inst.target[i];
    }
    j["target"] = target;
    j["split"] = to_string(inst.split);
    out << j.dump() << "\n";
  }
}

std::vector<ExplanationInstance> read_instances(const std::string& path,
                                                const Corpus* corpus) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open instances file: " + path);
  std::vector<ExplanationInstance> instances;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      ExplanationInstance inst;
      inst.principal_id = j.at("principal").get<std::string>();
      inst.cited_id = j.at("cited").get<std::string>();
      std::istringstream toks(j.at("target").get<std::string>());
      std::string tok;
      while (toks >> tok) inst.target.push_back(tok);
      inst.split = split_from_string(j.at("split").get<std::string>());
      if (corpus) {
        const Document* d = corpus->find(inst.principal_id);
        inst.acl_flag = d && d->acl;
      }
      instances.push_back(std::move(inst));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, line_no,
                       std::string("bad instance record: ") + e.what());
    }
  }
  return instances;
}

void write_split_plan(const SplitPlan& plan, const std::string& path) {
  nlohmann::ordered_json j;
  j["seed"] = plan.seed;
  j["test_principals"] = std::vector<std::string>(plan.test_principals.begin(),
                                                  plan.test_principals.end());
  j["validation_principals"] = std::vector<std::string>(
      plan.validation_principals.begin(), plan.validation_principals.end());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write split plan to " + path);
  out << j.dump(2) << "\n";
}

SplitPlan read_split_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open split plan: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid split plan in " + path + ": " + e.what());
  }
  SplitPlan plan;
  plan.seed = j.value("seed", std::uint64_t{0});
  for (const auto& id : j.at("test_principals"))
    plan.test_principals.insert(id.get<std::string>());
  for (const auto& id : j.at("validation_principals"))
    plan.validation_principals.insert(id.get<std::string>());
  return plan;
}

}  // namespace citex
