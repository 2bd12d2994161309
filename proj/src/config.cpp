#include "citex/config.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "citex/errors.hpp"

namespace citex {

namespace {

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

}  // namespace

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid config JSON in " + path + ": " + e.what());
  }

  PipelineConfig cfg;
  maybe(j, "seed", cfg.seed);
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    maybe(p, "corpus", cfg.paths.corpus);
    maybe(p, "embeddings", cfg.paths.embeddings);
    maybe(p, "entities", cfg.paths.entities);
    maybe(p, "candidates", cfg.paths.candidates);
    maybe(p, "judgments", cfg.paths.judgments);
    maybe(p, "output_dir", cfg.paths.output_dir);
  }
  if (j.contains("context")) {
    const auto& c = j["context"];
    std::string view;
    maybe(c, "principal_view", view);
    if (!view.empty())
      cfg.context.principal_view = principal_view_from_string(view);
    view.clear();
    maybe(c, "cited_view", view);
    if (!view.empty()) cfg.context.cited_view = cited_view_from_string(view);
    maybe(c, "principal_budget", cfg.context.principal_budget);
    maybe(c, "cited_budget", cfg.context.cited_budget);
    maybe(c, "target_budget", cfg.context.target_budget);
    maybe(c, "term_list_size", cfg.context.term_list_size);
    maybe(c, "sample_seed", cfg.context.sample_seed);
  }
  if (j.contains("special_tokens")) {
    const auto& t = j["special_tokens"];
    maybe(t, "sep_principal", cfg.special_tokens.sep_principal);
    maybe(t, "sep_target", cfg.special_tokens.sep_target);
    maybe(t, "sep_tfidf", cfg.special_tokens.sep_tfidf);
    maybe(t, "sep_entity", cfg.special_tokens.sep_entity);
    maybe(t, "pad", cfg.special_tokens.pad);
    cfg.special_tokens.validate();
  }
  if (j.contains("match")) {
    const auto& m = j["match"];
    maybe(m, "threshold", cfg.match.threshold);
    std::string extractor;
    maybe(m, "extractor", extractor);
    if (extractor == "ingested")
      cfg.match.extractor = MatchConfig::Extractor::ingested;
    else if (extractor == "ngram_scan" || extractor.empty())
      cfg.match.extractor = MatchConfig::Extractor::ngram_scan;
    else
      throw DataError("unknown extractor in config: " + extractor);
    maybe(m, "ngram_max", cfg.match.ngram_max);
    cfg.match.validate();
  }
  if (j.contains("retrieval")) {
    const auto& r = j["retrieval"];
    maybe(r, "alpha", cfg.weights.alpha);
    maybe(r, "beta", cfg.weights.beta);
    maybe(r, "k", cfg.neighbors_k);
    if (r.contains("grid")) {
      for (const auto& point : r["grid"]) {
        if (!point.is_array() || point.size() != 2)
          throw DataError("config grid entries must be [alpha, beta] pairs");
        cfg.grid.push_back({point[0].get<double>(), point[1].get<double>()});
      }
    }
  }
  if (j.contains("metrics")) {
    const auto& m = j["metrics"];
    maybe(m, "max_n", cfg.bleu_max_n);
    maybe(m, "bootstrap_iterations", cfg.bootstrap_iterations);
    maybe(m, "bootstrap_sample_size", cfg.bootstrap_sample_size);
    maybe(m, "bounds_ks", cfg.bounds_ks);
  }
  if (j.contains("split")) {
    const auto& s = j["split"];
    maybe(s, "test_principals", cfg.test_principals);
    maybe(s, "validation_principals", cfg.validation_principals);
  }
  return cfg;
}

void PipelineConfig::require_inputs(
    const std::vector<std::string>& fields) const {
  auto check = [](const std::string& field, const std::string& value) {
    if (value.empty())
      throw DataError("required input path not configured: " + field);
    if (!std::filesystem::exists(value))
      throw DataError("input path does not exist: " + value + " (" + field +
                      ")");
  };
  for (const auto& field : fields) {
    if (field == "corpus") check(field, paths.corpus);
    else if (field == "embeddings") check(field, paths.embeddings);
    else if (field == "entities") check(field, paths.entities);
    else if (field == "candidates") check(field, paths.candidates);
    else if (field == "judgments") check(field, paths.judgments);
    else throw UsageError("unknown input field: " + field);
  }
}

}  // namespace citex
