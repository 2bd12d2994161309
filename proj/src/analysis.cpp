#include "citex/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "citex/errors.hpp"
#include "citex/textkit.hpp"

namespace citex {

BoundCurve oracle_bounds(const std::vector<CandidateSet>& sets,
                         const std::vector<std::vector<std::string>>& refs,
                         const std::vector<std::size_t>& ks, Exec exec) {
  if (sets.size() != refs.size())
    throw DataError("oracle_bounds: sets/refs size mismatch");
  if (sets.empty()) throw DataError("oracle_bounds: no candidate sets");
  if (ks.empty()) throw DataError("oracle_bounds: no k values");
  const std::size_t max_k = *std::max_element(ks.begin(), ks.end());
  if (max_k == 0) throw DataError("oracle_bounds: k must be positive");
  for (const auto& set : sets)
    if (set.candidates.size() < max_k)
      throw DataError("instance " + std::to_string(set.instance_ref) +
                      " has " + std::to_string(set.candidates.size()) +
                      " candidates, need " + std::to_string(max_k));

  struct Tokenized {
    std::vector<std::vector<std::string>> candidates;
    std::vector<double> scores;  // smoothed sentence BLEU per candidate
  };
  Tokenizer tokenizer;
  std::vector<Tokenized> scored(sets.size());
  for_each_index(sets.size(), exec, [&](std::size_t i) {
    auto& t = scored[i];
    t.candidates.reserve(max_k);
    t.scores.reserve(max_k);
    for (std::size_t c = 0; c < max_k; ++c) {
      t.candidates.push_back(tokenizer.tokenize(sets[i].candidates[c]));
      t.scores.push_back(sentence_bleu(t.candidates.back(), refs[i]));
    }
  });

  BoundCurve curve;
  curve.ks = ks;
  for (std::size_t k : ks) {
    std::vector<EvalPair> best(sets.size()), worst(sets.size());
    for (std::size_t i = 0; i < sets.size(); ++i) {
      std::size_t hi = 0, lo = 0;
      for (std::size_t c = 1; c < k; ++c) {
        if (scored[i].scores[c] > scored[i].scores[hi]) hi = c;
        if (scored[i].scores[c] < scored[i].scores[lo]) lo = c;
      }
      best[i] = {scored[i].candidates[hi], refs[i], i, false};
      worst[i] = {scored[i].candidates[lo], refs[i], i, false};
    }
    curve.upper.push_back(corpus_bleu(best, 4, exec));
    curve.lower.push_back(corpus_bleu(worst, 4, exec));
  }
  return curve;
}

AutocompleteResult autocomplete_eval(
    const std::vector<std::pair<std::vector<std::string>,
                                std::vector<std::string>>>& gold_and_completion,
    std::size_t prefix_len) {
  AutocompleteResult result;
  std::vector<EvalPair> pairs;
  for (std::size_t i = 0; i < gold_and_completion.size(); ++i) {
    const auto& [gold, completion] = gold_and_completion[i];
    if (gold.size() <= prefix_len) {
      ++result.skipped;
      continue;
    }
    EvalPair pair;
    pair.hypothesis = completion;
    pair.reference.assign(gold.begin() + prefix_len, gold.end());
    pair.instance_ref = i;
    pairs.push_back(std::move(pair));
  }
  result.scored = pairs.size();
  if (pairs.empty())
    throw DataError("autocomplete_eval: no scorable instances");
  result.bleu = corpus_bleu(pairs);
  return result;
}

// --- report ---------------------------------------------------------------

Report build_report(const ReportInputs& inputs, Exec exec) {
  if (inputs.systems.empty()) throw DataError("build_report: no systems");
  const std::size_t n_pairs = inputs.systems.front().pairs.size();
  for (const auto& sys : inputs.systems)
    if (sys.pairs.size() != n_pairs)
      throw DataError("build_report: system " + sys.name +
                      " has a mismatched instance count");

  Report report;
  for (const auto& sys : inputs.systems) {
    SystemEval eval;
    eval.name = sys.name;
    eval.n = sys.pairs.size();
    eval.bleu = corpus_bleu(sys.pairs, inputs.max_n, exec);
    bool any_acl = false;
    for (const auto& p : sys.pairs) any_acl |= p.acl_flag;
    if (any_acl) eval.acl_bleu = subset_bleu(sys.pairs, true, inputs.max_n);
    eval.rouge1 = rouge_n(sys.pairs, 1, exec);
    eval.rouge2 = rouge_n(sys.pairs, 2, exec);
    eval.rougeL = rouge_l(sys.pairs, exec);
    report.systems.push_back(std::move(eval));
  }

  // Per-instance sentence BLEU backs the significance bootstrap.
  std::vector<std::vector<double>> sentence_scores(inputs.systems.size());
  for (std::size_t s = 0; s < inputs.systems.size(); ++s) {
    auto& scores = sentence_scores[s];
    scores.resize(n_pairs);
    const auto& pairs = inputs.systems[s].pairs;
    for_each_index(n_pairs, exec, [&](std::size_t i) {
      scores[i] =
          sentence_bleu(pairs[i].hypothesis, pairs[i].reference, inputs.max_n);
    });
  }
  const std::size_t comparisons =
      inputs.systems.size() * (inputs.systems.size() - 1);
  for (std::size_t a = 0; a < inputs.systems.size(); ++a) {
    for (std::size_t b = 0; b < inputs.systems.size(); ++b) {
      if (a == b) continue;
      SignificanceEntry entry;
      entry.system_a = inputs.systems[a].name;
      entry.system_b = inputs.systems[b].name;
      entry.metric = "sentence_bleu";
      entry.result = bootstrap_compare(
          sentence_scores[a], sentence_scores[b], inputs.bootstrap_iterations,
          inputs.bootstrap_sample, inputs.seed, exec);
      entry.p_bonferroni = bonferroni(entry.result.p_value, comparisons);
      report.significance.push_back(std::move(entry));
    }
  }

  // Judgment correlations: metric score distribution vs yes/no verdicts,
  // one datapoint per (non-skip) judgment.
  if (!inputs.judgments.empty()) {
    std::map<std::string, std::size_t> system_index;
    for (std::size_t s = 0; s < inputs.systems.size(); ++s)
      system_index[inputs.systems[s].name] = s;
    std::set<std::pair<std::string, std::string>> keys;  // (system, dim)
    for (const auto& j : inputs.judgments)
      if (j.verdict != Verdict::skip && system_index.count(j.system))
        keys.insert({j.system, to_string(j.dimension)});
    for (const auto& [system, dimension] : keys) {
      const std::size_t s = system_index.at(system);
      for (const std::string metric : {"sentence_bleu", "sentence_rouge_l"}) {
        std::vector<double> scores;
        std::vector<int> labels;
        for (const auto& j : inputs.judgments) {
          if (j.system != system || to_string(j.dimension) != dimension ||
              j.verdict == Verdict::skip)
            continue;
          if (j.instance_ref >= n_pairs)
            throw DataError("judgment references unknown instance " +
                            std::to_string(j.instance_ref));
          const auto& pair = inputs.systems[s].pairs[j.instance_ref];
          scores.push_back(metric == "sentence_bleu"
                               ? sentence_scores[s][j.instance_ref]
                               : sentence_rouge_l(pair.hypothesis,
                                                  pair.reference));
          labels.push_back(j.verdict == Verdict::yes ? 1 : 0);
        }
        CorrelationEntry entry;
        entry.system = system;
        entry.metric = metric;
        entry.dimension = dimension;
        entry.n = scores.size();
        try {
          entry.r_pb = point_biserial(scores, labels);
        } catch (const DataError&) {
          continue;  // single-class or constant scores: not computable
        }
        report.correlations.push_back(std::move(entry));
      }
    }
  }

  report.overlap = inputs.overlap;
  report.bounds = inputs.bounds;
  report.autocomplete = inputs.autocomplete;
  return report;
}

nlohmann::ordered_json Report::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = schema_version;
  j["systems"] = nlohmann::ordered_json::array();
  for (const auto& sys : systems) {
    nlohmann::ordered_json row;
    row["name"] = sys.name;
    row["n"] = sys.n;
    row["bleu"] = sys.bleu;
    if (sys.acl_bleu) row["acl_bleu"] = *sys.acl_bleu;
    auto rouge = [](const RougeScore& r) {
      return nlohmann::ordered_json{
          {"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}};
    };
    row["rouge1"] = rouge(sys.rouge1);
    row["rouge2"] = rouge(sys.rouge2);
    row["rougeL"] = rouge(sys.rougeL);
    j["systems"].push_back(std::move(row));
  }
  j["significance"] = nlohmann::ordered_json::array();
  for (const auto& e : significance) {
    j["significance"].push_back(
        {{"a", e.system_a},
         {"b", e.system_b},
         {"metric", e.metric},
         {"mean_diff", e.result.mean_diff},
         {"p", e.result.p_value},
         {"p_bonferroni", e.p_bonferroni},
         {"iterations", e.result.iterations},
         {"sample_size", e.result.sample_size}});
  }
  j["correlations"] = nlohmann::ordered_json::array();
  for (const auto& e : correlations) {
    j["correlations"].push_back({{"system", e.system},
                                 {"dimension", e.dimension},
                                 {"metric", e.metric},
                                 {"r_pb", e.r_pb},
                                 {"n", e.n}});
  }
  if (!overlap.empty()) {
    nlohmann::ordered_json o = nlohmann::ordered_json::object();
    for (const auto& [label, value] : overlap) o[label] = value;
    j["overlap"] = std::move(o);
  }
  if (bounds) {
    j["bounds"] = {{"ks", bounds->ks},
                   {"upper", bounds->upper},
                   {"lower", bounds->lower}};
  }
  if (autocomplete) {
    j["autocomplete"] = {{"bleu", autocomplete->bleu},
                         {"scored", autocomplete->scored},
                         {"skipped", autocomplete->skipped}};
  }
  return j;
}

namespace {

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string Report::to_text() const {
  std::string out;
  out += "system                              BLEU  ACL-BLEU  Rouge-1  "
         "Rouge-2  Rouge-L      n\n";
  for (const auto& sys : systems) {
    char line[256];
    std::snprintf(line, sizeof(line),
                  "%-32s %7.2f  %8s  %7.4f  %7.4f  %7.4f  %5zu\n",
                  sys.name.c_str(), sys.bleu,
                  sys.acl_bleu ? fmt(*sys.acl_bleu, 2).c_str() : "-",
                  sys.rouge1.f1, sys.rouge2.f1, sys.rougeL.f1, sys.n);
    out += line;
  }
  if (!significance.empty()) {
    out += "\nsignificance (one-sided bootstrap, A > B)\n";
    for (const auto& e : significance) {
      out += "  " + e.system_a + " > " + e.system_b +
             ": mean_diff=" + fmt(e.result.mean_diff) +
             " p=" + fmt(e.result.p_value) +
             " p_bonf=" + fmt(e.p_bonferroni) + "\n";
    }
  }
  if (!correlations.empty()) {
    out += "\njudgment correlations (point biserial)\n";
    for (const auto& e : correlations) {
      out += "  " + e.system + " " + e.dimension + " " + e.metric +
             ": r_pb=" + fmt(e.r_pb) + " n=" + std::to_string(e.n) + "\n";
    }
  }
  if (!overlap.empty()) {
    out += "\ntoken overlap with gold (%)\n";
    for (const auto& [label, value] : overlap)
      out += "  " + label + ": " + fmt(value, 2) + "\n";
  }
  if (bounds) {
    out += "\noracle ranking bounds (corpus BLEU)\n";
    for (std::size_t i = 0; i < bounds->ks.size(); ++i) {
      out += "  k=" + std::to_string(bounds->ks[i]) +
             " upper=" + fmt(bounds->upper[i], 2) +
             " lower=" + fmt(bounds->lower[i], 2) + "\n";
    }
  }
  if (autocomplete) {
    out += "\nauto-completion: BLEU=" + fmt(autocomplete->bleu, 2) +
           " scored=" + std::to_string(autocomplete->scored) +
           " skipped=" + std::to_string(autocomplete->skipped) + "\n";
  }
  return out;
}

}  // namespace citex
