#include "citex/metrics.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "citex/errors.hpp"
#include "citex/rng.hpp"

namespace citex {

namespace {

// Tokens are interned per pair so n-gram keys are collision-free byte
// strings of ids, independent of token contents.
struct PairVocab {
  std::unordered_map<std::string_view, std::uint32_t> ids;

  std::vector<std::uint32_t> encode(std::span<const std::string> tokens) {
    std::vector<std::uint32_t> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
      auto [it, _] = ids.emplace(t, static_cast<std::uint32_t>(ids.size()));
      out.push_back(it->second);
    }
    return out;
  }
};

using NgramCounts = std::unordered_map<std::string, std::uint64_t>;

NgramCounts count_ngrams(std::span<const std::uint32_t> ids, int n) {
  NgramCounts counts;
  if (static_cast<int>(ids.size()) < n) return counts;
  std::string key(sizeof(std::uint32_t) * n, '\0');
  for (std::size_t i = 0; i + n <= ids.size(); ++i) {
    std::memcpy(key.data(), ids.data() + i, sizeof(std::uint32_t) * n);
    ++counts[key];
  }
  return counts;
}

std::uint64_t clipped_matches(const NgramCounts& hyp, const NgramCounts& ref) {
  std::uint64_t total = 0;
  for (const auto& [key, count] : hyp) {
    auto it = ref.find(key);
    if (it != ref.end()) total += std::min(count, it->second);
  }
  return total;
}

struct BleuStats {
  std::vector<std::uint64_t> match;  // per order
  std::vector<std::uint64_t> total;
  std::uint64_t hyp_len = 0;
  std::uint64_t ref_len = 0;

  explicit BleuStats(int max_n) : match(max_n, 0), total(max_n, 0) {}

  BleuStats& operator+=(const BleuStats& o) {
    for (std::size_t i = 0; i < match.size(); ++i) {
      match[i] += o.match[i];
      total[i] += o.total[i];
    }
    hyp_len += o.hyp_len;
    ref_len += o.ref_len;
    return *this;
  }
};

BleuStats pair_bleu_stats(std::span<const std::string> hyp,
                          std::span<const std::string> ref, int max_n) {
  BleuStats stats(max_n);
  PairVocab vocab;
  auto h = vocab.encode(hyp);
  auto r = vocab.encode(ref);
  stats.hyp_len = h.size();
  stats.ref_len = r.size();
  for (int n = 1; n <= max_n; ++n) {
    auto hc = count_ngrams(h, n);
    auto rc = count_ngrams(r, n);
    stats.match[n - 1] = clipped_matches(hc, rc);
    stats.total[n - 1] =
        h.size() >= static_cast<std::size_t>(n) ? h.size() - n + 1 : 0;
  }
  return stats;
}

double brevity_penalty(std::uint64_t hyp_len, std::uint64_t ref_len) {
  if (hyp_len == 0) return 0.0;
  if (hyp_len >= ref_len) return 1.0;
  return std::exp(1.0 - static_cast<double>(ref_len) /
                            static_cast<double>(hyp_len));
}

double bleu_from_stats(const BleuStats& stats, int max_n) {
  int effective = 0;
  for (int n = max_n; n >= 1; --n) {
    if (stats.total[n - 1] > 0) {
      effective = n;
      break;
    }
  }
  if (effective == 0) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= effective; ++n) {
    if (stats.match[n - 1] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(stats.match[n - 1]) /
                        static_cast<double>(stats.total[n - 1]));
  }
  return 100.0 * brevity_penalty(stats.hyp_len, stats.ref_len) *
         std::exp(log_sum / effective);
}

void validate_pairs(const std::vector<EvalPair>& pairs) {
  if (pairs.empty()) throw DataError("empty evaluation pair list");
  for (const auto& p : pairs)
    if (p.reference.empty())
      throw DataError("empty reference in instance " +
                      std::to_string(p.instance_ref));
}

}  // namespace

double corpus_bleu(const std::vector<EvalPair>& pairs, int max_n, Exec exec) {
  validate_pairs(pairs);
  std::vector<BleuStats> per_pair(pairs.size(), BleuStats(max_n));
  for_each_index(pairs.size(), exec, [&](std::size_t i) {
    per_pair[i] =
        pair_bleu_stats(pairs[i].hypothesis, pairs[i].reference, max_n);
  });
  BleuStats total(max_n);
  for (const auto& s : per_pair) total += s;
  return bleu_from_stats(total, max_n);
}

double sentence_bleu(std::span<const std::string> hypothesis,
                     std::span<const std::string> reference, int max_n) {
  if (reference.empty()) throw DataError("sentence_bleu: empty reference");
  BleuStats stats = pair_bleu_stats(hypothesis, reference, max_n);
  if (stats.total[0] == 0) return 0.0;
  if (stats.match[0] == 0) return 0.0;
  double log_sum =
      std::log(static_cast<double>(stats.match[0]) /
               static_cast<double>(stats.total[0]));
  for (int n = 2; n <= max_n; ++n) {
    log_sum += std::log(static_cast<double>(stats.match[n - 1] + 1) /
                        static_cast<double>(stats.total[n - 1] + 1));
  }
  return 100.0 * brevity_penalty(stats.hyp_len, stats.ref_len) *
         std::exp(log_sum / max_n);
}

// --- ROUGE ------------------------------------------------------------

namespace {

struct OverlapStats {
  std::uint64_t match = 0, hyp = 0, ref = 0;
};

RougeScore rouge_from(std::uint64_t match, std::uint64_t hyp,
                      std::uint64_t ref) {
  RougeScore s;
  s.precision = hyp ? static_cast<double>(match) / hyp : 0.0;
  s.recall = ref ? static_cast<double>(match) / ref : 0.0;
  s.f1 = (s.precision + s.recall) > 0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

}  // namespace

RougeScore rouge_n(const std::vector<EvalPair>& pairs, int n, Exec exec) {
  validate_pairs(pairs);
  std::vector<OverlapStats> per_pair(pairs.size());
  for_each_index(pairs.size(), exec, [&](std::size_t i) {
    PairVocab vocab;
    auto h = vocab.encode(pairs[i].hypothesis);
    auto r = vocab.encode(pairs[i].reference);
    auto hc = count_ngrams(h, n);
    auto rc = count_ngrams(r, n);
    per_pair[i].match = clipped_matches(hc, rc);
    per_pair[i].hyp = h.size() >= static_cast<std::size_t>(n)
                          ? h.size() - n + 1
                          : 0;
    per_pair[i].ref = r.size() >= static_cast<std::size_t>(n)
                          ? r.size() - n + 1
                          : 0;
  });
  std::uint64_t match = 0, hyp = 0, ref = 0;
  for (const auto& s : per_pair) {
    match += s.match;
    hyp += s.hyp;
    ref += s.ref;
  }
  return rouge_from(match, hyp, ref);
}

namespace {

std::size_t lcs_bitparallel(std::span<const std::uint32_t> a,
                            std::span<const std::uint32_t> b) {
  const std::size_t m = a.size();
  if (m == 0 || b.empty()) return 0;
  const std::size_t words = (m + 63) / 64;
  std::unordered_map<std::uint32_t, std::vector<std::uint64_t>> masks;
  for (std::size_t i = 0; i < m; ++i) {
    auto& mask = masks.try_emplace(a[i], words, 0ULL).first->second;
    mask[i >> 6] |= 1ULL << (i & 63);
  }
  std::vector<std::uint64_t> v(words, ~0ULL);
  const std::vector<std::uint64_t> zero(words, 0ULL);
  for (std::uint32_t sym : b) {
    auto it = masks.find(sym);
    const std::vector<std::uint64_t>& pm = it == masks.end() ? zero : it->second;
    std::uint64_t carry = 0;
    for (std::size_t w = 0; w < words; ++w) {
      const std::uint64_t vw = v[w];
      const std::uint64_t uw = vw & pm[w];
      const std::uint64_t sum1 = vw + uw;
      const std::uint64_t c1 = sum1 < vw ? 1 : 0;
      const std::uint64_t sum2 = sum1 + carry;
      const std::uint64_t c2 = sum2 < sum1 ? 1 : 0;
      carry = c1 | c2;
      v[w] = sum2 | (vw - uw);  // uw is a bit-subset of vw: no borrow
    }
  }
  std::size_t ones = 0;
  for (std::uint64_t w : v) ones += static_cast<std::size_t>(std::popcount(w));
  return words * 64 - ones;
}

}  // namespace

std::size_t lcs_length(std::span<const std::string> a,
                       std::span<const std::string> b) {
  PairVocab vocab;
  auto ai = vocab.encode(a);
  auto bi = vocab.encode(b);
  return lcs_bitparallel(ai, bi);
}

RougeScore rouge_l(const std::vector<EvalPair>& pairs, Exec exec) {
  validate_pairs(pairs);
  std::vector<OverlapStats> per_pair(pairs.size());
  for_each_index(pairs.size(), exec, [&](std::size_t i) {
    per_pair[i].match = lcs_length(pairs[i].hypothesis, pairs[i].reference);
    per_pair[i].hyp = pairs[i].hypothesis.size();
    per_pair[i].ref = pairs[i].reference.size();
  });
  std::uint64_t match = 0, hyp = 0, ref = 0;
  for (const auto& s : per_pair) {
    match += s.match;
    hyp += s.hyp;
    ref += s.ref;
  }
  return rouge_from(match, hyp, ref);
}

double sentence_rouge_l(std::span<const std::string> hypothesis,
                        std::span<const std::string> reference) {
  if (reference.empty()) throw DataError("sentence_rouge_l: empty reference");
  return rouge_from(lcs_length(hypothesis, reference), hypothesis.size(),
                    reference.size())
      .f1;
}

// --- overlap, correlation, bootstrap -----------------------------------

double token_overlap(std::span<const std::string> context,
                     std::span<const std::string> gold) {
  if (gold.empty()) throw DataError("token_overlap: empty gold tokens");
  std::unordered_set<std::string_view> ctx(context.begin(), context.end());
  std::unordered_set<std::string_view> gold_set(gold.begin(), gold.end());
  std::size_t covered = 0;
  for (const auto& t : gold_set)
    if (ctx.count(t)) ++covered;
  return 100.0 * static_cast<double>(covered) /
         static_cast<double>(gold_set.size());
}

double mean_token_overlap(
    const std::vector<std::vector<std::string>>& contexts,
    const std::vector<std::vector<std::string>>& golds, Exec exec) {
  if (contexts.size() != golds.size())
    throw DataError("token_overlap batch: size mismatch");
  if (contexts.empty()) throw DataError("token_overlap batch: empty");
  std::vector<double> per(contexts.size());
  for_each_index(contexts.size(), exec, [&](std::size_t i) {
    per[i] = token_overlap(contexts[i], golds[i]);
  });
  double sum = 0;
  for (double v : per) sum += v;
  return sum / static_cast<double>(per.size());
}

double subset_bleu(const std::vector<EvalPair>& pairs, bool flag_value,
                   int max_n) {
  std::vector<EvalPair> subset;
  for (const auto& p : pairs)
    if (p.acl_flag == flag_value) subset.push_back(p);
  if (subset.empty()) throw DataError("subset_bleu: empty subset");
  return corpus_bleu(subset, max_n);
}

double point_biserial(std::span<const double> scores,
                      std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw DataError("point_biserial: length mismatch");
  if (scores.empty()) throw DataError("point_biserial: empty input");
  double sum = 0, sum1 = 0;
  std::size_t n1 = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      throw DataError("point_biserial: labels must be 0 or 1");
    sum += scores[i];
    if (labels[i] == 1) {
      sum1 += scores[i];
      ++n1;
    }
  }
  const std::size_t n = scores.size();
  const std::size_t n0 = n - n1;
  if (n1 == 0 || n0 == 0)
    throw DataError("point_biserial: both label classes required");
  const double mean = sum / n;
  double ss = 0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / n);
  if (sd == 0.0) throw DataError("point_biserial: zero score variance");
  const double m1 = sum1 / n1;
  const double m0 = (sum - sum1) / n0;
  return (m1 - m0) / sd *
         std::sqrt(static_cast<double>(n1) * static_cast<double>(n0) /
                   (static_cast<double>(n) * static_cast<double>(n)));
}

BootstrapResult bootstrap_compare(std::span<const double> scores_a,
                                  std::span<const double> scores_b,
                                  std::size_t iterations,
                                  std::size_t sample_size, std::uint64_t seed,
                                  Exec exec) {
  if (scores_a.size() != scores_b.size())
    throw DataError("bootstrap_compare: length mismatch");
  if (scores_a.empty()) throw DataError("bootstrap_compare: empty input");
  if (iterations == 0) throw DataError("bootstrap_compare: zero iterations");
  if (sample_size == 0) throw DataError("bootstrap_compare: zero sample size");
  const std::size_t n = scores_a.size();
  const std::size_t draw = std::min(sample_size, n);
  std::vector<double> diffs(iterations);
  for_each_index(iterations, exec, [&](std::size_t it) {
    Rng rng(Rng::derive(seed, it));
    double sum_a = 0, sum_b = 0;
    for (std::size_t s = 0; s < draw; ++s) {
      std::size_t idx = static_cast<std::size_t>(rng.bounded(n));
      sum_a += scores_a[idx];
      sum_b += scores_b[idx];
    }
    diffs[it] = (sum_a - sum_b) / static_cast<double>(draw);
  });
  BootstrapResult out;
  out.iterations = iterations;
  out.sample_size = draw;
  double sum = 0;
  std::size_t non_positive = 0;
  for (double d : diffs) {
    sum += d;
    if (d <= 0.0) ++non_positive;
  }
  out.mean_diff = sum / static_cast<double>(iterations);
  out.p_value =
      static_cast<double>(non_positive) / static_cast<double>(iterations);
  return out;
}

double bonferroni(double p, std::size_t comparisons) {
  return std::min(1.0, p * static_cast<double>(comparisons));
}

// --- judgments ----------------------------------------------------------

JudgmentDimension dimension_from_string(const std::string& s) {
  if (s == "correct") return JudgmentDimension::correct;
  if (s == "specific") return JudgmentDimension::specific;
  if (s == "plausible") return JudgmentDimension::plausible;
  throw DataError("unknown judgment dimension: " + s);
}

std::string to_string(JudgmentDimension d) {
  switch (d) {
    case JudgmentDimension::correct: return "correct";
    case JudgmentDimension::specific: return "specific";
    case JudgmentDimension::plausible: return "plausible";
  }
  return "correct";
}

Verdict verdict_from_string(const std::string& s) {
  if (s == "yes") return Verdict::yes;
  if (s == "no") return Verdict::no;
  if (s == "skip" || s == "?") return Verdict::skip;
  throw DataError("unknown verdict: " + s);
}

std::vector<JudgmentRecord> read_judgments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open judgments file: " + path);
  std::vector<JudgmentRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("instance,", 0) == 0) continue;  // header
    std::array<std::string, 4> cell;
    std::size_t field = 0, start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        if (field >= 4) throw ParseError(path, line_no, "too many fields");
        cell[field++] = line.substr(start, i - start);
        start = i + 1;
      }
    }
    if (field != 4) throw ParseError(path, line_no, "expected 4 fields");
    try {
      JudgmentRecord rec;
      rec.instance_ref = std::stoull(cell[0]);
      rec.system = cell[1];
      rec.dimension = dimension_from_string(cell[2]);
      rec.verdict = verdict_from_string(cell[3]);
      records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      throw ParseError(path, line_no, e.what());
    }
  }
  return records;
}

}  // namespace citex
