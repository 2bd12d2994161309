#include "citex/textkit.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "citex/corpus.hpp"
#include "citex/errors.hpp"
#include "citex/rng.hpp"

namespace citex {

namespace {

bool is_ascii_space(unsigned char c) { return c <= ' '; }
bool is_word_byte(unsigned char c) {
  return std::isalnum(c) || c >= 0x80;  // non-ASCII glues into the word
}

}  // namespace

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c += 'a' - 'A';
  }
  return out;
}

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const {
  if (mode == Mode::pluggable) {
    if (!custom) throw UsageError("pluggable tokenizer has no function set");
    return custom(text);
  }
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (is_ascii_space(c)) {
      ++i;
    } else if (is_word_byte(c)) {
      std::size_t start = i;
      while (i < n && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
      std::string tok(text.substr(start, i - start));
      tokens.push_back(lowercase ? ascii_lower(tok) : tok);
    } else {
      tokens.emplace_back(1, static_cast<char>(c));  // punctuation
      ++i;
    }
  }
  return tokens;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  std::size_t start = 0;
  const std::size_t n = text.size();
  auto flush = [&](std::size_t end) {
    std::size_t a = start, b = end;
    while (a < b && is_ascii_space(static_cast<unsigned char>(text[a]))) ++a;
    while (b > a && is_ascii_space(static_cast<unsigned char>(text[b - 1])))
      --b;
    if (b > a) sentences.emplace_back(text.substr(a, b - a));
    start = end;
  };
  std::size_t i = 0;
  while (i < n) {
    char c = text[i];
    if (c == '.' || c == '!' || c == '?') {
      ++i;
      while (i < n && (text[i] == '.' || text[i] == '!' || text[i] == '?'))
        ++i;
      while (i < n && (text[i] == ')' || text[i] == ']' || text[i] == '"' ||
                       text[i] == '\''))
        ++i;
      if (i >= n || is_ascii_space(static_cast<unsigned char>(text[i])))
        flush(i);
    } else {
      ++i;
    }
  }
  flush(n);
  return sentences;
}

// --- tf-idf ---------------------------------------------------------------

std::vector<std::string> TfidfModel::field_tokens(const Document& doc) const {
  std::vector<std::string> out;
  auto append = [&](std::string_view text) {
    auto toks = tokenizer_.tokenize(text);
    out.insert(out.end(), std::make_move_iterator(toks.begin()),
               std::make_move_iterator(toks.end()));
  };
  if (fields_.title) append(doc.title);
  if (fields_.abstract_text) append(doc.abstract_text);
  if (fields_.introduction) append(doc.introduction);
  if (fields_.body) {
    for (const auto& para : doc.body_paragraphs) append(para);
  }
  return out;
}

TfidfModel TfidfModel::fit(const Corpus& corpus, const FieldSelector& fields,
                           const Tokenizer& tokenizer) {
  if (corpus.documents().empty())
    throw DataError("cannot fit tf-idf on an empty corpus");
  TfidfModel model;
  model.fields_ = fields;
  model.tokenizer_ = tokenizer;
  model.n_docs_ = corpus.documents().size();
  std::uint64_t fp = 0xcbf29ce484222325ULL;
  auto mix = [&fp](std::uint64_t h) {
    fp ^= h;
    fp *= 0x100000001b3ULL;
  };
  for (const auto& doc : corpus.documents()) {
    mix(stable_hash(doc.doc_id));
    std::unordered_set<std::string> seen;
    for (auto& tok : model.field_tokens(doc)) {
      mix(stable_hash(tok));
      seen.insert(std::move(tok));
    }
    for (const auto& term : seen) ++model.doc_freq_[term];
  }
  mix(model.n_docs_);
  mix((fields.title ? 1 : 0) | (fields.abstract_text ? 2 : 0) |
      (fields.introduction ? 4 : 0) | (fields.body ? 8 : 0));
  model.fingerprint_ = fp;
  return model;
}

std::uint64_t TfidfModel::doc_freq(const std::string& term) const {
  auto it = doc_freq_.find(term);
  return it == doc_freq_.end() ? 0 : it->second;
}

double TfidfModel::idf(const std::string& term) const {
  auto it = doc_freq_.find(term);
  // Terms unseen at fit time are treated as df = 1.
  const double df = it == doc_freq_.end() ? 1.0 : static_cast<double>(it->second);
  return std::log(static_cast<double>(n_docs_) / df);
}

double TfidfModel::score(const std::string& term, std::uint64_t tf) const {
  return static_cast<double>(tf) * idf(term);
}

std::vector<TermScore> TfidfModel::score_terms(
    const std::vector<std::string>& tokens) const {
  std::unordered_map<std::string, std::uint64_t> tf;
  for (const auto& tok : tokens) ++tf[tok];
  std::vector<TermScore> out;
  out.reserve(tf.size());
  for (const auto& [term, count] : tf) out.push_back({term, score(term, count)});
  std::sort(out.begin(), out.end(), [](const TermScore& a, const TermScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.term < b.term;
  });
  return out;
}

std::vector<TermScore> TfidfModel::score_terms(const Document& doc) const {
  return score_terms(field_tokens(doc));
}

void TfidfModel::save(const std::string& path) const {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["n_docs"] = n_docs_;
  j["fingerprint"] = fingerprint_;
  j["fields"] = {{"title", fields_.title},
                 {"abstract", fields_.abstract_text},
                 {"introduction", fields_.introduction},
                 {"body", fields_.body}};
  j["lowercase"] = tokenizer_.lowercase;
  std::vector<std::pair<std::string, std::uint64_t>> sorted(doc_freq_.begin(),
                                                            doc_freq_.end());
  std::sort(sorted.begin(), sorted.end());
  nlohmann::ordered_json df = nlohmann::ordered_json::object();
  for (const auto& [term, count] : sorted) df[term] = count;
  j["df"] = std::move(df);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write tf-idf model to " + path);
  out << j.dump() << "\n";
}

TfidfModel TfidfModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read tf-idf model from " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid tf-idf model file " + path + ": " + e.what());
  }
  if (!j.contains("version") || j["version"].get<int>() != 1)
    throw DataError("unsupported tf-idf model version in " + path);
  TfidfModel model;
  model.n_docs_ = j.at("n_docs").get<std::uint64_t>();
  model.fingerprint_ = j.at("fingerprint").get<std::uint64_t>();
  const auto& f = j.at("fields");
  model.fields_.title = f.at("title").get<bool>();
  model.fields_.abstract_text = f.at("abstract").get<bool>();
  model.fields_.introduction = f.at("introduction").get<bool>();
  model.fields_.body = f.at("body").get<bool>();
  model.tokenizer_.lowercase = j.value("lowercase", true);
  for (const auto& [term, count] : j.at("df").items())
    model.doc_freq_[term] = count.get<std::uint64_t>();
  return model;
}

// --- gestalt similarity ----------------------------------------------------

namespace {

// Longest matching block within a[alo,ahi) x b[blo,bhi); on ties the block
// starting earliest in a wins, then earliest in b.
struct BlockMatcher {
  std::string_view a, b;
  std::array<std::vector<int>, 256> b2j;

  BlockMatcher(std::string_view a_, std::string_view b_) : a(a_), b(b_) {
    for (int j = 0; j < static_cast<int>(b.size()); ++j)
      b2j[static_cast<unsigned char>(b[j])].push_back(j);
  }

  struct Block {
    int i, j, size;
  };

  Block longest(int alo, int ahi, int blo, int bhi) const {
    Block best{alo, blo, 0};
    std::unordered_map<int, int> j2len;
    for (int i = alo; i < ahi; ++i) {
      std::unordered_map<int, int> row;
      for (int j : b2j[static_cast<unsigned char>(a[i])]) {
        if (j < blo) continue;
        if (j >= bhi) break;
        auto it = j2len.find(j - 1);
        int k = (it == j2len.end() ? 0 : it->second) + 1;
        row[j] = k;
        if (k > best.size) best = {i - k + 1, j - k + 1, k};
      }
      j2len.swap(row);
    }
    return best;
  }
};

}  // namespace

double gestalt_ratio(std::string_view a_raw, std::string_view b_raw) {
  const std::string a = ascii_lower(a_raw);
  const std::string b = ascii_lower(b_raw);
  const std::size_t total = a.size() + b.size();
  if (total == 0) return 1.0;

  BlockMatcher m(a, b);
  long long matched = 0;
  std::vector<std::array<int, 4>> stack{
      {0, static_cast<int>(a.size()), 0, static_cast<int>(b.size())}};
  while (!stack.empty()) {
    auto [alo, ahi, blo, bhi] = stack.back();
    stack.pop_back();
    auto block = m.longest(alo, ahi, blo, bhi);
    if (block.size == 0) continue;
    matched += block.size;
    stack.push_back({alo, block.i, blo, block.j});
    stack.push_back({block.i + block.size, ahi, block.j + block.size, bhi});
  }
  return 2.0 * static_cast<double>(matched) / static_cast<double>(total);
}

}  // namespace citex
