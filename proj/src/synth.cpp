#include "citex/synth.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "citex/errors.hpp"
#include "citex/rng.hpp"

namespace citex {

namespace {

const char* kConsonants[] = {"b", "d", "f", "g", "k", "l", "m", "n",
                             "p", "r", "s", "t", "v", "z", "ch", "st"};
const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "or"};

std::string make_word(Rng& rng) {
  std::size_t syllables = 2 + rng.bounded(3);
  std::string w;
  for (std::size_t s = 0; s < syllables; ++s) {
    w += kConsonants[rng.bounded(std::size(kConsonants))];
    w += kVowels[rng.bounded(std::size(kVowels))];
  }
  return w;
}

struct Vocabulary {
  std::vector<std::vector<std::string>> topic_words;
  std::vector<std::string> common_words;

  Vocabulary(std::size_t n_topics, std::uint64_t seed) {
    Rng rng(seed ^ 0x5eedf00dULL);
    topic_words.resize(n_topics);
    for (auto& pool : topic_words) {
      for (std::size_t i = 0; i < 60; ++i) pool.push_back(make_word(rng));
    }
    for (std::size_t i = 0; i < 150; ++i) common_words.push_back(make_word(rng));
  }

  std::string pick(Rng& rng, std::size_t topic) const {
    if (rng.bounded(10) < 6) {
      const auto& pool = topic_words[topic];
      return pool[rng.bounded(pool.size())];
    }
    return common_words[rng.bounded(common_words.size())];
  }
};

std::string make_sentence(Rng& rng, const Vocabulary& vocab,
                          std::size_t topic, std::size_t min_words = 8,
                          std::size_t extra = 7) {
  std::size_t words = min_words + rng.bounded(extra);
  std::string s;
  for (std::size_t w = 0; w < words; ++w) {
    if (w) s += ' ';
    s += vocab.pick(rng, topic);
  }
  s += " .";
  return s;
}

std::string make_paragraph(Rng& rng, const Vocabulary& vocab,
                           std::size_t topic, std::size_t sentences) {
  std::string p;
  for (std::size_t s = 0; s < sentences; ++s) {
    if (s) p += ' ';
    p += make_sentence(rng, vocab, topic);
  }
  return p;
}

std::string doc_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "d%04zu", i);
  return buf;
}

// One JSON record per document, citation records embedded raw; both the
// in-memory corpus and the corpus.jsonl file derive from these so loading
// the file reproduces the generated corpus exactly, drop counters included.
std::vector<nlohmann::ordered_json> synth_records(const SynthSpec& spec) {
  if (spec.n_docs < 4) throw UsageError("synthetic corpus needs >= 4 docs");
  Vocabulary vocab(spec.n_topics, spec.seed);
  Rng rng(spec.seed);
  std::vector<nlohmann::ordered_json> records;
  records.reserve(spec.n_docs);
  for (std::size_t i = 0; i < spec.n_docs; ++i) {
    const std::size_t topic = i % spec.n_topics;
    nlohmann::ordered_json j;
    j["doc_id"] = doc_name(i);
    std::string title = make_sentence(rng, vocab, topic, 3, 3);
    title.resize(title.size() - 2);  // drop the " ." tail
    j["title"] = title;
    j["abstract"] = make_paragraph(rng, vocab, topic, 3 + rng.bounded(3));
    j["introduction"] = make_paragraph(rng, vocab, topic, 4 + rng.bounded(4));
    std::vector<std::string> body;
    const std::size_t paras = 2 + rng.bounded(3);
    for (std::size_t p = 0; p < paras; ++p)
      body.push_back(make_paragraph(rng, vocab, topic, 3 + rng.bounded(3)));
    j["body"] = body;

    std::vector<std::string> entities;
    const std::size_t n_entities = 2 + rng.bounded(5);
    for (std::size_t e = 0; e < n_entities; ++e) {
      std::size_t len = 1 + rng.bounded(3);
      std::string surface;
      for (std::size_t t = 0; t < len; ++t) {
        if (t) surface += ' ';
        surface += vocab.topic_words[topic][rng.bounded(
            vocab.topic_words[topic].size())];
      }
      entities.push_back(std::move(surface));
    }
    j["entities"] = entities;
    j["acl"] = topic == 0;

    auto citations = nlohmann::ordered_json::array();
    auto cite = [&](const std::string& cited, const std::string& sentence,
                    int para, int sent) {
      citations.push_back({{"cited_id", cited},
                           {"sentence", sentence},
                           {"para", para},
                           {"sent", sent}});
    };
    if (i > 0) {
      const std::size_t n_cites = 1 + rng.bounded(spec.max_citations);
      for (std::size_t c = 0; c < n_cites; ++c) {
        std::size_t target;
        if (rng.bounded(10) < 7 && i > spec.n_topics) {
          std::size_t hops = 1 + rng.bounded((i - 1) / spec.n_topics + 1);
          target = i >= hops * spec.n_topics ? i - hops * spec.n_topics
                                             : i % spec.n_topics;
          if (target == i) target = i - 1;
        } else {
          target = rng.bounded(i);
        }
        std::string cited = doc_name(target);
        std::string sentence = "our work builds on [CITE:" + cited +
                               "] for " + vocab.pick(rng, topic) + " " +
                               vocab.pick(rng, topic) + " " +
                               make_sentence(rng, vocab, topic, 4, 5);
        cite(cited, sentence, static_cast<int>(c),
             static_cast<int>(rng.bounded(4)));
      }
      if (spec.unresolved_every && i % spec.unresolved_every == 0)
        cite("missing-" + std::to_string(i), "see [CITE:missing] for details .",
             9, 0);
      if (spec.multi_every && i % spec.multi_every == 0) {
        std::string other = doc_name(rng.bounded(i));
        cite(other,
             "both [CITE:" + other + "] and [CITE:" + doc_name(i - 1) +
                 "] study this .",
             9, 1);
      }
      if (spec.self_every && i % spec.self_every == 0)
        cite(doc_name(i), "as we argued in [CITE:" + doc_name(i) + "] .", 9,
             2);
    }
    j["citations"] = std::move(citations);
    records.push_back(std::move(j));
  }
  return records;
}

}  // namespace

Corpus make_synthetic_corpus(const SynthSpec& spec) {
  Corpus corpus;
  for (const auto& j : synth_records(spec)) {
    Document doc;
    doc.doc_id = j.at("doc_id").get<std::string>();
    doc.title = j.at("title").get<std::string>();
    doc.abstract_text = j.at("abstract").get<std::string>();
    doc.introduction = j.at("introduction").get<std::string>();
    doc.body_paragraphs = j.at("body").get<std::vector<std::string>>();
    doc.entity_annotations = j.at("entities").get<std::vector<std::string>>();
    doc.acl = j.at("acl").get<bool>();
    const std::string citing = doc.doc_id;
    corpus.add_document(std::move(doc));
    for (const auto& c : j.at("citations")) {
      corpus.add_citation({citing, c.at("cited_id").get<std::string>(),
                           c.at("sentence").get<std::string>(),
                           c.at("para").get<int>(), c.at("sent").get<int>()});
    }
  }
  corpus.finalize();
  return corpus;
}

void write_corpus_jsonl(const SynthSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus to " + path);
  for (const auto& j : synth_records(spec)) out << j.dump() << "\n";
}

EmbeddingStore make_synthetic_embeddings(const Corpus& corpus,
                                         const SynthSpec& spec,
                                         const Tokenizer& tokenizer) {
  EmbeddingStore store;
  for (const auto& doc : corpus.documents())
    store.add(doc.doc_id,
              test_embedder(doc, spec.embedding_dim, spec.seed, tokenizer),
              false);
  return store;
}

std::vector<CandidateSet> make_synthetic_candidates(
    const Corpus& corpus, const std::vector<ExplanationInstance>& instances,
    const SynthSpec& spec) {
  Vocabulary vocab(spec.n_topics, spec.seed);
  std::vector<CandidateSet> sets;
  sets.reserve(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    Rng rng(Rng::derive(spec.seed, 0xca11d1da7e5ULL + i));
    const Document& cited = corpus.doc(inst.cited_id);
    const auto& entities = cited.entity_annotations
                               ? *cited.entity_annotations
                               : std::vector<std::string>{};
    CandidateSet set;
    set.instance_ref = i;
    set.candidate_entities.emplace();
    for (std::size_t c = 0; c < spec.n_candidates; ++c) {
      // Candidate quality varies freely: tokens of the gold target survive
      // with a per-candidate keep rate, some are swapped for noise, and a
      // few candidates lead with cited-document entities.
      const double keep = 0.35 + 0.6 * rng.uniform();
      std::string text;
      std::vector<std::string> injected;
      if (!entities.empty() && rng.bounded(10) < 4) {
        const auto& surface = entities[rng.bounded(entities.size())];
        text += surface;
        text += ' ';
        injected.push_back(surface);
      }
      for (const auto& tok : inst.target) {
        if (rng.uniform() < keep) {
          text += tok;
          text += ' ';
        } else if (rng.bounded(4) == 0) {
          text += vocab.common_words[rng.bounded(vocab.common_words.size())];
          text += ' ';
        }
      }
      if (text.empty()) text = vocab.common_words[rng.bounded(20)] + " ";
      text.pop_back();
      set.candidates.push_back(std::move(text));
      set.candidate_entities->push_back(std::move(injected));
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

std::vector<Completion> make_synthetic_completions(
    const std::vector<ExplanationInstance>& instances, const SynthSpec& spec,
    std::size_t prefix_len) {
  std::vector<Completion> out;
  out.reserve(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    Rng rng(Rng::derive(spec.seed, 0xc0317101ULL + i));
    const auto& target = instances[i].target;
    Completion c;
    c.instance_ref = i;
    if (target.size() > prefix_len) {
      std::string text;
      for (std::size_t t = prefix_len; t < target.size(); ++t) {
        if (rng.bounded(12) == 0) continue;  // small token dropout
        if (!text.empty()) text += ' ';
        text += target[t];
      }
      c.completion = std::move(text);
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<JudgmentRecord> make_synthetic_judgments(
    const std::vector<ExplanationInstance>& instances,
    const std::vector<std::string>& systems, const SynthSpec& spec,
    std::size_t max_instances) {
  std::vector<JudgmentRecord> records;
  const std::size_t n = std::min(instances.size(), max_instances);
  const char* dims[] = {"correct", "specific", "plausible"};
  for (std::size_t s = 0; s < systems.size(); ++s) {
    Rng rng(Rng::derive(spec.seed, 0x10d6e5ULL + s));
    for (std::size_t i = 0; i < n; ++i) {
      const double latent = rng.uniform();
      for (const char* dim : dims) {
        JudgmentRecord rec;
        rec.instance_ref = i;
        rec.system = systems[s];
        rec.dimension = dimension_from_string(dim);
        const double roll = rng.uniform();
        if (roll < 0.05) {
          rec.verdict = Verdict::skip;
        } else {
          rec.verdict = (latent + 0.4 * rng.uniform() > 0.7) ? Verdict::yes
                                                             : Verdict::no;
        }
        records.push_back(std::move(rec));
      }
    }
  }
  return records;
}

void write_completions(const std::vector<Completion>& completions,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write completions to " + path);
  for (const auto& c : completions) {
    nlohmann::ordered_json j;
    j["instance"] = c.instance_ref;
    j["completion"] = c.completion;
    out << j.dump() << "\n";
  }
}

std::vector<Completion> read_completions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open completions file: " + path);
  std::vector<Completion> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      out.push_back({j.at("instance").get<std::size_t>(),
                     j.at("completion").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, line_no,
                       std::string("bad completion record: ") + e.what());
    }
  }
  return out;
}

void write_judgments(const std::vector<JudgmentRecord>& records,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write judgments to " + path);
  out << "instance,system,dimension,verdict\n";
  for (const auto& rec : records) {
    out << rec.instance_ref << ',' << rec.system << ','
        << to_string(rec.dimension) << ','
        << (rec.verdict == Verdict::yes   ? "yes"
            : rec.verdict == Verdict::no ? "no"
                                         : "skip")
        << "\n";
  }
}

}  // namespace citex
