#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "citex/context.hpp"
#include "citex/errors.hpp"
#include "citex/metrics.hpp"
#include "citex/synth.hpp"
#include "helpers.hpp"

using namespace citex;
using testutil::make_doc;

namespace {

const Tokenizer tok;

ContextSpec small_spec() {
  ContextSpec spec;
  spec.principal_budget = 450;
  spec.cited_budget = 450;
  spec.target_budget = 100;
  return spec;
}

std::string long_text(std::size_t words, const std::string& stem) {
  std::string out;
  for (std::size_t i = 0; i < words; ++i)
    out += stem + std::to_string(i) + " ";
  return out;
}

ExplanationInstance instance_with_target(std::vector<std::string> target) {
  ExplanationInstance inst;
  inst.principal_id = "p";
  inst.cited_id = "c";
  inst.target = std::move(target);
  return inst;
}

std::size_t count_token(const std::vector<std::string>& tokens,
                        const std::string& t) {
  return std::count(tokens.begin(), tokens.end(), t);
}

}  // namespace

TEST_SUITE("context") {

TEST_CASE("special tokens must be distinct") {
  SpecialTokens toks;
  CHECK_NOTHROW(toks.validate());
  toks.sep_tfidf = toks.sep_entity;
  CHECK_THROWS_AS(toks.validate(), UsageError);
}

TEST_CASE("principal view takes a budgeted prefix") {
  auto doc = make_doc("p", "one two three. four five.");
  auto inst = instance_with_target({"unrelated", "target"});
  auto spec = small_spec();
  auto view = build_principal_view(doc, inst, spec, tok);
  CHECK(view == std::vector<std::string>{"one", "two", "three", ".", "four",
                                         "five", "."});

  auto doc600 = make_doc("p", "");
  doc600.introduction = long_text(600, "w");
  spec.principal_view = PrincipalView::introduction;
  auto intro = build_principal_view(doc600, inst, spec, tok);
  CHECK(intro.size() == 450);
  CHECK(intro[0] == "w0");
  CHECK(intro[449] == "w449");
}

TEST_CASE("principal view removes the target sentence") {
  std::string target_sentence = "we follow [CITE:c] closely here.";
  auto doc = make_doc("p", "first part. " + target_sentence + " last part.");
  auto inst =
      instance_with_target(tok.tokenize(mask_citations(target_sentence)));
  auto spec = small_spec();
  auto view = build_principal_view(doc, inst, spec, tok);
  CHECK(view == std::vector<std::string>{"first", "part", ".", "last", "part",
                                         "."});
  // A truncated target still matches by prefix.
  std::string long_sentence = "[CITE:c] " + long_text(150, "t");
  auto doc2 = make_doc("p", "lead in. " + long_sentence + ". tail out.");
  auto target2 = tok.tokenize(mask_citations(long_sentence));
  target2.resize(100);
  auto view2 =
      build_principal_view(doc2, instance_with_target(target2), spec, tok);
  for (const auto& t : view2) CHECK(t != "t0");
}

TEST_CASE("principal view errors on a missing field") {
  auto doc = make_doc("p", "has abstract only");
  auto spec = small_spec();
  spec.principal_view = PrincipalView::introduction;
  auto inst = instance_with_target({"x"});
  CHECK_THROWS_WITH_AS(build_principal_view(doc, inst, spec, tok),
                       doctest::Contains("introduction"), DataError);
}

TEST_CASE("cited sentence views") {
  auto doc = make_doc("c", "cited abstract words here.");
  doc.introduction = "cited intro words.";
  auto spec = small_spec();
  spec.cited_view = CitedView::abstract_text;
  CHECK(build_cited_sentences(doc, spec, tok).front() == "cited");
  spec.cited_view = CitedView::introduction;
  CHECK(build_cited_sentences(doc, spec, tok)[1] == "intro");
}

TEST_CASE("sampled view excludes citing sentences and is seeded") {
  auto doc = make_doc("c", "first clean sentence. cites [CITE:x] here.");
  doc.body_paragraphs = {"second clean one. also cites [CITE:y] now.",
                         "third clean sentence."};
  auto spec = small_spec();
  spec.cited_view = CitedView::sampled;
  spec.sample_seed = 5;
  auto a = build_cited_sentences(doc, spec, tok);
  auto b = build_cited_sentences(doc, spec, tok);
  CHECK(a == b);
  for (const auto& t : a) CHECK(t != "⟨cite⟩");

  // All three clean sentences fit the budget; document order is kept.
  auto text = a;
  CHECK(text == tok.tokenize(
                    "first clean sentence. second clean one. third clean "
                    "sentence."));

  spec.sample_seed = 6;
  // Different seed still deterministic.
  CHECK(build_cited_sentences(doc, spec, tok) ==
        build_cited_sentences(doc, spec, tok));

  auto all_citing = make_doc("c", "cites [CITE:x]. also [CITE:y].");
  CHECK_THROWS_AS(build_cited_sentences(all_citing, spec, tok), DataError);
}

TEST_CASE("sampled view respects the budget at sentence boundaries") {
  auto doc = make_doc("c", "");
  std::string body;
  for (int s = 0; s < 40; ++s) body += long_text(10, "s" + std::to_string(s)) + ". ";
  doc.body_paragraphs = {body};
  auto spec = small_spec();
  spec.cited_view = CitedView::sampled;
  spec.cited_budget = 47;
  auto out = build_cited_sentences(doc, spec, tok);
  CHECK(out.size() <= 47);
}

TEST_CASE("tfidf view interleaves the separator") {
  Corpus corpus;
  corpus.add_document(make_doc("d1", "a a b"));
  corpus.add_document(make_doc("d2", "b c"));
  corpus.add_document(make_doc("d3", "c"));
  corpus.finalize();
  auto model =
      TfidfModel::fit(corpus, FieldSelector{false, true, false, false}, tok);
  SpecialTokens toks;
  auto spec = small_spec();

  auto out = build_cited_tfidf(corpus.doc("d1"), model, spec, toks);
  CHECK(out == std::vector<std::string>{"a", toks.sep_tfidf, "b"});

  spec.term_list_size = 1;
  CHECK(build_cited_tfidf(corpus.doc("d1"), model, spec, toks) ==
        std::vector<std::string>{"a"});

  // Budget cuts at a term boundary.
  spec.term_list_size = 100;
  spec.cited_budget = 2;
  CHECK(build_cited_tfidf(corpus.doc("d1"), model, spec, toks) ==
        std::vector<std::string>{"a"});
}

TEST_CASE("entity view ranks by mean token tf-idf with backfill") {
  Corpus corpus;
  auto d1 = make_doc("d1", "alpha alpha beta gamma");
  d1.entity_annotations = {{"beta gamma", "alpha alpha"}};
  corpus.add_document(d1);
  corpus.add_document(make_doc("d2", "beta delta"));
  corpus.add_document(make_doc("d3", "delta"));
  corpus.finalize();
  auto model =
      TfidfModel::fit(corpus, FieldSelector{false, true, false, false}, tok);
  SpecialTokens toks;
  auto spec = small_spec();

  // Hand scores over d1 (N=3): tf(alpha)=2 df=1 -> 2 ln3 = 2.197;
  // tf(beta)=1 df=2 -> ln1.5 = 0.405; tf(gamma)=1 df=1 -> ln3 = 1.0986.
  // entity "beta gamma" mean = (0.405+1.0986)/2 = 0.752;
  // entity "alpha alpha" mean = 2.197.
  auto out = build_cited_entities(corpus.doc("d1"), model, spec, toks, tok);
  REQUIRE(out.size() >= 5);
  CHECK(out[0] == "alpha");
  CHECK(out[1] == "alpha");
  CHECK(out[2] == toks.sep_entity);
  CHECK(out[3] == "beta");
  CHECK(out[4] == "gamma");
  // term_list_size=100, n=2 entities: backfill skips covered unigrams
  // (alpha, beta, gamma all appear inside entities) so nothing follows.
  CHECK(out.size() == 5);

  // With a smaller cover, unigrams flow in after the tf separator.
  auto d4 = make_doc("d4", "zeta eta theta");
  d4.entity_annotations = {{"zeta"}};
  auto out4 = build_cited_entities(d4, model, spec, toks, tok);
  REQUIRE(out4.size() >= 3);
  CHECK(out4[0] == "zeta");
  CHECK(out4[1] == toks.sep_tfidf);
  // eta/theta backfill in tf-idf order.
  CHECK(count_token(out4, "eta") == 1);
  CHECK(count_token(out4, "theta") == 1);
}

TEST_CASE("entity view degrades to the tfidf list") {
  Corpus corpus;
  corpus.add_document(make_doc("d1", "a a b"));
  corpus.add_document(make_doc("d2", "b c"));
  corpus.add_document(make_doc("d3", "c"));
  corpus.finalize();
  auto model =
      TfidfModel::fit(corpus, FieldSelector{false, true, false, false}, tok);
  SpecialTokens toks;
  auto spec = small_spec();

  auto none = make_doc("dx", "a a b");  // no annotations at all
  CHECK(build_cited_entities(none, model, spec, toks, tok) ==
        build_cited_tfidf(none, model, spec, toks));

  auto empty = make_doc("dy", "a a b");
  empty.entity_annotations = std::vector<std::string>{};
  CHECK(build_cited_entities(empty, model, spec, toks, tok) ==
        build_cited_tfidf(empty, model, spec, toks));
}

TEST_CASE("entity view emits no backfill when entities fill the list") {
  Corpus corpus;
  corpus.add_document(make_doc("d1", "a b c d e"));
  corpus.finalize();
  auto model =
      TfidfModel::fit(corpus, FieldSelector{false, true, false, false}, tok);
  SpecialTokens toks;
  auto spec = small_spec();
  spec.term_list_size = 2;
  auto doc = make_doc("dz", "a b c d e");
  doc.entity_annotations = {{"a", "b"}};
  auto out = build_cited_entities(doc, model, spec, toks, tok);
  CHECK(count_token(out, toks.sep_tfidf) == 0);
  CHECK(out.size() == 3);  // e1 sep e2
}

TEST_CASE("emitted entity surfaces come from the annotations") {
  SynthSpec sspec;
  sspec.n_docs = 60;
  Corpus corpus = make_synthetic_corpus(sspec);
  auto model = TfidfModel::fit(corpus, FieldSelector{}, tok);
  SpecialTokens toks;
  auto spec = small_spec();
  for (const auto& doc : corpus.documents()) {
    auto out = build_cited_entities(doc, model, spec, toks, tok);
    // Reconstruct surfaces between separators up to the tf section.
    std::vector<std::string> annotated;
    for (const auto& s : *doc.entity_annotations) {
      auto t = tok.tokenize(s);
      std::string joined;
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) joined += ' ';
        joined += t[i];
      }
      annotated.push_back(joined);
    }
    std::string current;
    for (const auto& token : out) {
      if (token == toks.sep_tfidf) break;
      if (token == toks.sep_entity) {
        CHECK(std::find(annotated.begin(), annotated.end(), current) !=
              annotated.end());
        current.clear();
        continue;
      }
      if (!current.empty()) current += ' ';
      current += token;
    }
  }
}

TEST_CASE("assemble layout and padding") {
  SpecialTokens toks;
  ContextSpec spec;
  spec.principal_budget = 4;
  spec.cited_budget = 3;
  spec.target_budget = 2;

  auto ctx = assemble({"p1", "p2"}, {"c1"}, std::nullopt, toks, spec);
  CHECK(ctx.tokens.size() == 4 + 3 + 2 + 2);
  CHECK(ctx.tokens[2] == toks.sep_principal);
  CHECK(count_token(ctx.tokens, toks.sep_principal) == 1);
  CHECK(count_token(ctx.tokens, toks.sep_target) == 0);
  CHECK(count_token(ctx.tokens, toks.pad) == 7);
  CHECK(ctx.principal_len == 2);
  CHECK(ctx.cited_len == 1);
  CHECK(ctx.target_len == 0);

  auto full = assemble({"a", "b", "c", "d"}, {"e", "f", "g"},
                       std::vector<std::string>{"y1", "y2"}, toks, spec);
  CHECK(full.tokens.size() == 11);
  CHECK(count_token(full.tokens, toks.pad) == 0);
  CHECK(full.tokens[4] == toks.sep_principal);
  CHECK(full.tokens[8] == toks.sep_target);

  CHECK_THROWS_AS(
      assemble({"a", "b", "c", "d", "e"}, {}, std::nullopt, toks, spec),
      DataError);
  CHECK_THROWS_AS(assemble({}, {}, std::vector<std::string>{"1", "2", "3"},
                           toks, spec),
                  DataError);
}

TEST_CASE("contexts round trip through jsonl") {
  SynthSpec sspec;
  sspec.n_docs = 60;
  Corpus corpus = make_synthetic_corpus(sspec);
  auto plan = make_split_plan(corpus, 5, 5, 3);
  auto instances = build_splits(corpus, plan, tok);
  std::vector<ExplanationInstance> test;
  for (const auto& inst : instances)
    if (inst.split == Split::test) test.push_back(inst);
  REQUIRE(!test.empty());

  auto model = TfidfModel::fit(corpus, FieldSelector{}, tok);
  ContextSpec spec;
  spec.principal_view = PrincipalView::introduction;
  spec.cited_view = CitedView::entities;
  SpecialTokens toks;
  auto contexts =
      build_contexts(corpus, test, &model, spec, toks, tok, true);

  testutil::TempPath path("ctx");
  write_contexts(contexts, path.str());
  auto loaded = read_contexts(path.str());
  REQUIRE(loaded.size() == contexts.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].instance_ref == contexts[i].instance_ref);
    CHECK(loaded[i].context.tokens == contexts[i].context.tokens);
    CHECK(loaded[i].context.principal_len == contexts[i].context.principal_len);
    CHECK(loaded[i].context.cited_len == contexts[i].context.cited_len);
    CHECK(loaded[i].context.target_len == contexts[i].context.target_len);
  }
}

TEST_CASE("batch building obeys budgets and separator integrity") {
  SynthSpec sspec;
  sspec.n_docs = 100;
  Corpus corpus = make_synthetic_corpus(sspec);
  auto plan = make_split_plan(corpus, 8, 8, 3);
  auto instances = build_splits(corpus, plan, tok);
  std::vector<ExplanationInstance> eval;
  for (const auto& inst : instances)
    if (inst.split != Split::train) eval.push_back(inst);
  REQUIRE(!eval.empty());

  auto model = TfidfModel::fit(corpus, FieldSelector{}, tok);
  SpecialTokens toks;
  for (auto pview : {PrincipalView::abstract_text, PrincipalView::introduction}) {
    for (auto cview :
         {CitedView::abstract_text, CitedView::introduction, CitedView::sampled,
          CitedView::tfidf, CitedView::entities}) {
      ContextSpec spec;
      spec.principal_view = pview;
      spec.cited_view = cview;
      auto contexts =
          build_contexts(corpus, eval, &model, spec, toks, tok, true);
      auto serial = build_contexts(corpus, eval, &model, spec, toks, tok,
                                   true, Exec::serial);
      REQUIRE(contexts.size() == serial.size());
      for (std::size_t i = 0; i < contexts.size(); ++i) {
        const auto& c = contexts[i].context;
        CHECK(c.tokens == serial[i].context.tokens);
        CHECK(c.principal_len <= spec.principal_budget);
        CHECK(c.cited_len <= spec.cited_budget);
        CHECK(c.target_len <= spec.target_budget);
        CHECK(count_token(c.tokens, toks.sep_principal) == 1);
        CHECK(count_token(c.tokens, toks.sep_target) == 1);
        CHECK(c.tokens.size() == spec.principal_budget + spec.cited_budget +
                                     spec.target_budget + 2);
      }
    }
  }
}

TEST_CASE("nested contexts never lose gold overlap") {
  // The entity view's token set extends the tfidf view's terms for the
  // same document, so overlap with any gold sentence is monotone.
  Corpus corpus;
  auto d = make_doc("d1", "alpha beta gamma delta alpha");
  d.entity_annotations = {{"alpha beta"}};
  corpus.add_document(d);
  corpus.add_document(make_doc("d2", "beta epsilon"));
  corpus.finalize();
  auto model =
      TfidfModel::fit(corpus, FieldSelector{false, true, false, false}, tok);
  SpecialTokens toks;
  auto spec = small_spec();
  auto tfidf = build_cited_tfidf(corpus.doc("d1"), model, spec, toks);
  auto entities = build_cited_entities(corpus.doc("d1"), model, spec, toks, tok);
  auto superset = entities;
  superset.insert(superset.end(), tfidf.begin(), tfidf.end());
  for (auto gold : {tok.tokenize("alpha beta"), tok.tokenize("gamma zeta"),
                    tok.tokenize("nothing shared")}) {
    CHECK(token_overlap(superset, gold) >= token_overlap(tfidf, gold));
  }
}

}
