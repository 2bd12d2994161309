// Exercises the installed binary: exit-code contract (0 success, 1 usage,
// 2 data) and byte-idempotent outputs. Needs CITEX_BIN, set by ctest.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "helpers.hpp"

namespace {

std::string binary() {
  const char* bin = std::getenv("CITEX_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "CITEX_BIN must point at the citex binary");
  return std::string("\"") + bin + "\"";
}

int run(const std::string& args) {
  int status = std::system((binary() + " " + args + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

struct Pipeline {
  testutil::TempPath dir{"cli"};
  std::string base;

  Pipeline() {
    std::filesystem::create_directories(dir.str());
    base = dir.str();
    REQUIRE(run("synth --out " + base + " --docs 100 --test 8 --val 8") == 0);
    REQUIRE(run("build-dataset --config " + base + "/config.json --out " +
                base + "/ds") == 0);
  }

  std::string cfg() const { return " --config " + base + "/config.json"; }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 1") {
  CHECK(run("no-such-command") == 1);
  CHECK(run("retrieve") == 1);  // missing required options
}

TEST_CASE("unknown view names exit 1") {
  Pipeline p;
  CHECK(run("build-context" + p.cfg() + " --instances " + p.base +
            "/ds/instances.jsonl --view bogus --out " + p.base + "/ctx") ==
        1);
  CHECK(run("build-context" + p.cfg() + " --instances " + p.base +
            "/ds/instances.jsonl --view 'intro x nowhere' --out " + p.base +
            "/ctx") == 1);
}

TEST_CASE("data errors exit 2") {
  testutil::TempPath dir("cli-data");
  std::filesystem::create_directories(dir.str());
  const std::string base = dir.str();
  {
    std::ofstream out(base + "/dup.jsonl");
    const char* line =
        "{\"doc_id\":\"same\",\"title\":\"t\",\"abstract\":\"a\","
        "\"introduction\":\"i\",\"body\":[]}\n";
    out << line << line;
  }
  CHECK(run("build-dataset --corpus " + base + "/dup.jsonl --out " + base +
            "/ds --test 1 --val 1") == 2);
  CHECK(run("build-dataset --corpus " + base + "/nonexistent.jsonl --out " +
            base + "/ds") == 2);
}

TEST_CASE("threshold outside (0,1] is rejected") {
  Pipeline p;
  CHECK(run("rerank" + p.cfg() + " --instances " + p.base +
            "/ds/instances.jsonl --threshold 1.01 --out " + p.base +
            "/rr.jsonl") == 1);
}

TEST_CASE("subcommands are byte-idempotent under a fixed seed") {
  Pipeline p;
  REQUIRE(run("build-dataset" + p.cfg() + " --out " + p.base + "/ds2") == 0);
  CHECK(testutil::slurp(p.base + "/ds/instances.jsonl") ==
        testutil::slurp(p.base + "/ds2/instances.jsonl"));
  CHECK(testutil::slurp(p.base + "/ds/stats.json") ==
        testutil::slurp(p.base + "/ds2/stats.json"));

  for (const char* out : {"/ir1.jsonl", "/ir2.jsonl"}) {
    REQUIRE(run("retrieve" + p.cfg() + " --instances " + p.base +
                "/ds/instances.jsonl --plan " + p.base +
                "/ds/plan.json --alpha 1 --beta 1 --out " + p.base + out) ==
            0);
  }
  std::string first = testutil::slurp(p.base + "/ir1.jsonl");
  CHECK(!first.empty());
  CHECK(first == testutil::slurp(p.base + "/ir2.jsonl"));

  // The serial reference path produces the same bytes as the OpenMP path.
  REQUIRE(run("--serial retrieve" + p.cfg() + " --instances " + p.base +
              "/ds/instances.jsonl --plan " + p.base +
              "/ds/plan.json --alpha 1 --beta 1 --out " + p.base +
              "/ir3.jsonl") == 0);
  CHECK(first == testutil::slurp(p.base + "/ir3.jsonl"));
}

TEST_CASE("alpha zero runs the no-source ablation") {
  Pipeline p;
  CHECK(run("retrieve" + p.cfg() + " --instances " + p.base +
            "/ds/instances.jsonl --plan " + p.base +
            "/ds/plan.json --alpha 0 --beta 1 --out " + p.base +
            "/ir0.jsonl") == 0);
  CHECK(!testutil::slurp(p.base + "/ir0.jsonl").empty());
}

TEST_CASE("synth regenerates byte-identical fixtures") {
  testutil::TempPath d1("cli-synth1"), d2("cli-synth2");
  for (const auto* d : {&d1, &d2}) {
    std::filesystem::create_directories(d->str());
    REQUIRE(run("synth --out " + d->str() + " --docs 60 --test 4 --val 4") ==
            0);
  }
  for (const char* name : {"/corpus.jsonl", "/embeddings.tsv",
                           "/candidates.jsonl", "/completions.jsonl",
                           "/judgments.csv"}) {
    CHECK(testutil::slurp(d1.str() + name) == testutil::slurp(d2.str() + name));
  }
}

TEST_CASE("CITEX_CONFIG supplies the default config path") {
  Pipeline p;
  int status = std::system(("CITEX_CONFIG=" + p.base + "/config.json " +
                            binary() + " build-dataset --out " + p.base +
                            "/ds-env > /dev/null 2>&1")
                               .c_str());
  CHECK(WEXITSTATUS(status) == 0);
  CHECK(testutil::slurp(p.base + "/ds-env/instances.jsonl") ==
        testutil::slurp(p.base + "/ds/instances.jsonl"));
}

}
