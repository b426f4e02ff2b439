#include <gtest/gtest.h>

#include <map>
#include <memory>

#include "test_util.hpp"

using namespace ectx;

namespace {

std::shared_ptr<MockCorpus> small_corpus() {
  auto corpus = std::make_shared<MockCorpus>(MockCorpus::load_jsonl(
      test::source_path("tests/fixtures/corpus_small.jsonl")));
  return corpus;
}

// brute-force term-match oracle: count query-term occurrences per document
std::map<std::string, int> oracle_scores(const MockCorpus& corpus,
                                         const std::vector<std::string>& ids,
                                         const std::string& term) {
  std::map<std::string, int> scores;
  for (const auto& id : ids) {
    const MockDoc* doc = corpus.find(id);
    std::string haystack = doc->title + " " + doc->text;
    for (auto& c : haystack) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    int count = 0;
    std::size_t pos = 0;
    while ((pos = haystack.find(term, pos)) != std::string::npos) {
      ++count;
      pos += term.size();
    }
    if (count > 0) scores[id] = count;
  }
  return scores;
}

}  // namespace

TEST(Truncate, CapWithWholeMarker) {
  const std::string text(500, 'x');
  const std::string out = truncate_bytes(text, 100);
  const std::string marker = "\n[truncated at 100 bytes]";
  ASSERT_GT(out.size(), 100u);
  EXPECT_EQ(out.size(), 100u + marker.size());
  EXPECT_EQ(out.substr(100), marker);
  EXPECT_EQ(truncate_bytes("short", 100), "short");
  EXPECT_EQ(truncate_bytes(text, 0), text);  // 0 = uncapped
}

TEST(Registry, UnknownToolNamesValidTools) {
  ToolRegistry registry;
  register_mock_tools(registry, small_corpus());
  const auto result = registry.execute({"searchh", {{"query", "x"}}});
  EXPECT_FALSE(result.ok);
  EXPECT_NE(result.text.find("unknown tool 'searchh'"), std::string::npos);
  EXPECT_NE(result.text.find("search"), std::string::npos);
  EXPECT_NE(result.text.find("fetch"), std::string::npos);
  EXPECT_NE(result.text.find("final_answer"), std::string::npos);
}

TEST(Registry, EveryCallYieldsAResult) {
  ToolRegistry registry;
  registry.register_tool("boom", "always throws", [](const nlohmann::json&) -> ToolResult {
    throw std::runtime_error("kaput");
  });
  const auto result = registry.execute({"boom", {}});
  EXPECT_FALSE(result.ok);
  EXPECT_NE(result.text.find("kaput"), std::string::npos);
}

TEST(Registry, FinalAnswerBuiltin) {
  ToolRegistry registry;
  EXPECT_TRUE(registry.has(kFinalAnswerTool));
  auto result = registry.execute({kFinalAnswerTool, {{"answer", "42"}}});
  EXPECT_TRUE(result.ok);
  result = registry.execute({kFinalAnswerTool, {}});
  EXPECT_FALSE(result.ok);
}

TEST(Registry, TokenEstimateFilled) {
  ToolRegistry registry(make_estimator("bytes"));
  register_mock_tools(registry, small_corpus());
  const auto result = registry.execute({"fetch", {{"id", "doc-beta"}}});
  EXPECT_TRUE(result.ok);
  EXPECT_EQ(result.token_estimate, result.text.size());
}

TEST(MockSearch, SingleMatchRanksFirst) {
  auto corpus = small_corpus();
  const auto hits = corpus->search("alpha", 5);
  ASSERT_EQ(hits.size(), 1u);  // brute-force oracle: only doc-alpha matches
  EXPECT_EQ(hits[0].id, "doc-alpha");
  const auto oracle =
      oracle_scores(*corpus, {"doc-alpha", "doc-beta", "doc-gamma"}, "alpha");
  ASSERT_EQ(oracle.size(), 1u);
  EXPECT_EQ(oracle.begin()->first, "doc-alpha");
}

TEST(MockSearch, RankingMatchesOracleOrdering) {
  auto corpus = small_corpus();
  const auto hits = corpus->search("vents", 5);
  const auto oracle =
      oracle_scores(*corpus, {"doc-alpha", "doc-beta", "doc-gamma"}, "vents");
  ASSERT_EQ(hits.size(), oracle.size());
  for (std::size_t i = 1; i < hits.size(); ++i) {
    EXPECT_GE(oracle.at(hits[i - 1].id), oracle.at(hits[i].id));
  }
}

TEST(MockSearch, NoResults) {
  ToolRegistry registry;
  register_mock_tools(registry, small_corpus());
  const auto result = registry.execute({"search", {{"query", "zzz-nothing"}}});
  EXPECT_TRUE(result.ok);
  EXPECT_NE(result.text.find("no results"), std::string::npos);
}

TEST(MockFetch, DeterministicPadding) {
  auto corpus = small_corpus();
  corpus->set_padding(4000, 7);
  ToolRegistry registry;
  register_mock_tools(registry, std::shared_ptr<const MockCorpus>(corpus));
  const auto a = registry.execute({"fetch", {{"id", "doc-alpha"}}});
  const auto b = registry.execute({"fetch", {{"id", "doc-alpha"}}});
  EXPECT_EQ(a.text, b.text);
  EXPECT_GE(a.text.size(), 4000u);
  // different docs get different filler
  const auto c = registry.execute({"fetch", {{"id", "doc-beta"}}});
  EXPECT_NE(a.text, c.text);
  // a different seed changes the filler
  auto corpus2 = small_corpus();
  corpus2->set_padding(4000, 8);
  ToolRegistry registry2;
  register_mock_tools(registry2, std::shared_ptr<const MockCorpus>(corpus2));
  EXPECT_NE(registry2.execute({"fetch", {{"id", "doc-alpha"}}}).text, a.text);
}

TEST(MockFetch, UnknownIdAndTruncation) {
  auto corpus = small_corpus();
  corpus->set_padding(9000, 1);
  ToolRegistry registry;
  register_mock_tools(registry, std::shared_ptr<const MockCorpus>(corpus), 512);
  const auto missing = registry.execute({"fetch", {{"id", "doc-zeta"}}});
  EXPECT_FALSE(missing.ok);
  EXPECT_NE(missing.text.find("doc-zeta"), std::string::npos);
  const auto capped = registry.execute({"fetch", {{"id", "doc-alpha"}}});
  EXPECT_TRUE(capped.ok);
  const std::string marker = "\n[truncated at 512 bytes]";
  EXPECT_EQ(capped.text.size(), 512u + marker.size());
  EXPECT_EQ(capped.text.substr(512), marker);
}

TEST(MockSearch, BadArguments) {
  ToolRegistry registry;
  register_mock_tools(registry, small_corpus());
  EXPECT_FALSE(registry.execute({"search", {}}).ok);
  EXPECT_FALSE(registry.execute({"search", {{"query", 7}}}).ok);
  EXPECT_FALSE(registry.execute({"fetch", {{"url", "x"}}}).ok);
}
