#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "bases/bm25.hpp"
#include "bases/errors.hpp"
#include "bases/rng.hpp"
#include "bases/text.hpp"
#include "test_support.hpp"

using namespace bases;

using Terms = std::vector<std::string>;

TEST(Tokenize, LowercasesAndSplitsOnPunctuation) {
  EXPECT_EQ(tokenize("Bollywood's GROWTH, 2024!"),
            (Terms{"bollywood", "s", "growth", "2024"}));
  EXPECT_TRUE(tokenize("  --  ").empty());
}

TEST(Tokenize, CjkRunsBecomeBigrams) {
  EXPECT_EQ(tokenize("机器学习"), (Terms{"机器", "器学", "学习"}));
  EXPECT_EQ(tokenize("猫"), (Terms{"猫"}));
  EXPECT_EQ(tokenize("GPT模型 test"), (Terms{"gpt", "模型", "test"}));
}

TEST(Tokenize, FullwidthAsciiFolded) {
  EXPECT_EQ(tokenize("ＡＢＣ１２"), (Terms{"abc12"}));
}

TEST(ContentTerms, DropsStopwords) {
  EXPECT_EQ(content_terms("growth of the bollywood", default_stopwords(Language::kEnglish)),
            (Terms{"growth", "bollywood"}));
  // "的" is cut out of the run before bigrams are formed.
  const Terms zh = content_terms("北京的天气", default_stopwords(Language::kChinese));
  EXPECT_EQ(zh, (Terms{"北京", "天气"}));
}

TEST(Stopwords, BuiltInListSizes) {
  EXPECT_GE(default_stopwords(Language::kEnglish).size(), 150u);
  EXPECT_GE(default_stopwords(Language::kChinese).size(), 100u);
}

TEST(Stopwords, LoadFromFile) {
  bases::testing::TempDir tmp;
  bases::testing::write_file(tmp / "s.txt", "# comment\nfoo\n\n Bar \n");
  const StopwordSet s = load_stopwords((tmp / "s.txt").string());
  EXPECT_EQ(s, (StopwordSet{"foo", "bar"}));
  EXPECT_THROW(load_stopwords((tmp / "missing.txt").string()), LoadError);
}

TEST(Language, ParseAndCode) {
  EXPECT_EQ(parse_language("EN"), Language::kEnglish);
  EXPECT_EQ(parse_language("chinese"), Language::kChinese);
  EXPECT_EQ(language_code(Language::kChinese), "zh");
  EXPECT_THROW(parse_language("fr"), ConfigError);
}

TEST(Rng, DerivedSeedsAreDistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(derive_seed(42, i));
  EXPECT_EQ(seen.size(), 10000u);
  EXPECT_EQ(derive_seed(42, 3), derive_seed(42, 3));
  EXPECT_NE(derive_seed(42, 3), derive_seed(43, 3));
}

TEST(Rng, UniformIntCoversRange) {
  Rng rng(1);
  std::map<std::int64_t, int> counts;
  for (int i = 0; i < 20000; ++i) ++counts[rng.uniform_int(6, 10)];
  EXPECT_EQ(counts.size(), 5u);
  EXPECT_EQ(counts.begin()->first, 6);
  EXPECT_EQ(counts.rbegin()->first, 10);
}

TEST(Rng, WeightedIndexSkipsZeroWeights) {
  Rng rng(2);
  const std::vector<double> w{0.0, 1.0, 0.0, 3.0};
  int ones = 0;
  for (int i = 0; i < 40000; ++i) {
    const auto k = rng.weighted_index(w);
    ASSERT_TRUE(k == 1 || k == 3);
    ones += k == 1;
  }
  EXPECT_NEAR(ones / 40000.0, 0.25, 0.01);
}

// ---------------------------------------------------------------------------
// BM25

TEST(Bm25, HandComputedThreeDocumentTable) {
  // Docs "cat hat" (dl 2, tf 1), "dog" (dl 1, tf 0), "cat cat dog" (dl 3,
  // tf 2); avgdl = 2, df(cat) = 2 of N = 3, so idf = ln(0.6 + 1) = ln 1.6.
  //   doc 1: idf * 1 * 2.2 / (1 + 1.2 * (0.25 + 0.75 * 2/2)) = idf
  //   doc 3: idf * 2 * 2.2 / (2 + 1.2 * (0.25 + 0.75 * 3/2)) = idf * 4.4/3.65
  const double idf = std::log(1.6);
  const std::vector<double> expected{idf, 0.0, idf * 4.4 / 3.65};

  const Bm25Index index({tokenize("cat hat"), tokenize("dog"), tokenize("cat cat dog")});
  EXPECT_DOUBLE_EQ(index.average_length(), 2.0);
  EXPECT_EQ(index.document_frequency("cat"), 2u);
  const auto scores = index.score(tokenize("cat"));
  ASSERT_EQ(scores.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(scores[i], expected[i], 1e-9) << i;
}

TEST(Bm25, IdfFormula) {
  EXPECT_NEAR(bm25_idf(10, 1), std::log(9.5 / 1.5 + 1.0), 1e-12);
  EXPECT_GT(bm25_idf(3, 3), 0.0);
}

TEST(Bm25, RepeatedQueryTermsCountOnce) {
  const Bm25Index index({tokenize("cat hat"), tokenize("dog")});
  EXPECT_EQ(index.score(tokenize("cat cat")), index.score(tokenize("cat")));
}

TEST(Bm25, NoOverlapGivesZeros) {
  const Bm25Index index({tokenize("cat hat"), tokenize("dog")});
  for (double s : index.score(tokenize("zebra"))) EXPECT_EQ(s, 0.0);
}

TEST(Bm25, EmptyDocumentsScoreZero) {
  const Bm25Index index({Terms{}, Terms{}});
  for (double s : index.score(tokenize("anything"))) EXPECT_EQ(s, 0.0);
}

TEST(Bm25, SingleMatchingDocumentIsPositive) {
  const Bm25Index index({tokenize("rust compiler")});
  EXPECT_GT(index.score(tokenize("rust"))[0], 0.0);
}
