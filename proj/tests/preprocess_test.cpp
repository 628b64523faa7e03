// Copyright 2026 The Nusa Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <string>

#include "nusa/preprocess.hpp"
#include "support.hpp"

namespace {

using namespace nusa;
using nusa::testing::Rng;
using nusa::testing::uniform;

Document doc(std::string id, std::string text) {
  return {std::move(id), std::move(text), lang(Language::indonesian), "", {}};
}

TEST(Repetition, IdenticalLines) {
  const auto p = repetition_profile("aku\naku\naku\naku");
  EXPECT_DOUBLE_EQ(p.dup_line_frac, 0.75);
  EXPECT_DOUBLE_EQ(p.dup_line_char_frac, 0.75);
  EXPECT_DOUBLE_EQ(p.dup_para_frac, 0.0);
}

TEST(Repetition, BlankLinesAreNotCounted) {
  const auto p = repetition_profile("satu\n\n\ndua\n\nsatu");
  EXPECT_NEAR(p.dup_line_frac, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(p.dup_para_frac, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(p.dup_para_char_frac, 4.0 / 11.0, 1e-12);
}

TEST(Repetition, TopNgramCoverage) {
  const auto p = repetition_profile("a b a b a b");
  EXPECT_DOUBLE_EQ(p.top_ngram_char_frac.at(2), 1.0);
  EXPECT_DOUBLE_EQ(p.top_ngram_char_frac.at(3), 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(p.top_ngram_char_frac.at(4), 1.0);
  EXPECT_DOUBLE_EQ(p.dup_ngram_char_frac.at(5), 0.0);
}

TEST(Repetition, DuplicateNgramCoverage) {
  const auto p = repetition_profile("x y z w v x y z w v q");
  EXPECT_DOUBLE_EQ(p.dup_ngram_char_frac.at(5), 10.0 / 11.0);
  EXPECT_DOUBLE_EQ(p.dup_ngram_char_frac.at(6), 0.0);
  EXPECT_DOUBLE_EQ(p.top_ngram_char_frac.at(2), 4.0 / 11.0);
}

TEST(Repetition, EmptyAndUniqueTextsAreClean) {
  EXPECT_EQ(repetition_profile(""), RepetitionProfile{});
  EXPECT_EQ(repetition_profile("  \n \n"), RepetitionProfile{});
  EXPECT_EQ(repetition_profile("semua kata di sini berbeda satu sama lain"), RepetitionProfile{});
}

TEST(Repetition, RandomDocumentsStayInUnitInterval) {
  Rng rng(11);
  for (int t = 0; t < 300; ++t) {
    const auto text = t % 2 ? nusa::testing::random_words(rng, uniform(rng, 0, 120), uniform(rng, 1, 30))
                            : nusa::testing::random_unicode(rng, 200);
    for (const auto& [name, v] : repetition_profile(text).fields()) {
      EXPECT_GE(v, 0.0) << name;
      EXPECT_LE(v, 1.0) << name;
    }
  }
}

TEST(Filter, ReasonsNameEveryViolation) {
  FilterConfig cfg;
  cfg.min_words = 5;
  const auto short_doc = doc("s", "dua kata");
  const auto d1 = apply_quality_filter(short_doc, repetition_profile(short_doc), cfg);
  EXPECT_FALSE(d1.keep);
  ASSERT_EQ(d1.reasons.size(), 1u);
  EXPECT_TRUE(d1.reasons[0].starts_with("min_words"));

  const auto spam = doc("p", "beli sekarang\nbeli sekarang\nbeli sekarang\nbeli sekarang");
  const auto d2 = apply_quality_filter(spam, repetition_profile(spam), cfg);
  EXPECT_FALSE(d2.keep);
  EXPECT_TRUE(std::any_of(d2.reasons.begin(), d2.reasons.end(),
                          [](const std::string& r) { return r.starts_with("dup_line_frac"); }));

  const auto good = doc("g", "pagi ini saya pergi ke pasar membeli sayur dan buah segar");
  EXPECT_TRUE(apply_quality_filter(good, repetition_profile(good), cfg).keep);
}

TEST(Filter, ConfigValidation) {
  FilterConfig cfg;
  cfg.min_words = 10;
  cfg.max_words = 5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.near_dup.bands = 3;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.repetition_thresholds.dup_line_frac = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(filter_config_from_json({{"nope", 1}}), ConfigError);
  EXPECT_NO_THROW(FilterConfig{}.validate());
}

TEST(ExactDedup, FirstOccurrenceSurvivesIgnoringCaseAndSpacing) {
  Corpus c;
  c.docs = {doc("a", "Halo  Dunia"), doc("b", "lain"), doc("c", "halo dunia"), doc("d", "HALO\nDUNIA"),
            doc("e", "lain ")};
  const auto r = exact_dedup(c);
  ASSERT_EQ(r.corpus.size(), 2u);
  EXPECT_EQ(r.corpus.docs[0].text, "Halo  Dunia");
  EXPECT_EQ(r.report.removed_ids, (std::vector<std::string>{"c", "d", "e"}));
  ASSERT_EQ(r.report.clusters.size(), 2u);
  EXPECT_EQ(r.report.clusters[0].kept_id, "a");
  EXPECT_EQ(r.report.clusters[1].kept_id, "b");
}

TEST(Jaccard, MatchesSetDefinition) {
  EXPECT_DOUBLE_EQ(jaccard({1, 2, 3}, {2, 3, 4}), 0.5);
  EXPECT_DOUBLE_EQ(jaccard({}, {}), 0.0);
  EXPECT_DOUBLE_EQ(jaccard({5}, {5}), 1.0);
  EXPECT_TRUE(shingle_hashes("a b c", 5).empty());
  EXPECT_EQ(shingle_hashes("A b C d E", 5), shingle_hashes("a B c D e", 5));
}

// Random documents over a large vocabulary, some with lightly edited copies.
Corpus planted_corpus(Rng& rng, std::set<std::pair<std::string, std::string>>& planted) {
  Corpus c;
  for (int i = 0; i < 40; ++i) {
    const auto base = nusa::testing::random_words(rng, 200, 5000);
    c.docs.push_back(doc("d" + std::to_string(i), base));
    if (i % 4 == 0) {
      auto words = text::split_words(base);
      std::string copy;
      for (std::size_t k = 0; k < words.size(); ++k) {
        if (k) copy += ' ';
        copy += k == 100 ? std::string("edited") : std::string(words[k]);
      }
      const auto id = "d" + std::to_string(i) + "-copy";
      c.docs.push_back(doc(id, copy));
      planted.insert({"d" + std::to_string(i), id});
    }
  }
  return c;
}

TEST(NearDedup, AgreesWithExhaustiveJaccard) {
  Rng rng(5);
  std::set<std::pair<std::string, std::string>> planted;
  const auto c = planted_corpus(rng, planted);
  FilterConfig cfg;

  std::set<std::pair<std::string, std::string>> oracle;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      const auto a = shingle_hashes(c.docs[i].text, cfg.near_dup.shingle_n);
      const auto b = shingle_hashes(c.docs[j].text, cfg.near_dup.shingle_n);
      if (jaccard(a, b) >= cfg.near_dup.jaccard_threshold) oracle.insert({c.docs[i].id, c.docs[j].id});
    }
  EXPECT_EQ(oracle, planted);

  const auto r = near_dedup(c, cfg);
  std::set<std::pair<std::string, std::string>> found;
  for (const auto& p : r.report.pairs) found.insert({p.first_id, p.second_id});
  EXPECT_EQ(found, oracle);
  EXPECT_EQ(r.corpus.size(), c.size() - planted.size());
  for (const auto& id : r.report.removed_ids) EXPECT_TRUE(id.ends_with("-copy"));
}

TEST(NearDedup, SameSeedSameResult) {
  Rng rng(9);
  std::set<std::pair<std::string, std::string>> planted;
  const auto c = planted_corpus(rng, planted);
  FilterConfig cfg;
  cfg.near_dup.seed = 77;
  std::ostringstream a, b;
  write_dedup_report(near_dedup(c, cfg).report, a);
  write_dedup_report(near_dedup(c, cfg).report, b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str().find("\"seed\":77"), std::string::npos);
}

TEST(NearDedup, ShortDocumentsNeverMatch) {
  Corpus c;
  c.docs = {doc("a", "satu dua"), doc("b", "satu dua")};
  EXPECT_EQ(near_dedup(c, FilterConfig{}).corpus.size(), 2u);
}

}  // namespace
