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
#include <sstream>
#include <string>

#include "nusa/tokenizer.hpp"
#include "support.hpp"

namespace {

using namespace nusa;
using nusa::testing::Rng;
using nusa::testing::uniform;

const std::string M = std::string(kDefaultMarker);

TokenizerModel toy() {
  return TokenizerModel::with_byte_fallback({M + "saya", M + "makan", M + "ma", "kan", M + "nasi", M + "di", "rumah"});
}

Corpus corpus_of(std::initializer_list<std::pair<Language, std::string>> docs) {
  Corpus c;
  int i = 0;
  for (const auto& [l, t] : docs) c.docs.push_back({"d" + std::to_string(i++), t, lang(l), "", {}});
  return c;
}

TEST(Encode, WholeWordHitAndByteFallback) {
  const auto m = toy();
  EXPECT_EQ(m.encode("makan"), (std::vector<TokenId>{*m.find(M + "makan")}));
  const auto ids = m.encode("zq");
  ASSERT_EQ(ids.size(), 3u);  // space, 'z', 'q'
  for (auto id : ids) EXPECT_EQ(m.token(id).kind, TokenKind::byte);
  EXPECT_EQ(m.encode("é").size(), 3u);
  EXPECT_TRUE(m.encode("").empty());
}

TEST(Encode, GreedyLongestMatch) {
  const auto m = toy();
  const auto ids = m.encode("makanan dirumah");
  std::vector<std::string> pieces;
  for (auto id : ids) pieces.push_back(m.token(id).piece);
  EXPECT_EQ(pieces, (std::vector<std::string>{M + "makan", "<0x61>", "<0x6E>", M + "di", "rumah"}));
}

// Hand segmentation of each word against the toy vocabulary:
// saya=1, makan=1, makanan=3 (makan|a|n), dirumah=2 (di|rumah), kan=2 (space|kan).
TEST(Fertility, FiftyWordFixtureMatchesHandCount) {
  std::string text;
  for (int r = 0; r < 10; ++r) text += (r ? " " : "") + std::string("saya makan makanan dirumah kan");
  const auto rep = fertility(toy(), corpus_of({{Language::indonesian, text}}));
  const auto& s = rep.per_lang.at(lang(Language::indonesian));
  EXPECT_EQ(s.word_count, 50u);
  EXPECT_EQ(s.token_count, 90u);
  EXPECT_DOUBLE_EQ(*s.mean_fertility(), 1.8);
}

TEST(Fertility, TrivialCases) {
  const auto m = toy();
  EXPECT_DOUBLE_EQ(*fertility(m, corpus_of({{Language::indonesian, "saya makan nasi"}})).overall.mean_fertility(), 1.0);
  // mari -> ma|r|i (3), saya (1)
  EXPECT_DOUBLE_EQ(*fertility(m, corpus_of({{Language::indonesian, "mari saya"}})).overall.mean_fertility(), 2.0);
  EXPECT_FALSE(fertility(m, Corpus{}).overall.mean_fertility().has_value());
}

TEST(Fertility, ImprovementArithmetic) {
  EXPECT_NEAR(improvement_percent(2.858, 2.031), 28.94, 1e-9);
  EXPECT_NEAR(improvement_percent(2.658, 1.996), 24.91, 1e-9);
  EXPECT_NEAR(improvement_percent(1.666, 1.633), 1.98, 1e-9);
  const auto r = fertility(toy(), corpus_of({{Language::javanese, "mangan sega"}, {Language::english, "eat"}}));
  for (const auto& [l, v] : fertility_improvement(r, r)) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(fertility_improvement(r, FertilityReport{}).size(), 0u);
}

TEST(RoundTrip, RandomUnicode) {
  Rng rng(3);
  const auto base = toy();
  const auto extended = extend_vocab(base, {"aku", "é", "ab"});
  for (int t = 0; t < 1000; ++t) {
    const auto s = nusa::testing::random_unicode(rng, 40);
    ASSERT_EQ(base.decode(base.encode(s)), s);
    ASSERT_EQ(extended.decode(extended.encode(s)), s);
  }
}

TEST(RoundTrip, MarkerCharactersInInput) {
  const auto m = extend_vocab(toy(), {"saya"});
  for (const std::string& s : {M, M + "saya", "saya" + M, " " + M + " ", "a" + M + M + "b"})
    EXPECT_EQ(m.decode(m.encode(s)), s);
}

TEST(Vocab, WordFrequencies) {
  const auto c = corpus_of({{Language::indonesian, "a a b"}, {Language::javanese, "a"}});
  const auto t = word_frequencies(c, lang(Language::indonesian));
  EXPECT_EQ(t.counts, (std::map<std::string, std::size_t>{{"a", 2}, {"b", 1}}));
  EXPECT_TRUE(word_frequencies(Corpus{}, lang(Language::indonesian)).counts.empty());
  const auto f = word_frequencies(corpus_of({{Language::indonesian, "Saya saya"}}), lang(Language::indonesian));
  EXPECT_EQ(f.counts.at("saya"), 2u);
}

TEST(Vocab, SelectNewWords) {
  const auto m = toy();
  WordFrequencyTable t{lang(Language::indonesian), {{"dan", 100}, {"yang", 90}}};
  EXPECT_EQ(select_new_words(t, m, 1), (std::vector<std::string>{"dan"}));
  t.counts["saya"] = 500;
  t.counts["ada"] = 90;
  EXPECT_EQ(select_new_words(t, m, 10), (std::vector<std::string>{"dan", "ada", "yang"}));
  EXPECT_TRUE(select_new_words(t, m, 0).empty());
}

TEST(Vocab, PaddingToMultipleOf64) {
  std::vector<std::string> pieces;
  for (std::size_t i = 0; pieces.size() < 32000 - 259; ++i) pieces.push_back("p" + std::to_string(i));
  const auto base = TokenizerModel::with_byte_fallback(pieces);
  ASSERT_EQ(base.size(), 32000u);
  std::vector<std::string> words;
  for (int i = 0; i < 3000; ++i) words.push_back("kata" + std::to_string(i));
  const auto ext = extend_vocab(base, words);
  EXPECT_EQ(ext.size(), 35008u);
  EXPECT_EQ(extend_vocab(base, {"x"}).size(), 32064u);
  EXPECT_EQ(extend_vocab(base, {}).tokens(), base.tokens());
  for (std::size_t i = 0; i < base.size(); ++i) ASSERT_EQ(ext.tokens()[i], base.tokens()[i]);
  EXPECT_EQ(ext.encode("kata7").size(), 1u);
  EXPECT_THROW(extend_vocab(base, {"a", "a"}), std::invalid_argument);
}

TEST(Vocab, RandomPaddingSizes) {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::string> pieces, words;
    const auto n = uniform(rng, 0, 300), k = uniform(rng, 0, 200);
    for (std::size_t i = 0; i < n; ++i) pieces.push_back("p" + std::to_string(i));
    for (std::size_t i = 0; i < k; ++i) words.push_back("w" + std::to_string(i));
    const auto base = TokenizerModel::with_byte_fallback(pieces);
    const auto ext = extend_vocab(base, words);
    EXPECT_EQ(ext.size() % 64, 0u);
    EXPECT_GE(ext.size(), base.size() + k);
    EXPECT_LT(ext.size(), base.size() + k + 64);
  }
}

TEST(Vocab, ExtensionNeverIncreasesFertility) {
  Rng rng(21);
  const std::array<Language, 4> langs{Language::indonesian, Language::javanese, Language::sundanese, Language::english};
  for (int t = 0; t < 50; ++t) {
    Corpus c;
    for (int d = 0; d < 8; ++d)
      c.docs.push_back({"d" + std::to_string(d), nusa::testing::random_words(rng, uniform(rng, 1, 60), 30),
                        lang(langs[uniform(rng, 0, 3)]), "", {}});
    std::vector<std::string> pieces;
    for (int p = 0; p < 20; ++p) pieces.push_back((uniform(rng, 0, 1) ? M : "") + "w" + std::to_string(uniform(rng, 0, 40)));
    std::sort(pieces.begin(), pieces.end());
    pieces.erase(std::unique(pieces.begin(), pieces.end()), pieces.end());
    const auto base = TokenizerModel::with_byte_fallback(pieces);
    std::vector<std::string> words;
    for (int w = 0; w < 40; ++w)
      if (uniform(rng, 0, 2) == 0) words.push_back("w" + std::to_string(w));
    const auto before = fertility(base, c);
    const auto after = fertility(extend_vocab(base, words), c);
    for (const auto& [l, s] : before.per_lang) {
      EXPECT_LE(after.per_lang.at(l).token_count, s.token_count);
      EXPECT_EQ(after.per_lang.at(l).word_count, s.word_count);
    }
  }
}

TEST(ModelFile, SaveLoadRoundTrip) {
  const auto m = extend_vocab(toy(), {"saya", "ñam"});
  std::stringstream ss;
  save_tokenizer(m, ss);
  EXPECT_EQ(ss.str().find("ñ"), std::string::npos);
  const auto back = load_tokenizer(ss);
  EXPECT_EQ(back.tokens(), m.tokens());
  EXPECT_EQ(back.word_start_marker(), m.word_start_marker());
  std::stringstream bad("{\"format\":\"other\"}\n");
  EXPECT_THROW(load_tokenizer(bad), DataError);
  EXPECT_THROW(TokenizerModel({{"a", TokenKind::normal}}), DataError);
}

TEST(FertilityCsv, ColumnsAndImprovement) {
  const auto c = corpus_of({{Language::indonesian, "makanan dirumah"}, {Language::english, "eat"}});
  const auto base = toy();
  const auto ext = extend_vocab(base, {"makanan"});
  std::ostringstream out;
  write_fertility_csv({{"base", fertility(base, c), base.size()}, {"extended", fertility(ext, c), ext.size()}}, out);
  std::istringstream in(out.str());
  std::string header, row1, row2;
  std::getline(in, header);
  std::getline(in, row1);
  std::getline(in, row2);
  EXPECT_EQ(header,
            "model,mean_fertility_indonesian,mean_fertility_regional,mean_fertility_english,vocab_size,"
            "improvement_pct_indonesian,improvement_pct_regional,improvement_pct_english");
  EXPECT_EQ(row1, "base,2.500,,4.000,266,--,--,--");
  EXPECT_EQ(row2, "extended,1.500,,4.000,320,40.00,,0.00");
}

}  // namespace
