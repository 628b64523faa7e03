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

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <nlohmann/json.hpp>

#include "nusa/eval/metrics.hpp"
#include "support.hpp"

namespace {

using namespace nusa::metrics;
using nusa::testing::Rng;
using nusa::testing::uniform;

// Longest common subsequence by trying every subsequence of `a`.
std::size_t brute_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << a.size()); ++mask) {
    std::size_t j = 0, len = 0;
    bool ok = true;
    for (std::size_t i = 0; i < a.size() && ok; ++i) {
      if (!(mask >> i & 1u)) continue;
      while (j < b.size() && b[j] != a[i]) ++j;
      if (j == b.size()) ok = false;
      else {
        ++j;
        ++len;
      }
    }
    if (ok) best = std::max(best, len);
  }
  return best;
}

TEST(Rouge, TokenizationLowercasesAndSplitsOnNonAlnum) {
  EXPECT_EQ(rouge_tokens("Halo, DUNIA!  apa-kabar? 2024"),
            (std::vector<std::string>{"halo", "dunia", "apa", "kabar", "2024"}));
  EXPECT_EQ(rouge_tokens("Über café"), (std::vector<std::string>{"über", "café"}));
  EXPECT_TRUE(rouge_tokens(" ,.; ").empty());
}

TEST(Rouge, MatchesBruteForceLcs) {
  Rng rng(31);
  int checked = 0;
  for (int t = 0; t < 200; ++t) {
    std::string cand, ref;
    const auto nc = uniform(rng, 1, 12), nr = uniform(rng, 1, 12);
    for (std::size_t i = 0; i < nc; ++i) cand += "k" + std::to_string(uniform(rng, 0, 5)) + (uniform(rng, 0, 3) ? " " : ", ");
    for (std::size_t i = 0; i < nr; ++i) ref += "K" + std::to_string(uniform(rng, 0, 5)) + " ";
    const auto ct = rouge_tokens(cand), rt = rouge_tokens(ref);
    const double lcs = static_cast<double>(brute_lcs(ct, rt));
    const double r = lcs / static_cast<double>(rt.size()), p = lcs / static_cast<double>(ct.size());
    const double f = r + p > 0 ? 2 * r * p / (r + p) : 0.0;
    const auto s = rouge_l(cand, ref);
    ASSERT_NEAR(s.recall, r, 1e-9);
    ASSERT_NEAR(s.precision, p, 1e-9);
    ASSERT_NEAR(s.f1, f, 1e-9);
    ++checked;
  }
  EXPECT_GE(checked, 10);
}

TEST(Rouge, KnownValuesAndErrors) {
  const auto s = rouge_l("the cat sat", "the cat sat on the mat");
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
  EXPECT_DOUBLE_EQ(s.precision, 1.0);
  EXPECT_NEAR(s.f1, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(rouge_l("a b", "c d").f1, 0.0);
  EXPECT_THROW(rouge_l("...", "ref"), nusa::DataError);
  EXPECT_THROW(rouge_l("cand", ""), nusa::DataError);
}

TEST(Chrf, MatchesFrozenOracle) {
  std::ifstream in(nusa::testing::oracle_dir() / "chrf_expected.json");
  const auto cases = nlohmann::json::parse(in);
  ASSERT_GE(cases.size(), 10u);
  for (const auto& c : cases)
    EXPECT_NEAR(chrf_pp(c["hyp"].get<std::string>(), c["ref"].get<std::string>()), c["chrf_pp"].get<double>(), 0.01)
        << c["hyp"] << " | " << c["ref"];
}

TEST(Chrf, Bounds) {
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    const auto a = nusa::testing::random_unicode(rng, 30), b = nusa::testing::random_unicode(rng, 30) + "x";
    const double v = chrf_pp(a, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 100.0 + 1e-9);
  }
  EXPECT_NEAR(chrf_pp("sama persis", "sama persis"), 100.0, 1e-9);
  EXPECT_THROW(chrf_pp("x", " \n"), nusa::DataError);
}

// Per-class precision/recall from an explicit confusion matrix.
double confusion_weighted_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  std::set<std::string> labels(gold.begin(), gold.end());
  labels.insert(pred.begin(), pred.end());
  std::map<std::string, std::map<std::string, int>> cm;
  for (std::size_t i = 0; i < gold.size(); ++i) ++cm[gold[i]][pred[i]];
  double total = 0;
  for (const auto& l : labels) {
    int tp = cm[l][l], row = 0, col = 0;
    for (const auto& m : labels) {
      row += cm[l][m];
      col += cm[m][l];
    }
    const double p = col ? static_cast<double>(tp) / col : 0.0;
    const double r = row ? static_cast<double>(tp) / row : 0.0;
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    total += f * row;
  }
  return 100.0 * total / static_cast<double>(gold.size());
}

TEST(WeightedF1, HandComputedCases) {
  EXPECT_NEAR(weighted_f1({"a", "b", "b", "a"}, {"a", "a", "b", "c"}), 100.0 * (0.5 * 2 + 2.0 / 3.0) / 4.0, 1e-9);
  EXPECT_NEAR(weighted_f1({"x", "x"}, {"x", "x"}), 100.0, 1e-9);
  EXPECT_NEAR(weighted_f1({"y", "y"}, {"x", "x"}), 0.0, 1e-9);
  const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> cases = {
      {{"a", "b", "b", "a"}, {"a", "a", "b", "c"}},
      {{"pos", "neg", "neu", "pos", "pos", "neg"}, {"pos", "neg", "pos", "neu", "pos", "neg"}},
      {{"1", "1", "1", "0"}, {"0", "1", "1", "0"}},
      {{"a", "a", "a"}, {"a", "b", "c"}},
      {{"q", "r", "s", "t", "q"}, {"q", "q", "s", "s", "t"}},
  };
  for (const auto& [p, g] : cases) EXPECT_NEAR(weighted_f1(p, g), confusion_weighted_f1(p, g), 1e-9);
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::string> p, g;
    const auto n = uniform(rng, 1, 30);
    for (std::size_t i = 0; i < n; ++i) {
      p.push_back("c" + std::to_string(uniform(rng, 0, 4)));
      g.push_back("c" + std::to_string(uniform(rng, 0, 4)));
    }
    ASSERT_NEAR(weighted_f1(p, g), confusion_weighted_f1(p, g), 1e-9);
  }
  EXPECT_THROW(weighted_f1({"a"}, {}), nusa::DataError);
}

TEST(Accuracy, Percentage) {
  EXPECT_DOUBLE_EQ(accuracy({true, false, true, true}), 75.0);
  EXPECT_THROW(accuracy({}), nusa::DataError);
}

TEST(Perplexity, ExpOfMeanNegativeLogProb) {
  EXPECT_NEAR(perplexity({-1, -2, -3}), std::exp(2.0), 1e-9);
  EXPECT_DOUBLE_EQ(perplexity({0, 0}), 1.0);
  EXPECT_THROW(perplexity({}), nusa::DataError);
  EXPECT_THROW(perplexity({0.5}), nusa::DataError);
}

}  // namespace
