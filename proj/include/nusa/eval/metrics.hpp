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

// Scoring metrics: ROUGE-L, chrF++, accuracy, support-weighted F1 and
// perplexity.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nusa/detail/text.hpp"
#include "nusa/detail/utf8.hpp"
#include "nusa/error.hpp"

namespace nusa::metrics {

// Lowercase, then split on runs of non-alphanumeric characters.
inline std::vector<std::string> rouge_tokens(std::string_view s) {
  const auto cps = utf8::to_u32(text::lower(s));
  std::vector<std::string> out;
  std::u32string cur;
  for (char32_t c : cps) {
    if (text::is_alnum(c)) {
      cur.push_back(c);
    } else if (!cur.empty()) {
      out.push_back(utf8::from_u32(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(utf8::from_u32(cur));
  return out;
}

inline std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

struct RougeScore {
  double recall = 0;
  double precision = 0;
  double f1 = 0;
};

inline RougeScore rouge_l(std::string_view candidate, std::string_view reference) {
  const auto cand = rouge_tokens(candidate);
  const auto ref = rouge_tokens(reference);
  if (cand.empty()) throw DataError("rouge_l: candidate has no tokens");
  if (ref.empty()) throw DataError("rouge_l: reference has no tokens");
  const auto lcs = static_cast<double>(lcs_length(cand, ref));
  RougeScore s;
  s.recall = lcs / static_cast<double>(ref.size());
  s.precision = lcs / static_cast<double>(cand.size());
  s.f1 = (s.recall + s.precision) > 0 ? 2 * s.recall * s.precision / (s.recall + s.precision) : 0.0;
  return s;
}

struct ChrfParams {
  int char_order = 6;
  int word_order = 2;
  double beta = 2.0;
};

namespace detail {

using NgramCounts = std::unordered_map<std::u32string, std::size_t>;

inline NgramCounts char_ngrams(const std::u32string& chars, std::size_t n) {
  NgramCounts c;
  for (std::size_t i = 0; i + n <= chars.size(); ++i) ++c[chars.substr(i, n)];
  return c;
}

// Whitespace words with one leading or trailing ASCII punctuation mark split
// off, as in the reference chrF++ implementation.
inline std::vector<std::u32string> chrf_words(std::string_view s) {
  static constexpr std::u32string_view kPuncts = U"!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";
  std::vector<std::u32string> out;
  for (auto w : text::split_words(s)) {
    const auto cps = utf8::to_u32(w);
    if (cps.size() == 1) {
      out.push_back(cps);
    } else if (kPuncts.find(cps.back()) != std::u32string_view::npos) {
      out.push_back(cps.substr(0, cps.size() - 1));
      out.push_back(cps.substr(cps.size() - 1));
    } else if (kPuncts.find(cps.front()) != std::u32string_view::npos) {
      out.push_back(cps.substr(0, 1));
      out.push_back(cps.substr(1));
    } else {
      out.push_back(cps);
    }
  }
  return out;
}

inline NgramCounts word_ngrams(const std::vector<std::u32string>& words, std::size_t n) {
  NgramCounts c;
  for (std::size_t i = 0; i + n <= words.size(); ++i) {
    std::u32string key;
    for (std::size_t k = 0; k < n; ++k) {
      if (k) key.push_back(U' ');
      key += words[i + k];
    }
    ++c[key];
  }
  return c;
}

struct OrderStats {
  std::size_t hyp = 0, ref = 0, match = 0;
};

inline OrderStats match_stats(const NgramCounts& hyp, const NgramCounts& ref) {
  OrderStats s;
  for (const auto& [g, c] : hyp) {
    s.hyp += c;
    if (auto it = ref.find(g); it != ref.end()) s.match += std::min(c, it->second);
  }
  for (const auto& [g, c] : ref) s.ref += c;
  // Orders absent from the reference do not count hypothesis n-grams.
  if (ref.empty()) s.hyp = 0;
  return s;
}

}  // namespace detail

// Sentence-level chrF++ in [0, 100]: precision and recall are averaged over
// the n-gram orders present on both sides, then combined into F-beta.
inline double chrf_pp(std::string_view candidate, std::string_view reference, const ChrfParams& params = {}) {
  if (text::strip(reference).empty()) throw DataError("chrf_pp: empty reference");
  auto squash = [](std::string_view s) {
    std::u32string out;
    for (char32_t c : utf8::to_u32(s))
      if (!text::is_space(c)) out.push_back(c);
    return out;
  };
  const auto hc = squash(candidate), rc = squash(reference);
  std::vector<detail::OrderStats> stats;
  for (int n = 1; n <= params.char_order; ++n)
    stats.push_back(detail::match_stats(detail::char_ngrams(hc, static_cast<std::size_t>(n)),
                                        detail::char_ngrams(rc, static_cast<std::size_t>(n))));
  const auto hw = detail::chrf_words(candidate), rw = detail::chrf_words(reference);
  for (int n = 1; n <= params.word_order; ++n)
    stats.push_back(detail::match_stats(detail::word_ngrams(hw, static_cast<std::size_t>(n)),
                                        detail::word_ngrams(rw, static_cast<std::size_t>(n))));
  double avg_prec = 0, avg_rec = 0;
  int effective = 0;
  for (const auto& s : stats) {
    if (s.hyp == 0 || s.ref == 0) continue;
    avg_prec += static_cast<double>(s.match) / static_cast<double>(s.hyp);
    avg_rec += static_cast<double>(s.match) / static_cast<double>(s.ref);
    ++effective;
  }
  if (effective == 0) return 0.0;
  avg_prec /= effective;
  avg_rec /= effective;
  if (avg_prec + avg_rec == 0) return 0.0;
  const double b2 = params.beta * params.beta;
  return 100.0 * (1 + b2) * avg_prec * avg_rec / (b2 * avg_prec + avg_rec);
}

inline double accuracy(const std::vector<bool>& results) {
  if (results.empty()) throw DataError("accuracy: no results");
  const auto hits = std::count(results.begin(), results.end(), true);
  return 100.0 * static_cast<double>(hits) / static_cast<double>(results.size());
}

// Per-class F1 averaged with gold-support weights, as a percentage. Classes
// that only ever appear as predictions carry zero weight.
inline double weighted_f1(const std::vector<std::string>& predictions, const std::vector<std::string>& golds) {
  if (predictions.size() != golds.size()) throw DataError("weighted_f1: length mismatch");
  if (golds.empty()) throw DataError("weighted_f1: no labels");
  std::map<std::string, std::size_t> tp, pred_count, gold_count;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    ++pred_count[predictions[i]];
    ++gold_count[golds[i]];
    if (predictions[i] == golds[i]) ++tp[golds[i]];
  }
  double total = 0;
  for (const auto& [label, support] : gold_count) {
    const double t = static_cast<double>(tp[label]);
    const double p = static_cast<double>(pred_count[label]);
    const double g = static_cast<double>(support);
    const double denom = p + g;
    const double f1 = denom > 0 ? 2 * t / denom : 0.0;
    total += f1 * g;
  }
  return 100.0 * total / static_cast<double>(golds.size());
}

// exp of the negative mean natural-log probability.
inline double perplexity(const std::vector<double>& logprobs) {
  if (logprobs.empty()) throw DataError("perplexity: no log-probabilities");
  double sum = 0;
  for (double lp : logprobs) {
    if (!(lp <= 0.0)) throw DataError("perplexity: log-probability must be <= 0");
    sum += lp;
  }
  return std::exp(-sum / static_cast<double>(logprobs.size()));
}

}  // namespace nusa::metrics
