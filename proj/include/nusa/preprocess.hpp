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

// Document curation: repetition profiling, threshold-based quality
// filtering, exact deduplication and MinHash/LSH near-duplicate removal.

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nusa/corpus.hpp"
#include "nusa/detail/csv.hpp"
#include "nusa/detail/parallel.hpp"
#include "nusa/detail/text.hpp"
#include "nusa/detail/utf8.hpp"
#include "nusa/error.hpp"

namespace nusa {

inline constexpr int kTopNgramMin = 2;
inline constexpr int kTopNgramMax = 4;
inline constexpr int kDupNgramMin = 5;
inline constexpr int kDupNgramMax = 10;

// Duplicate-content fractions of one document. Also reused as the shape of
// the upper-bound thresholds in FilterConfig.
struct RepetitionProfile {
  double dup_line_frac = 0;
  double dup_para_frac = 0;
  double dup_line_char_frac = 0;
  double dup_para_char_frac = 0;
  std::map<int, double> top_ngram_char_frac;  // n in [2, 4]
  std::map<int, double> dup_ngram_char_frac;  // n in [5, 10]

  RepetitionProfile() {
    for (int n = kTopNgramMin; n <= kTopNgramMax; ++n) top_ngram_char_frac[n] = 0;
    for (int n = kDupNgramMin; n <= kDupNgramMax; ++n) dup_ngram_char_frac[n] = 0;
  }

  // (name, value) for every field, in a fixed order.
  std::vector<std::pair<std::string, double>> fields() const {
    std::vector<std::pair<std::string, double>> out = {
        {"dup_line_frac", dup_line_frac},
        {"dup_para_frac", dup_para_frac},
        {"dup_line_char_frac", dup_line_char_frac},
        {"dup_para_char_frac", dup_para_char_frac},
    };
    for (const auto& [n, v] : top_ngram_char_frac)
      out.emplace_back("top_ngram_char_frac[" + std::to_string(n) + "]", v);
    for (const auto& [n, v] : dup_ngram_char_frac)
      out.emplace_back("dup_ngram_char_frac[" + std::to_string(n) + "]", v);
    return out;
  }

  friend bool operator==(const RepetitionProfile&, const RepetitionProfile&) = default;
};

struct NearDupConfig {
  int shingle_n = 5;
  int num_hashes = 128;
  int bands = 16;
  int rows = 8;
  double jaccard_threshold = 0.8;
  std::uint64_t seed = 0x6e757361ULL;
};

struct FilterConfig {
  std::size_t min_words = 50;
  std::size_t max_words = 100000;
  RepetitionProfile repetition_thresholds = default_thresholds();
  NearDupConfig near_dup;

  static RepetitionProfile default_thresholds() {
    RepetitionProfile t;
    t.dup_line_frac = 0.30;
    t.dup_para_frac = 0.30;
    t.dup_line_char_frac = 0.20;
    t.dup_para_char_frac = 0.20;
    t.top_ngram_char_frac = {{2, 0.20}, {3, 0.18}, {4, 0.16}};
    t.dup_ngram_char_frac = {{5, 0.15}, {6, 0.14}, {7, 0.13}, {8, 0.12}, {9, 0.11}, {10, 0.10}};
    return t;
  }

  void validate() const {
    if (min_words > max_words) throw ConfigError("filter: min_words > max_words");
    for (const auto& [name, v] : repetition_thresholds.fields())
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("filter: threshold " + name + " outside [0,1]");
    const auto& nd = near_dup;
    if (nd.shingle_n < 1) throw ConfigError("near_dup: shingle_n must be >= 1");
    if (nd.bands < 1 || nd.rows < 1 || nd.num_hashes < 1)
      throw ConfigError("near_dup: bands, rows and num_hashes must be positive");
    if (nd.bands * nd.rows != nd.num_hashes) throw ConfigError("near_dup: bands * rows != num_hashes");
    if (!(nd.jaccard_threshold >= 0.0 && nd.jaccard_threshold <= 1.0))
      throw ConfigError("near_dup: jaccard_threshold outside [0,1]");
  }
};

inline nlohmann::json to_json(const RepetitionProfile& p) {
  nlohmann::json j;
  j["dup_line_frac"] = p.dup_line_frac;
  j["dup_para_frac"] = p.dup_para_frac;
  j["dup_line_char_frac"] = p.dup_line_char_frac;
  j["dup_para_char_frac"] = p.dup_para_char_frac;
  for (const auto& [n, v] : p.top_ngram_char_frac) j["top_ngram_char_frac"][std::to_string(n)] = v;
  for (const auto& [n, v] : p.dup_ngram_char_frac) j["dup_ngram_char_frac"][std::to_string(n)] = v;
  return j;
}

inline nlohmann::json to_json(const FilterConfig& c) {
  return {
      {"min_words", c.min_words},
      {"max_words", c.max_words},
      {"repetition_thresholds", to_json(c.repetition_thresholds)},
      {"near_dup",
       {{"shingle_n", c.near_dup.shingle_n},
        {"num_hashes", c.near_dup.num_hashes},
        {"bands", c.near_dup.bands},
        {"rows", c.near_dup.rows},
        {"jaccard_threshold", c.near_dup.jaccard_threshold},
        {"seed", c.near_dup.seed}}},
  };
}

// Keys absent from `j` keep their defaults; unknown keys are rejected.
inline FilterConfig filter_config_from_json(const nlohmann::json& j) {
  FilterConfig c;
  auto check_keys = [](const nlohmann::json& obj, std::initializer_list<std::string_view> known,
                       std::string_view where) {
    if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
    for (const auto& [k, v] : obj.items())
      if (std::find(known.begin(), known.end(), k) == known.end())
        throw ConfigError(std::string(where) + ": unknown key \"" + k + "\"");
  };
  try {
    check_keys(j, {"min_words", "max_words", "repetition_thresholds", "near_dup"}, "filter");
    if (j.contains("min_words")) c.min_words = j["min_words"].get<std::size_t>();
    if (j.contains("max_words")) c.max_words = j["max_words"].get<std::size_t>();
    if (j.contains("repetition_thresholds")) {
      const auto& t = j["repetition_thresholds"];
      check_keys(t, {"dup_line_frac", "dup_para_frac", "dup_line_char_frac", "dup_para_char_frac",
                     "top_ngram_char_frac", "dup_ngram_char_frac"},
                 "repetition_thresholds");
      auto& r = c.repetition_thresholds;
      if (t.contains("dup_line_frac")) r.dup_line_frac = t["dup_line_frac"].get<double>();
      if (t.contains("dup_para_frac")) r.dup_para_frac = t["dup_para_frac"].get<double>();
      if (t.contains("dup_line_char_frac")) r.dup_line_char_frac = t["dup_line_char_frac"].get<double>();
      if (t.contains("dup_para_char_frac")) r.dup_para_char_frac = t["dup_para_char_frac"].get<double>();
      auto read_map = [](const nlohmann::json& m, std::map<int, double>& dst, std::string_view name) {
        for (const auto& [k, v] : m.items()) {
          const int n = std::stoi(k);
          if (!dst.contains(n)) throw ConfigError(std::string(name) + ": unsupported n-gram size " + k);
          dst[n] = v.get<double>();
        }
      };
      if (t.contains("top_ngram_char_frac")) read_map(t["top_ngram_char_frac"], r.top_ngram_char_frac, "top_ngram_char_frac");
      if (t.contains("dup_ngram_char_frac")) read_map(t["dup_ngram_char_frac"], r.dup_ngram_char_frac, "dup_ngram_char_frac");
    }
    if (j.contains("near_dup")) {
      const auto& n = j["near_dup"];
      check_keys(n, {"shingle_n", "num_hashes", "bands", "rows", "jaccard_threshold", "seed"}, "near_dup");
      if (n.contains("shingle_n")) c.near_dup.shingle_n = n["shingle_n"].get<int>();
      if (n.contains("num_hashes")) c.near_dup.num_hashes = n["num_hashes"].get<int>();
      if (n.contains("bands")) c.near_dup.bands = n["bands"].get<int>();
      if (n.contains("rows")) c.near_dup.rows = n["rows"].get<int>();
      if (n.contains("jaccard_threshold")) c.near_dup.jaccard_threshold = n["jaccard_threshold"].get<double>();
      if (n.contains("seed")) c.near_dup.seed = n["seed"].get<std::uint64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("filter config: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ConfigError("filter config: n-gram keys must be integers");
  }
  c.validate();
  return c;
}

namespace detail {

// Surplus occurrences of repeated units: (surplus count, surplus characters).
inline std::pair<std::size_t, std::size_t> surplus(const std::vector<std::string_view>& units) {
  std::unordered_set<std::string_view> seen;
  std::size_t count = 0, chars = 0;
  for (auto u : units) {
    if (!seen.insert(u).second) {
      ++count;
      chars += utf8::length(u);
    }
  }
  return {count, chars};
}

inline std::size_t total_chars(const std::vector<std::string_view>& units) {
  std::size_t n = 0;
  for (auto u : units) n += utf8::length(u);
  return n;
}

}  // namespace detail

// Lines are the non-blank LF-separated lines; paragraphs are runs of
// non-blank lines separated by blank lines. Word n-gram character measures
// count the characters of the words themselves (whitespace excluded), and
// each character at most once, so every field stays within [0, 1].
inline RepetitionProfile repetition_profile(std::string_view doc_text) {
  RepetitionProfile p;

  std::vector<std::string_view> lines;
  std::vector<std::string_view> paragraphs;
  std::size_t para_start = std::string_view::npos, para_end = 0;
  std::size_t pos = 0;
  while (pos <= doc_text.size()) {
    auto nl = doc_text.find('\n', pos);
    if (nl == std::string_view::npos) nl = doc_text.size();
    const auto line = doc_text.substr(pos, nl - pos);
    if (text::strip(line).empty()) {
      if (para_start != std::string_view::npos) {
        paragraphs.push_back(doc_text.substr(para_start, para_end - para_start));
        para_start = std::string_view::npos;
      }
    } else {
      lines.push_back(line);
      if (para_start == std::string_view::npos) para_start = pos;
      para_end = nl;
    }
    pos = nl + 1;
  }
  if (para_start != std::string_view::npos)
    paragraphs.push_back(doc_text.substr(para_start, para_end - para_start));

  if (lines.empty()) return p;

  const auto [dl, dlc] = detail::surplus(lines);
  p.dup_line_frac = static_cast<double>(dl) / static_cast<double>(lines.size());
  if (const auto lc = detail::total_chars(lines); lc > 0)
    p.dup_line_char_frac = static_cast<double>(dlc) / static_cast<double>(lc);
  const auto [dp, dpc] = detail::surplus(paragraphs);
  p.dup_para_frac = static_cast<double>(dp) / static_cast<double>(paragraphs.size());
  if (const auto pc = detail::total_chars(paragraphs); pc > 0)
    p.dup_para_char_frac = static_cast<double>(dpc) / static_cast<double>(pc);

  const auto words = text::split_words(doc_text);
  std::vector<std::uint32_t> ids(words.size());
  std::vector<std::size_t> wchars(words.size());
  std::size_t total = 0;
  {
    std::unordered_map<std::string_view, std::uint32_t> vocab;
    for (std::size_t i = 0; i < words.size(); ++i) {
      ids[i] = vocab.try_emplace(words[i], static_cast<std::uint32_t>(vocab.size())).first->second;
      wchars[i] = utf8::length(words[i]);
      total += wchars[i];
    }
  }
  if (total == 0) return p;

  auto ngram_key = [&](std::size_t start, int n) {
    std::u32string key(static_cast<std::size_t>(n), U'\0');
    for (std::size_t k = 0; k < key.size(); ++k) key[k] = static_cast<char32_t>(ids[start + k]);
    return key;
  };
  // Characters covered by word positions whose flag is set.
  auto covered = [&](const std::vector<char>& mark) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < mark.size(); ++i)
      if (mark[i]) c += wchars[i];
    return static_cast<double>(c) / static_cast<double>(total);
  };

  for (int n = kTopNgramMin; n <= kDupNgramMax; ++n) {
    const auto un = static_cast<std::size_t>(n);
    if (words.size() < un) continue;
    std::unordered_map<std::u32string, std::vector<std::size_t>> occurrences;
    for (std::size_t i = 0; i + un <= words.size(); ++i) occurrences[ngram_key(i, n)].push_back(i);

    if (n <= kTopNgramMax) {
      std::size_t best_count = 1;
      for (const auto& [k, starts] : occurrences) best_count = std::max(best_count, starts.size());
      if (best_count < 2) continue;
      double best = 0;
      for (const auto& [k, starts] : occurrences) {
        if (starts.size() != best_count) continue;
        std::vector<char> mark(words.size(), 0);
        for (auto s : starts) std::fill_n(mark.begin() + static_cast<std::ptrdiff_t>(s), un, 1);
        best = std::max(best, covered(mark));
      }
      p.top_ngram_char_frac[n] = best;
    } else {
      std::vector<char> mark(words.size(), 0);
      for (const auto& [k, starts] : occurrences) {
        if (starts.size() < 2) continue;
        for (auto s : starts) std::fill_n(mark.begin() + static_cast<std::ptrdiff_t>(s), un, 1);
      }
      p.dup_ngram_char_frac[n] = covered(mark);
    }
  }
  return p;
}

inline RepetitionProfile repetition_profile(const Document& doc) { return repetition_profile(doc.text); }

struct FilterDecision {
  bool keep = true;
  std::vector<std::string> reasons;  // empty iff keep
};

inline FilterDecision apply_quality_filter(const Document& doc, const RepetitionProfile& profile,
                                           const FilterConfig& config) {
  FilterDecision d;
  const auto words = text::word_count(doc.text);
  if (words < config.min_words)
    d.reasons.push_back("min_words: " + std::to_string(words) + " < " + std::to_string(config.min_words));
  if (words > config.max_words)
    d.reasons.push_back("max_words: " + std::to_string(words) + " > " + std::to_string(config.max_words));
  const auto observed = profile.fields();
  const auto limits = config.repetition_thresholds.fields();
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (observed[i].second > limits[i].second)
      d.reasons.push_back(observed[i].first + ": " + csv::number(observed[i].second) + " > " +
                          csv::number(limits[i].second));
  }
  d.keep = d.reasons.empty();
  return d;
}

inline nlohmann::json to_json(const std::string& id, const FilterDecision& d) {
  return {{"id", id}, {"keep", d.keep}, {"reasons", d.reasons}};
}

enum class DedupMode { exact, near };

struct DedupCluster {
  std::string kept_id;
  std::vector<std::string> removed_ids;
};

struct MatchedPair {
  std::string first_id;
  std::string second_id;
  double jaccard = 0;
};

struct DedupReport {
  DedupMode mode = DedupMode::exact;
  std::vector<std::string> removed_ids;
  std::vector<DedupCluster> clusters;
  std::optional<std::uint64_t> seed;  // near mode only
  std::vector<MatchedPair> pairs;     // verified near-duplicate pairs
};

struct DedupResult {
  Corpus corpus;
  DedupReport report;
};

// Header line followed by one line per cluster.
inline void write_dedup_report(const DedupReport& r, std::ostream& out) {
  const std::string mode = r.mode == DedupMode::exact ? "exact" : "near";
  nlohmann::json header = {{"mode", mode}, {"removed_count", r.removed_ids.size()},
                           {"cluster_count", r.clusters.size()}};
  if (r.seed) header["seed"] = *r.seed;
  out << header.dump() << '\n';
  for (const auto& c : r.clusters)
    out << nlohmann::json{{"mode", mode}, {"kept_id", c.kept_id}, {"removed_ids", c.removed_ids}}.dump() << '\n';
}

namespace detail {

// Groups docs by representative index (the smallest index in each group) and
// builds the surviving corpus plus report.
inline DedupResult collect_dedup(const Corpus& corpus, const std::vector<std::size_t>& rep, DedupMode mode) {
  DedupResult result;
  result.report.mode = mode;
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < rep.size(); ++i) {
    if (rep[i] == i) {
      result.corpus.docs.push_back(corpus.docs[i]);
    } else {
      groups[rep[i]].push_back(i);
      result.report.removed_ids.push_back(corpus.docs[i].id);
    }
  }
  for (const auto& [kept, removed] : groups) {
    DedupCluster c;
    c.kept_id = corpus.docs[kept].id;
    for (auto r : removed) c.removed_ids.push_back(corpus.docs[r].id);
    result.report.clusters.push_back(std::move(c));
  }
  return result;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  // The smaller index always becomes the root.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace detail

inline std::string exact_dedup_key(std::string_view text) { return text::lower(text::collapse_whitespace(text)); }

// First occurrence in corpus order survives. Matching uses lowercased,
// whitespace-collapsed text; surviving documents keep their original text.
inline DedupResult exact_dedup(const Corpus& corpus) {
  const auto n = corpus.docs.size();
  std::vector<std::string> keys(n);
  std::vector<std::uint64_t> hashes(n);
  detail::parallel_for(n, [&](std::size_t i) {
    keys[i] = exact_dedup_key(corpus.docs[i].text);
    hashes[i] = text::fnv1a64(keys[i]);
  });
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
  std::vector<std::size_t> rep(n);
  for (std::size_t i = 0; i < n; ++i) {
    rep[i] = i;
    auto& bucket = buckets[hashes[i]];
    for (auto k : bucket) {
      if (keys[k] == keys[i]) {
        rep[i] = k;
        break;
      }
    }
    if (rep[i] == i) bucket.push_back(i);
  }
  return detail::collect_dedup(corpus, rep, DedupMode::exact);
}

// Sorted, unique hashes of lowercased word shingles. Empty when the document
// has fewer than `n` words.
inline std::vector<std::uint64_t> shingle_hashes(std::string_view doc_text, int n) {
  const auto words = text::split_words(doc_text);
  std::vector<std::string> lowered;
  lowered.reserve(words.size());
  for (auto w : words) lowered.push_back(text::lower(w));
  std::vector<std::uint64_t> out;
  const auto un = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + un <= lowered.size(); ++i) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t k = 0; k < un; ++k) {
      if (k) h = text::fnv1a64(" ", h);
      h = text::fnv1a64(lowered[i + k], h);
    }
    out.push_back(h);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline double jaccard(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  if (a.empty() && b.empty()) return 0;
  std::size_t inter = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++inter;
      ++i;
      ++j;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

// Universal hash family ((a*x + b) mod (2^61 - 1)) drawn from the seed.
class MinHasher {
 public:
  MinHasher(int num_hashes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint64_t> dist(1, kPrime - 1);
    for (int i = 0; i < num_hashes; ++i) {
      a_.push_back(dist(rng));
      b_.push_back(dist(rng));
    }
  }

  std::vector<std::uint64_t> signature(const std::vector<std::uint64_t>& shingles) const {
    std::vector<std::uint64_t> sig(a_.size(), std::numeric_limits<std::uint64_t>::max());
    for (auto s : shingles) {
      const std::uint64_t x = text::mix64(s) % kPrime;
      for (std::size_t i = 0; i < a_.size(); ++i) {
        const auto h = static_cast<std::uint64_t>((static_cast<unsigned __int128>(a_[i]) * x + b_[i]) % kPrime);
        sig[i] = std::min(sig[i], h);
      }
    }
    return sig;
  }

 private:
  static constexpr std::uint64_t kPrime = (1ULL << 61) - 1;
  std::vector<std::uint64_t> a_, b_;
};

// MinHash signatures over word shingles, LSH banding for candidates, exact
// Jaccard verification, union-find grouping; earliest document survives.
inline DedupResult near_dedup(const Corpus& corpus, const FilterConfig& config) {
  config.validate();
  const auto& nd = config.near_dup;
  const auto n = corpus.docs.size();
  std::vector<std::vector<std::uint64_t>> shingles(n), sigs(n);
  const MinHasher hasher(nd.num_hashes, nd.seed);
  detail::parallel_for(n, [&](std::size_t i) {
    shingles[i] = shingle_hashes(corpus.docs[i].text, nd.shingle_n);
    if (!shingles[i].empty()) sigs[i] = hasher.signature(shingles[i]);
  });

  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  {
    std::unordered_set<std::uint64_t> seen_pairs;
    const auto rows = static_cast<std::size_t>(nd.rows);
    for (int b = 0; b < nd.bands; ++b) {
      std::map<std::uint64_t, std::vector<std::size_t>> buckets;
      for (std::size_t i = 0; i < n; ++i) {
        if (sigs[i].empty()) continue;
        std::uint64_t h = text::mix64(static_cast<std::uint64_t>(b));
        for (std::size_t r = 0; r < rows; ++r)
          h = text::mix64(h ^ sigs[i][static_cast<std::size_t>(b) * rows + r]);
        buckets[h].push_back(i);
      }
      for (const auto& [key, members] : buckets)
        for (std::size_t x = 0; x < members.size(); ++x)
          for (std::size_t y = x + 1; y < members.size(); ++y)
            if (seen_pairs.insert(members[x] * n + members[y]).second)
              candidates.emplace_back(members[x], members[y]);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  std::vector<double> sims(candidates.size());
  detail::parallel_for(candidates.size(), [&](std::size_t k) {
    sims[k] = jaccard(shingles[candidates[k].first], shingles[candidates[k].second]);
  });

  detail::UnionFind uf(n);
  std::vector<MatchedPair> matched;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (sims[k] < nd.jaccard_threshold) continue;
    const auto [a, b] = candidates[k];
    uf.unite(a, b);
    matched.push_back({corpus.docs[a].id, corpus.docs[b].id, sims[k]});
  }
  std::vector<std::size_t> rep(n);
  for (std::size_t i = 0; i < n; ++i) rep[i] = uf.find(i);
  auto result = detail::collect_dedup(corpus, rep, DedupMode::near);
  result.report.seed = nd.seed;
  result.report.pairs = std::move(matched);
  return result;
}

}  // namespace nusa
