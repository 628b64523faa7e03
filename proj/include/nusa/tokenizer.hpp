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

// Subword tokenizer with whole-word vocabulary expansion, multiple-of-64
// padding, and fertility (tokens per whitespace word) analytics.
//
// Encoding treats the text as if prefixed by one space. A space directly
// before a word becomes the word-start marker on that word's first piece;
// other whitespace is emitted as its own tokens. Pieces are matched greedily
// (longest first) within a word; characters with no matching piece fall back
// to one byte token per UTF-8 byte. Word tokens added by extend_vocab only
// match a complete marker-prefixed word, so adding them can never lengthen
// another word's segmentation.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "nusa/corpus.hpp"
#include "nusa/detail/csv.hpp"
#include "nusa/detail/parallel.hpp"
#include "nusa/detail/text.hpp"
#include "nusa/detail/utf8.hpp"
#include "nusa/error.hpp"

namespace nusa {

using TokenId = std::int32_t;

enum class TokenKind {
  normal,   // subword piece, matched greedily inside words
  byte,     // <0xHH> fallback
  control,  // specials and padding; never produced by encode
  word,     // whole-word piece added by vocabulary expansion
};

inline std::string_view to_string(TokenKind k) {
  switch (k) {
    case TokenKind::normal: return "normal";
    case TokenKind::byte: return "byte";
    case TokenKind::control: return "control";
    case TokenKind::word: return "word";
  }
  return "normal";
}

inline TokenKind parse_token_kind(std::string_view s) {
  if (s == "normal") return TokenKind::normal;
  if (s == "byte") return TokenKind::byte;
  if (s == "control") return TokenKind::control;
  if (s == "word") return TokenKind::word;
  throw DataError("unknown token kind \"" + std::string(s) + "\"");
}

struct Token {
  std::string piece;
  TokenKind kind = TokenKind::normal;

  friend bool operator==(const Token&, const Token&) = default;
};

inline std::string byte_piece(unsigned char b) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  return std::string("<0x") + kHex[b >> 4] + kHex[b & 0xF] + ">";
}

inline constexpr std::string_view kDefaultMarker = "\xE2\x96\x81";  // U+2581
inline constexpr std::size_t kByteFallbackCount = 256;
inline constexpr std::size_t kVocabAlignment = 64;

// Immutable ordered vocabulary; token id == position. Copies share storage.
class TokenizerModel {
 public:
  TokenizerModel(std::vector<Token> tokens, std::string marker = std::string(kDefaultMarker),
                 std::string version = "1")
      : impl_(std::make_shared<Impl>()) {
    impl_->tokens = std::move(tokens);
    impl_->marker = std::move(marker);
    impl_->version = std::move(version);
    if (impl_->marker.empty()) throw DataError("tokenizer: empty word-start marker");
    impl_->byte_ids.fill(-1);
    for (std::size_t i = 0; i < impl_->tokens.size(); ++i) {
      const auto& t = impl_->tokens[i];
      const auto id = static_cast<TokenId>(i);
      if (t.piece.empty()) throw DataError("tokenizer: empty piece at id " + std::to_string(i));
      if (!impl_->index.emplace(t.piece, id).second)
        throw DataError("tokenizer: duplicate piece \"" + t.piece + "\"");
      switch (t.kind) {
        case TokenKind::byte: {
          const auto b = parse_byte_piece(t.piece);
          if (!b) throw DataError("tokenizer: malformed byte piece \"" + t.piece + "\"");
          impl_->byte_ids[*b] = id;
          break;
        }
        case TokenKind::normal:
          impl_->normal.emplace(t.piece, id);
          impl_->max_piece_bytes = std::max(impl_->max_piece_bytes, t.piece.size());
          break;
        case TokenKind::word:
          impl_->words.emplace(t.piece, id);
          break;
        case TokenKind::control:
          break;
      }
    }
    for (std::size_t b = 0; b < kByteFallbackCount; ++b)
      if (impl_->byte_ids[b] < 0)
        throw DataError("tokenizer: missing byte fallback token " + byte_piece(static_cast<unsigned char>(b)));
  }

  // Control tokens, then the 256 byte tokens, then normal pieces.
  static TokenizerModel with_byte_fallback(const std::vector<std::string>& pieces,
                                           const std::vector<std::string>& controls = {"<unk>", "<s>", "</s>"},
                                           std::string marker = std::string(kDefaultMarker)) {
    std::vector<Token> tokens;
    tokens.reserve(controls.size() + kByteFallbackCount + pieces.size());
    for (const auto& c : controls) tokens.push_back({c, TokenKind::control});
    for (std::size_t b = 0; b < kByteFallbackCount; ++b)
      tokens.push_back({byte_piece(static_cast<unsigned char>(b)), TokenKind::byte});
    for (const auto& p : pieces) tokens.push_back({p, TokenKind::normal});
    return TokenizerModel(std::move(tokens), std::move(marker));
  }

  std::size_t size() const noexcept { return impl_->tokens.size(); }
  const std::vector<Token>& tokens() const noexcept { return impl_->tokens; }
  const Token& token(TokenId id) const { return impl_->tokens.at(static_cast<std::size_t>(id)); }
  const std::string& word_start_marker() const noexcept { return impl_->marker; }
  const std::string& version() const noexcept { return impl_->version; }
  std::size_t byte_fallback_count() const noexcept { return kByteFallbackCount; }

  std::optional<TokenId> find(std::string_view piece) const {
    auto it = impl_->index.find(piece);
    if (it == impl_->index.end()) return std::nullopt;
    return it->second;
  }
  bool contains(std::string_view piece) const { return find(piece).has_value(); }

  std::vector<TokenId> encode(std::string_view text) const;
  std::string decode(const std::vector<TokenId>& ids) const;

 private:
  struct Impl {
    std::vector<Token> tokens;
    std::string marker;
    std::string version;
    std::unordered_map<std::string_view, TokenId> index;
    std::unordered_map<std::string_view, TokenId> normal;
    std::unordered_map<std::string_view, TokenId> words;
    std::array<TokenId, kByteFallbackCount> byte_ids{};
    std::size_t max_piece_bytes = 0;
  };

  static std::optional<unsigned char> parse_byte_piece(std::string_view p) {
    if (p.size() != 6 || !p.starts_with("<0x") || p.back() != '>') return std::nullopt;
    auto hex = [](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      return -1;
    };
    const int hi = hex(p[3]), lo = hex(p[4]);
    if (hi < 0 || lo < 0) return std::nullopt;
    return static_cast<unsigned char>(hi * 16 + lo);
  }

  void emit_bytes(std::string_view s, std::vector<TokenId>& out) const {
    for (unsigned char c : s) out.push_back(impl_->byte_ids[c]);
  }

  void emit_whitespace(std::string_view ws, std::vector<TokenId>& out) const {
    for (std::size_t i = 0; i < ws.size();) {
      const auto len = utf8::decode_one(ws, i).len;
      const auto ch = ws.substr(i, len);
      if (ch == " ") {
        auto it = impl_->normal.find(impl_->marker);
        if (it != impl_->normal.end()) {
          out.push_back(it->second);
        } else {
          emit_bytes(ch, out);
        }
      } else if (auto it = impl_->normal.find(ch); it != impl_->normal.end()) {
        out.push_back(it->second);
      } else {
        emit_bytes(ch, out);
      }
      i += len;
    }
  }

  // Greedy longest match over `seg`. When `virtual_marker` is set, seg starts
  // with the marker standing for a space.
  void emit_segment(std::string_view seg, bool virtual_marker, std::vector<TokenId>& out) const {
    const std::size_t mlen = impl_->marker.size();
    std::vector<std::size_t> ends;
    for (std::size_t i = 0; i < seg.size();) {
      // Candidate end offsets at character boundaries, longest first.
      ends.clear();
      std::size_t j = i;
      if (virtual_marker && i == 0) {
        j = mlen;
        ends.push_back(j);
      }
      while (j < seg.size() && j - i < impl_->max_piece_bytes) {
        j += utf8::decode_one(seg, j).len;
        if (j - i <= impl_->max_piece_bytes) ends.push_back(j);
      }
      bool matched = false;
      for (auto e = ends.rbegin(); e != ends.rend(); ++e) {
        auto it = impl_->normal.find(seg.substr(i, *e - i));
        if (it != impl_->normal.end()) {
          out.push_back(it->second);
          i = *e;
          matched = true;
          break;
        }
      }
      if (matched) continue;
      if (virtual_marker && i == 0) {
        emit_bytes(" ", out);
        i = mlen;
      } else {
        const auto len = utf8::decode_one(seg, i).len;
        emit_bytes(seg.substr(i, len), out);
        i += len;
      }
    }
  }

  void emit_word(std::string_view word, bool marker_prefixed, std::vector<TokenId>& out) const {
    const auto& marker = impl_->marker;
    const bool has_literal_marker = word.find(marker) != std::string_view::npos;
    if (marker_prefixed && !has_literal_marker && !impl_->words.empty()) {
      auto it = impl_->words.find(marker + std::string(word));
      if (it != impl_->words.end()) {
        out.push_back(it->second);
        return;
      }
    }
    // Literal marker characters in the input always go through byte fallback
    // so they never decode as spaces.
    bool first = true;
    std::size_t pos = 0;
    while (true) {
      const auto hit = word.find(marker, pos);
      const auto part = word.substr(pos, hit == std::string_view::npos ? std::string_view::npos : hit - pos);
      if (first && marker_prefixed) {
        emit_segment(marker + std::string(part), true, out);
      } else if (!part.empty()) {
        emit_segment(part, false, out);
      }
      first = false;
      if (hit == std::string_view::npos) break;
      emit_bytes(marker, out);
      pos = hit + marker.size();
    }
  }

  std::shared_ptr<Impl> impl_;
};

inline std::vector<TokenId> TokenizerModel::encode(std::string_view text) const {
  std::vector<TokenId> out;
  if (text.empty()) return out;
  const std::string padded = " " + std::string(text);
  const std::string_view s = padded;
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t ws_begin = i;
    while (i < s.size()) {
      const auto d = utf8::decode_one(s, i);
      if (!text::is_space(d.cp)) break;
      i += d.len;
    }
    const std::size_t word_begin = i;
    while (i < s.size()) {
      const auto d = utf8::decode_one(s, i);
      if (text::is_space(d.cp)) break;
      i += d.len;
    }
    auto ws = s.substr(ws_begin, word_begin - ws_begin);
    const auto word = s.substr(word_begin, i - word_begin);
    if (word.empty()) {
      emit_whitespace(ws, out);
      break;
    }
    const bool marker_prefixed = ws.ends_with(' ');
    if (marker_prefixed) ws.remove_suffix(1);
    emit_whitespace(ws, out);
    emit_word(word, marker_prefixed, out);
  }
  return out;
}

inline std::string TokenizerModel::decode(const std::vector<TokenId>& ids) const {
  std::string out;
  for (auto id : ids) {
    const auto& t = token(id);
    switch (t.kind) {
      case TokenKind::byte:
        out.push_back(static_cast<char>(*parse_byte_piece(t.piece)));
        break;
      case TokenKind::control:
        break;
      case TokenKind::normal:
      case TokenKind::word:
        out += text::replace_all(t.piece, impl_->marker, " ");
        break;
    }
  }
  if (!out.empty() && out.front() == ' ') out.erase(0, 1);
  return out;
}

inline std::vector<TokenId> encode(const TokenizerModel& model, std::string_view text) { return model.encode(text); }
inline std::string decode(const TokenizerModel& model, const std::vector<TokenId>& ids) { return model.decode(ids); }

// --- model file -----------------------------------------------------------
// Line 1: JSON header. Then one JSON object per token, in id order, with
// non-ASCII escaped.

inline constexpr std::string_view kTokenizerFormat = "nusa-tokenizer";
inline constexpr int kTokenizerFormatVersion = 1;

inline void save_tokenizer(const TokenizerModel& model, std::ostream& out) {
  const nlohmann::json header = {
      {"format", kTokenizerFormat},
      {"format_version", kTokenizerFormatVersion},
      {"version", model.version()},
      {"word_start_marker", model.word_start_marker()},
      {"byte_fallback_count", model.byte_fallback_count()},
      {"vocab_size", model.size()},
  };
  out << header.dump(-1, ' ', true) << '\n';
  for (const auto& t : model.tokens())
    out << nlohmann::json{{"piece", t.piece}, {"kind", to_string(t.kind)}}.dump(-1, ' ', true) << '\n';
}

inline void save_tokenizer(const TokenizerModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  save_tokenizer(model, out);
}

inline TokenizerModel load_tokenizer(std::istream& in, const std::string& name = "<stream>") {
  std::string line;
  if (!std::getline(in, line)) throw DataError(name + ": empty tokenizer file");
  try {
    const auto header = nlohmann::json::parse(line);
    if (header.value("format", "") != kTokenizerFormat)
      throw DataError(name + ": not a tokenizer file (bad format tag)");
    if (header.value("format_version", 0) != kTokenizerFormatVersion)
      throw DataError(name + ": unsupported tokenizer format version");
    const auto marker = header.at("word_start_marker").get<std::string>();
    const auto version = header.at("version").get<std::string>();
    const auto expected = header.at("vocab_size").get<std::size_t>();
    std::vector<Token> tokens;
    tokens.reserve(expected);
    for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
      if (line.empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        tokens.push_back({j.at("piece").get<std::string>(), parse_token_kind(j.at("kind").get<std::string>())});
      } catch (const nlohmann::json::exception& e) {
        throw DataError(name + ":" + std::to_string(lineno) + ": malformed token: " + e.what());
      }
    }
    if (tokens.size() != expected)
      throw DataError(name + ": header says " + std::to_string(expected) + " tokens, found " +
                      std::to_string(tokens.size()));
    return TokenizerModel(std::move(tokens), marker, version);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(name + ": malformed header: " + e.what());
  }
}

inline TokenizerModel load_tokenizer(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return load_tokenizer(in, path.string());
}

// --- vocabulary expansion ---------------------------------------------------

struct WordFrequencyTable {
  LanguageTag lang;
  std::map<std::string, std::size_t> counts;
};

inline WordFrequencyTable word_frequencies(const Corpus& corpus, const LanguageTag& lang) {
  WordFrequencyTable table{lang, {}};
  for (const auto& d : corpus.docs) {
    if (!(d.lang == lang)) continue;
    for (auto w : text::split_words(d.text)) ++table.counts[text::lower(w)];
  }
  return table;
}

inline WordFrequencyTable merge_tables(const std::vector<WordFrequencyTable>& tables, LanguageTag lang) {
  WordFrequencyTable out{std::move(lang), {}};
  for (const auto& t : tables)
    for (const auto& [w, c] : t.counts) out.counts[w] += c;
  return out;
}

// Top-n words (count descending, then lexicographic) whose marker-prefixed
// form is not already a token.
inline std::vector<std::string> select_new_words(const WordFrequencyTable& table, const TokenizerModel& model,
                                                 std::size_t n) {
  std::vector<std::pair<std::string, std::size_t>> ranked;
  const auto& marker = model.word_start_marker();
  for (const auto& [w, c] : table.counts) {
    if (w.empty() || c == 0 || w.find(marker) != std::string::npos) continue;
    if (model.contains(marker + w)) continue;
    ranked.emplace_back(w, c);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > n) ranked.resize(n);
  std::vector<std::string> out;
  out.reserve(ranked.size());
  for (auto& [w, c] : ranked) out.push_back(std::move(w));
  return out;
}

inline std::string padding_piece(std::size_t k) { return "<pad_extra_" + std::to_string(k) + ">"; }

inline std::size_t round_up_to_multiple(std::size_t n, std::size_t m) { return (n + m - 1) / m * m; }

// Appends absent words as whole-word tokens, then reserved padding tokens
// until the vocabulary size is the least multiple of 64 at or above it.
inline TokenizerModel extend_vocab(const TokenizerModel& model, const std::vector<std::string>& words) {
  {
    std::unordered_set<std::string_view> seen;
    for (const auto& w : words)
      if (!seen.insert(w).second) throw std::invalid_argument("extend_vocab: duplicate word \"" + w + "\"");
  }
  std::vector<Token> tokens = model.tokens();
  const auto& marker = model.word_start_marker();
  for (const auto& w : words) {
    if (w.empty()) continue;
    const std::string piece = marker + w;
    if (model.contains(piece)) continue;
    tokens.push_back({piece, TokenKind::word});
  }
  const auto target = round_up_to_multiple(tokens.size(), kVocabAlignment);
  std::size_t k = 0;
  while (tokens.size() < target) {
    while (model.contains(padding_piece(k))) ++k;
    tokens.push_back({padding_piece(k++), TokenKind::control});
  }
  return TokenizerModel(std::move(tokens), marker, model.version());
}

// --- fertility ----------------------------------------------------------------

struct FertilityStats {
  std::size_t token_count = 0;
  std::size_t word_count = 0;

  // Absent when no words were seen.
  std::optional<double> mean_fertility() const {
    if (word_count == 0) return std::nullopt;
    return static_cast<double>(token_count) / static_cast<double>(word_count);
  }

  FertilityStats& operator+=(const FertilityStats& o) {
    token_count += o.token_count;
    word_count += o.word_count;
    return *this;
  }
  friend bool operator==(const FertilityStats&, const FertilityStats&) = default;
};

struct FertilityReport {
  std::map<LanguageTag, FertilityStats> per_lang;
  FertilityStats overall;

  // Micro-average over the languages accepted by `pred`.
  template <typename Pred>
  FertilityStats group(Pred pred) const {
    FertilityStats s;
    for (const auto& [l, st] : per_lang)
      if (pred(l)) s += st;
    return s;
  }
};

inline FertilityReport fertility(const TokenizerModel& model, const Corpus& corpus) {
  std::vector<FertilityStats> per_doc(corpus.docs.size());
  detail::parallel_for(corpus.docs.size(), [&](std::size_t i) {
    per_doc[i].token_count = model.encode(corpus.docs[i].text).size();
    per_doc[i].word_count = text::word_count(corpus.docs[i].text);
  });
  FertilityReport r;
  for (std::size_t i = 0; i < per_doc.size(); ++i) {
    r.per_lang[corpus.docs[i].lang] += per_doc[i];
    r.overall += per_doc[i];
  }
  return r;
}

// 100 * (base - new) / base, rounded to two decimals.
inline double improvement_percent(double base_mean, double new_mean) {
  return std::round(100.0 * (base_mean - new_mean) / base_mean * 100.0) / 100.0;
}

inline std::map<LanguageTag, double> fertility_improvement(const FertilityReport& base, const FertilityReport& updated) {
  std::map<LanguageTag, double> out;
  for (const auto& [l, b] : base.per_lang) {
    auto it = updated.per_lang.find(l);
    if (it == updated.per_lang.end()) continue;
    const auto bm = b.mean_fertility();
    const auto nm = it->second.mean_fertility();
    if (!bm || !nm) continue;
    out[l] = improvement_percent(*bm, *nm);
  }
  return out;
}

struct FertilityRow {
  std::string model_name;
  FertilityReport report;
  std::size_t vocab_size = 0;
};

// Columns follow the fertility comparison table: mean fertility for
// Indonesian, regional languages (pooled) and English, vocabulary size, and
// improvement over the first row.
inline void write_fertility_csv(const std::vector<FertilityRow>& rows, std::ostream& out) {
  using Group = bool (*)(const LanguageTag&);
  const std::array<std::pair<const char*, Group>, 3> groups{{
      {"indonesian", [](const LanguageTag& l) { return l.code() == Language::indonesian; }},
      {"regional", [](const LanguageTag& l) { return l.is_regional(); }},
      {"english", [](const LanguageTag& l) { return l.code() == Language::english; }},
  }};
  out << "model";
  for (const auto& g : groups) out << ",mean_fertility_" << g.first;
  out << ",vocab_size";
  for (const auto& g : groups) out << ",improvement_pct_" << g.first;
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << csv::field(rows[r].model_name);
    for (const auto& g : groups) {
      const auto m = rows[r].report.group(g.second).mean_fertility();
      out << ',' << (m ? csv::fixed(*m, 3) : "");
    }
    out << ',' << rows[r].vocab_size;
    for (const auto& g : groups) {
      out << ',';
      if (r == 0) {
        out << "--";
        continue;
      }
      const auto b = rows[0].report.group(g.second).mean_fertility();
      const auto m = rows[r].report.group(g.second).mean_fertility();
      if (b && m) out << csv::fixed(improvement_percent(*b, *m), 2);
    }
    out << '\n';
  }
}

}  // namespace nusa
