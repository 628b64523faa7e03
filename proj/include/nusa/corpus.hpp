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

// Corpus ingestion: language tags, documents, jsonl/text_dir loading,
// rule-based sentence splitting and per-language statistics.

#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>
#include <unicode/uchar.h>

#include "nusa/detail/text.hpp"
#include "nusa/detail/utf8.hpp"
#include "nusa/error.hpp"

namespace nusa {

enum class Language {
  english,
  indonesian,
  acehnese,
  balinese,
  banjarese,
  buginese,
  dayak_ngaju,
  javanese,
  lampungnese,
  madurese,
  minangkabau,
  sundanese,
  toba_batak,
  other,
};

namespace detail {

struct LanguageInfo {
  Language code;
  std::string_view name;
  std::string_view iso;
};

inline constexpr std::array<LanguageInfo, 13> kLanguages{{
    {Language::english, "english", "en"},
    {Language::indonesian, "indonesian", "id"},
    {Language::acehnese, "acehnese", "ace"},
    {Language::balinese, "balinese", "ban"},
    {Language::banjarese, "banjarese", "bjn"},
    {Language::buginese, "buginese", "bug"},
    {Language::dayak_ngaju, "dayak_ngaju", "nij"},
    {Language::javanese, "javanese", "jv"},
    {Language::lampungnese, "lampungnese", "ljp"},
    {Language::madurese, "madurese", "mad"},
    {Language::minangkabau, "minangkabau", "min"},
    {Language::sundanese, "sundanese", "su"},
    {Language::toba_batak, "toba_batak", "bbc"},
}};

}  // namespace detail

// One of the thirteen supported languages, or `other` carrying a free label.
class LanguageTag {
 public:
  LanguageTag() = default;
  explicit LanguageTag(Language code) : code_(code) {}

  static LanguageTag other(std::string label) {
    LanguageTag t(Language::other);
    t.label_ = std::move(label);
    return t;
  }

  // Accepts canonical names ("dayak_ngaju", "Dayak Ngaju", "toba-batak") and
  // ISO 639 codes. Anything else becomes `other` with the input as label.
  static LanguageTag parse(std::string_view raw) {
    const std::string trimmed(text::strip(raw));
    std::string key = text::lower(trimmed);
    std::replace(key.begin(), key.end(), ' ', '_');
    std::replace(key.begin(), key.end(), '-', '_');
    static const std::map<std::string, Language, std::less<>> kAliases = {
        {"eng", Language::english},      {"ind", Language::indonesian},
        {"jav", Language::javanese},     {"sun", Language::sundanese},
        {"ace", Language::acehnese},     {"bali", Language::balinese},
        {"banjar", Language::banjarese}, {"bugis", Language::buginese},
        {"ngaju", Language::dayak_ngaju}, {"lampung", Language::lampungnese},
        {"madura", Language::madurese},  {"minang", Language::minangkabau},
        {"batak_toba", Language::toba_batak},
    };
    for (const auto& info : detail::kLanguages)
      if (key == info.name || key == info.iso) return LanguageTag(info.code);
    if (auto it = kAliases.find(key); it != kAliases.end()) return LanguageTag(it->second);
    return other(trimmed);
  }

  Language code() const noexcept { return code_; }

  std::string name() const {
    if (code_ == Language::other) return label_;
    return std::string(detail::kLanguages[static_cast<std::size_t>(code_)].name);
  }

  // Code sent to translation engines.
  std::string iso() const {
    if (code_ == Language::other) return label_;
    return std::string(detail::kLanguages[static_cast<std::size_t>(code_)].iso);
  }

  bool is_regional() const noexcept {
    return code_ != Language::english && code_ != Language::indonesian && code_ != Language::other;
  }

  friend bool operator==(const LanguageTag& a, const LanguageTag& b) {
    return a.code_ == b.code_ && a.label_ == b.label_;
  }
  friend bool operator<(const LanguageTag& a, const LanguageTag& b) { return a.name() < b.name(); }

 private:
  Language code_ = Language::other;
  std::string label_;
};

inline LanguageTag lang(Language code) { return LanguageTag(code); }

// The thirteen named languages in declaration order.
inline std::vector<LanguageTag> all_languages() {
  std::vector<LanguageTag> out;
  for (const auto& info : detail::kLanguages) out.emplace_back(info.code);
  return out;
}

struct Document {
  std::string id;
  std::string text;
  LanguageTag lang;
  std::string source;
  std::map<std::string, std::string> meta;

  friend bool operator==(const Document&, const Document&) = default;
};

struct CorpusStats {
  std::size_t doc_count = 0;
  std::size_t word_count = 0;
  std::size_t char_count = 0;
  std::map<LanguageTag, std::size_t> word_count_by_lang;
  std::map<LanguageTag, std::size_t> char_count_by_lang;

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

struct Corpus {
  std::vector<Document> docs;
  std::optional<CorpusStats> stats_cache;

  std::size_t size() const noexcept { return docs.size(); }
  bool empty() const noexcept { return docs.empty(); }
};

// Counts over whitespace words and Unicode scalar values.
inline CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats s;
  s.doc_count = corpus.docs.size();
  for (const auto& d : corpus.docs) {
    const auto words = text::word_count(d.text);
    const auto chars = utf8::length(d.text);
    s.word_count += words;
    s.char_count += chars;
    s.word_count_by_lang[d.lang] += words;
    s.char_count_by_lang[d.lang] += chars;
  }
  return s;
}

inline Corpus with_stats(Corpus corpus) {
  corpus.stats_cache = corpus_stats(corpus);
  return corpus;
}

inline void require_unique_ids(const Corpus& corpus) {
  std::unordered_set<std::string_view> seen;
  for (const auto& d : corpus.docs)
    if (!seen.insert(d.id).second) throw DataError("duplicate document id \"" + d.id + "\"");
}

// Ingestion normalization: strip a leading BOM, CRLF/CR to LF, NFC, and trim
// trailing whitespace on every line.
inline std::string normalize_text(std::string_view raw) {
  if (raw.starts_with("\xEF\xBB\xBF")) raw.remove_prefix(3);
  std::string lf;
  lf.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == '\r') {
      lf += '\n';
      if (i + 1 < raw.size() && raw[i + 1] == '\n') ++i;
    } else {
      lf += raw[i];
    }
  }
  const std::string composed = text::nfc(lf);
  std::string out;
  out.reserve(composed.size());
  std::size_t line_start = 0;
  while (line_start <= composed.size()) {
    auto nl = composed.find('\n', line_start);
    const bool last = nl == std::string::npos;
    if (last) nl = composed.size();
    std::string_view line(composed.data() + line_start, nl - line_start);
    // Trailing whitespace only; a line is never trimmed into the next one.
    std::size_t end = line.size();
    while (end > 0) {
      std::size_t k = end - 1;
      while (k > 0 && (static_cast<unsigned char>(line[k]) & 0xC0) == 0x80) --k;
      if (!text::is_space(utf8::decode_one(line, k).cp)) break;
      end = k;
    }
    out.append(line.substr(0, end));
    if (last) break;
    out += '\n';
    line_start = nl + 1;
  }
  return out;
}

// jsonl record <-> Document. Keys other than id/text/lang/source/meta are
// preserved into meta (non-string values as their JSON text).
inline Document document_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("record is not a JSON object");
  for (const char* key : {"id", "text", "lang"}) {
    if (!j.contains(key)) throw DataError(std::string("missing key \"") + key + "\"");
    if (!j[key].is_string()) throw DataError(std::string("key \"") + key + "\" is not a string");
  }
  Document d;
  d.id = j["id"].get<std::string>();
  if (d.id.empty()) throw DataError("empty id");
  d.text = normalize_text(j["text"].get<std::string>());
  if (text::strip(d.text).empty()) throw DataError("document \"" + d.id + "\" has empty text");
  d.lang = LanguageTag::parse(j["lang"].get<std::string>());
  if (j.contains("source")) {
    if (!j["source"].is_string()) throw DataError("key \"source\" is not a string");
    d.source = j["source"].get<std::string>();
  }
  auto put_meta = [&](const std::string& k, const nlohmann::json& v) {
    d.meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
  };
  if (j.contains("meta")) {
    if (!j["meta"].is_object()) throw DataError("key \"meta\" is not an object");
    for (const auto& [k, v] : j["meta"].items()) put_meta(k, v);
  }
  for (const auto& [k, v] : j.items())
    if (k != "id" && k != "text" && k != "lang" && k != "source" && k != "meta") put_meta(k, v);
  return d;
}

inline nlohmann::json document_to_json(const Document& d) {
  nlohmann::json j = {{"id", d.id}, {"text", d.text}, {"lang", d.lang.name()}};
  if (!d.source.empty()) j["source"] = d.source;
  if (!d.meta.empty()) j["meta"] = d.meta;
  return j;
}

enum class CorpusFormat { jsonl, text_dir };

inline CorpusFormat parse_corpus_format(std::string_view s) {
  if (s == "jsonl") return CorpusFormat::jsonl;
  if (s == "text_dir") return CorpusFormat::text_dir;
  throw ConfigError("unknown corpus format \"" + std::string(s) + "\"");
}

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Corpus load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  Corpus corpus;
  std::unordered_set<std::string> ids;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::strip(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    Document doc;
    try {
      doc = document_from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + ": malformed record: " + e.what());
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    if (!ids.insert(doc.id).second)
      throw DataError(where + ": duplicate document id \"" + doc.id + "\"");
    corpus.docs.push_back(std::move(doc));
  }
  return corpus;
}

// One document per regular file, ordered by relative path. An optional
// `_langs.json` sidecar ({"default": "...", "files": {"a.txt": "javanese"}})
// assigns languages; files without an entry get the default, else `other`.
inline Corpus load_text_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  constexpr std::string_view kSidecar = "_langs.json";
  LanguageTag fallback = LanguageTag::other("other");
  std::map<std::string, std::string> file_langs;
  if (fs::exists(dir / kSidecar)) {
    try {
      const auto j = nlohmann::json::parse(read_file(dir / kSidecar));
      if (j.contains("default")) fallback = LanguageTag::parse(j.at("default").get<std::string>());
      if (j.contains("files")) file_langs = j.at("files").get<std::map<std::string, std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError((dir / kSidecar).string() + ": " + e.what());
    }
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().filename() != kSidecar) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  Corpus corpus;
  for (const auto& f : files) {
    const std::string rel = fs::relative(f, dir).generic_string();
    const std::string raw = read_file(f);
    if (!utf8::is_valid(raw)) throw DataError(f.string() + ": invalid UTF-8");
    Document d;
    d.id = rel;
    d.text = normalize_text(raw);
    if (text::strip(d.text).empty()) throw DataError(f.string() + ": empty text");
    auto it = file_langs.find(rel);
    d.lang = it == file_langs.end() ? fallback : LanguageTag::parse(it->second);
    d.source = rel;
    corpus.docs.push_back(std::move(d));
  }
  return corpus;
}

}  // namespace detail

inline Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format = CorpusFormat::jsonl) {
  if (!std::filesystem::exists(path)) throw DataError("no such path: " + path.string());
  return format == CorpusFormat::jsonl ? detail::load_jsonl(path) : detail::load_text_dir(path);
}

inline void write_corpus_jsonl(const Corpus& corpus, std::ostream& out) {
  for (const auto& d : corpus.docs) out << document_to_json(d).dump() << '\n';
}

inline void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  write_corpus_jsonl(corpus, out);
}

inline const std::vector<std::string>& default_abbreviations() {
  static const std::vector<std::string> kList = {
      "Dr.", "dr.", "No.", "no.", "Prof.", "prof.", "Mr.", "Mrs.", "Ms.",
      "Jl.", "Bpk.", "Sdr.", "Sdri.", "Ir.", "Tn.", "Ny.", "St.", "vs.",
  };
  return kList;
}

// Splits after a word ending in '.', '!' or '?' unless that word is a listed
// abbreviation or a single-letter initial ("B."). Sentences are the words
// rejoined with single spaces.
inline std::vector<std::string> split_sentences(
    std::string_view text, const LanguageTag& /*lang*/ = {},
    const std::vector<std::string>& abbreviations = default_abbreviations()) {
  const auto words = text::split_words(text);
  std::vector<std::string> sentences;
  std::vector<std::string_view> current;
  auto is_initial = [](std::string_view w) {
    if (!w.ends_with('.')) return false;
    const auto cps = utf8::to_u32(w.substr(0, w.size() - 1));
    return cps.size() == 1 && u_isalpha(static_cast<UChar32>(cps[0]));
  };
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto w = words[i];
    current.push_back(w);
    const char last = w.back();
    if (last != '.' && last != '!' && last != '?') continue;
    if (last == '.' && (is_initial(w) ||
                        std::find(abbreviations.begin(), abbreviations.end(), w) != abbreviations.end()))
      continue;
    sentences.push_back(text::join(current, " "));
    current.clear();
  }
  if (!current.empty()) sentences.push_back(text::join(current, " "));
  return sentences;
}

}  // namespace nusa
