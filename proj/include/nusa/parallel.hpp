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

// Alternate-parallel bilingual documents: sentence-aligned translation pairs
// interleaved so consecutive sentences switch language.

#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nusa/corpus.hpp"
#include "nusa/detail/parallel.hpp"
#include "nusa/detail/text.hpp"
#include "nusa/error.hpp"

namespace nusa {

class TranslationClient {
 public:
  virtual ~TranslationClient() = default;
  virtual std::string translate(const std::string& text, const LanguageTag& src, const LanguageTag& tgt) = 0;
};

// Offline, deterministic: "⟦<target>⟧" + text.
class StubTranslator final : public TranslationClient {
 public:
  static std::string prefix(const LanguageTag& tgt) { return "\xE2\x9F\xA6" + tgt.name() + "\xE2\x9F\xA7"; }

  std::string translate(const std::string& text, const LanguageTag& /*src*/, const LanguageTag& tgt) override {
    return prefix(tgt) + text;
  }

  // Recovers the source text of a stub translation.
  static std::optional<std::string> invert(std::string_view translated, const LanguageTag& tgt) {
    const auto p = prefix(tgt);
    if (!translated.starts_with(p)) return std::nullopt;
    return std::string(translated.substr(p.size()));
  }
};

// Write-through cache keyed by (source, target, hash(text)). The full text is
// stored alongside the hash, so collisions never return a wrong entry. New
// entries are buffered and appended to the cache file in key order on
// flush(), which keeps the file identical across runs regardless of thread
// scheduling.
class CachedTranslator final : public TranslationClient {
 public:
  explicit CachedTranslator(TranslationClient& inner, std::optional<std::filesystem::path> file = std::nullopt)
      : inner_(inner), file_(std::move(file)) {
    if (file_ && std::filesystem::exists(*file_)) load(*file_);
  }

  ~CachedTranslator() override {
    try {
      flush();
    } catch (...) {
    }
  }

  std::string translate(const std::string& text, const LanguageTag& src, const LanguageTag& tgt) override {
    Key key{src.name(), tgt.name(), text};
    {
      std::lock_guard lock(mu_);
      if (auto it = entries_.find(key); it != entries_.end()) {
        ++hits_;
        return it->second;
      }
    }
    std::string out = inner_.translate(text, src, tgt);
    std::lock_guard lock(mu_);
    auto [it, inserted] = entries_.emplace(key, std::move(out));
    if (inserted) pending_.push_back(key);
    return it->second;
  }

  void flush() {
    std::lock_guard lock(mu_);
    if (pending_.empty() || !file_) {
      pending_.clear();
      return;
    }
    std::sort(pending_.begin(), pending_.end());
    std::ofstream out(*file_, std::ios::binary | std::ios::app);
    if (!out) throw DataError("cannot write translation cache " + file_->string());
    for (const auto& key : pending_) {
      const auto& [src, tgt, text] = key;
      out << nlohmann::json{{"src", src},
                            {"tgt", tgt},
                            {"hash", text::hex64(text::fnv1a64(text))},
                            {"text", text},
                            {"translation", entries_.at(key)}}
                 .dump()
          << '\n';
    }
    pending_.clear();
  }

  std::size_t hits() const {
    std::lock_guard lock(mu_);
    return hits_;
  }
  std::size_t size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
  }

 private:
  using Key = std::tuple<std::string, std::string, std::string>;

  void load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read translation cache " + path.string());
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
      if (line.empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        Key key{j.at("src").get<std::string>(), j.at("tgt").get<std::string>(), j.at("text").get<std::string>()};
        entries_.emplace(std::move(key), j.at("translation").get<std::string>());
      } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": malformed cache entry: " + e.what());
      }
    }
  }

  TranslationClient& inner_;
  std::optional<std::filesystem::path> file_;
  mutable std::mutex mu_;
  std::map<Key, std::string> entries_;
  std::vector<Key> pending_;
  std::size_t hits_ = 0;
};

struct RetryPolicy {
  int retries = 3;
  std::chrono::milliseconds base_delay{200};
};

// Calls fn, retrying TransportError with exponential backoff.
template <typename Fn>
auto with_retries(const RetryPolicy& policy, Fn&& fn) -> decltype(fn()) {
  auto delay = policy.base_delay;
  for (int attempt = 0;; ++attempt) {
    try {
      return fn();
    } catch (const TransportError&) {
      if (attempt >= policy.retries) throw;
      if (delay.count() > 0) std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
}

class TranslationError : public TransportError {
 public:
  TranslationError(std::size_t sentence_index, const std::string& what, const std::string& context = {})
      : TransportError(context + "sentence " + std::to_string(sentence_index) + ": " + what),
        index_(sentence_index),
        cause_(what) {}
  const std::string& cause() const noexcept { return cause_; }
  std::size_t sentence_index() const noexcept { return index_; }

 private:
  std::size_t index_;
  std::string cause_;
};

struct TranslationSettings {
  unsigned concurrency = 4;
  RetryPolicy retry;
};

enum class PairOrigin { aligned_corpus, machine_translated };

inline std::string_view to_string(PairOrigin o) {
  return o == PairOrigin::aligned_corpus ? "aligned_corpus" : "machine_translated";
}

struct ParallelPair {
  LanguageTag src_lang, tgt_lang;
  std::vector<std::string> src_sentences, tgt_sentences;
  PairOrigin origin = PairOrigin::machine_translated;
  std::string source_doc_id;
};

struct TaggedSentence {
  std::string text;
  LanguageTag lang;

  friend bool operator==(const TaggedSentence&, const TaggedSentence&) = default;
};

struct AlternatingDocument {
  std::vector<TaggedSentence> sentences;
  std::pair<LanguageTag, LanguageTag> pattern;  // (start, other)
  std::string source_doc_id;
};

// Translates each sentence independently, at most `concurrency` in flight.
inline std::vector<std::string> translate_sentences(const std::vector<std::string>& sentences,
                                                    const LanguageTag& src, const LanguageTag& tgt,
                                                    TranslationClient& client, const TranslationSettings& settings) {
  std::vector<std::string> out(sentences.size());
  detail::parallel_for(
      sentences.size(),
      [&](std::size_t i) {
        try {
          out[i] = with_retries(settings.retry, [&] { return client.translate(sentences[i], src, tgt); });
        } catch (const std::exception& e) {
          throw TranslationError(i, e.what());
        }
      },
      std::max(1u, settings.concurrency));
  return out;
}

inline ParallelPair make_pair(const Document& doc, const LanguageTag& tgt, TranslationClient& client,
                              const TranslationSettings& settings = {}) {
  if (doc.lang == tgt) throw std::invalid_argument("make_pair: document is already in " + tgt.name());
  auto sentences = split_sentences(doc.text, doc.lang);
  if (sentences.empty()) throw DataError("make_pair: document \"" + doc.id + "\" has no sentences");
  ParallelPair pair;
  pair.src_lang = doc.lang;
  pair.tgt_lang = tgt;
  pair.tgt_sentences = translate_sentences(sentences, doc.lang, tgt, client, settings);
  pair.src_sentences = std::move(sentences);
  pair.origin = PairOrigin::machine_translated;
  pair.source_doc_id = doc.id;
  return pair;
}

// Sentence i comes from the start language when i is even, else from the
// other language.
inline AlternatingDocument build_alternating(const ParallelPair& pair, const LanguageTag& start) {
  const bool from_src = start == pair.src_lang;
  if (!from_src && !(start == pair.tgt_lang))
    throw std::invalid_argument("build_alternating: start language not in pair");
  if (pair.src_sentences.size() != pair.tgt_sentences.size())
    throw DataError("build_alternating: pair is not sentence-aligned");
  const auto& first = from_src ? pair.src_sentences : pair.tgt_sentences;
  const auto& second = from_src ? pair.tgt_sentences : pair.src_sentences;
  const auto& other = from_src ? pair.tgt_lang : pair.src_lang;
  AlternatingDocument doc;
  doc.pattern = {start, other};
  doc.source_doc_id = pair.source_doc_id;
  for (std::size_t i = 0; i < first.size(); ++i)
    doc.sentences.push_back(i % 2 == 0 ? TaggedSentence{first[i], start} : TaggedSentence{second[i], other});
  return doc;
}

// Both monolingual sentence lists, taking each alternating slot from the
// document and filling its counterpart from the pair. Throws if the document
// disagrees with the pair.
inline std::pair<std::vector<std::string>, std::vector<std::string>> reconstruct(const AlternatingDocument& doc,
                                                                                  const ParallelPair& pair) {
  std::vector<std::string> src(doc.sentences.size()), tgt(doc.sentences.size());
  if (doc.sentences.size() != pair.src_sentences.size()) throw DataError("reconstruct: length mismatch");
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    const auto& s = doc.sentences[i];
    if (s.lang == pair.src_lang) {
      if (s.text != pair.src_sentences[i]) throw DataError("reconstruct: sentence " + std::to_string(i) + " differs");
      src[i] = s.text;
      tgt[i] = pair.tgt_sentences[i];
    } else if (s.lang == pair.tgt_lang) {
      if (s.text != pair.tgt_sentences[i]) throw DataError("reconstruct: sentence " + std::to_string(i) + " differs");
      tgt[i] = s.text;
      src[i] = pair.src_sentences[i];
    } else {
      throw DataError("reconstruct: sentence " + std::to_string(i) + " has a foreign language tag");
    }
  }
  return {std::move(src), std::move(tgt)};
}

using LanguagePair = std::pair<LanguageTag, LanguageTag>;

// All ordered pairs (a, b) with a != b, sorted by language name.
inline std::vector<LanguagePair> enumerate_language_pairs(std::vector<LanguageTag> langs) {
  std::sort(langs.begin(), langs.end());
  for (std::size_t i = 1; i < langs.size(); ++i)
    if (langs[i] == langs[i - 1]) throw std::invalid_argument("enumerate_language_pairs: duplicate " + langs[i].name());
  std::vector<LanguagePair> out;
  for (const auto& a : langs)
    for (const auto& b : langs)
      if (!(a == b)) out.emplace_back(a, b);
  return out;
}

enum class StartPolicy { fixed, round_robin };

inline StartPolicy parse_start_policy(std::string_view s) {
  if (s == "fixed") return StartPolicy::fixed;
  if (s == "round_robin") return StartPolicy::round_robin;
  throw ConfigError("unknown start_policy \"" + std::string(s) + "\"");
}

inline std::string pattern_string(const AlternatingDocument& d) {
  return d.pattern.first.name() + "," + d.pattern.second.name();
}

inline Document to_document(const AlternatingDocument& alt, const ParallelPair& pair) {
  Document d;
  d.id = alt.source_doc_id + "#" + pair.src_lang.name() + "-" + pair.tgt_lang.name();
  std::vector<std::string> texts;
  nlohmann::json langs = nlohmann::json::array();
  for (const auto& s : alt.sentences) {
    texts.push_back(s.text);
    langs.push_back(s.lang.name());
  }
  d.text = text::join(texts, " ");
  d.lang = LanguageTag::other(pair.src_lang.name() + "+" + pair.tgt_lang.name());
  d.source = "alternate_parallel";
  d.meta["pattern"] = pattern_string(alt);
  d.meta["origin"] = std::string(to_string(pair.origin));
  d.meta["source_doc_id"] = alt.source_doc_id;
  d.meta["sentence_langs"] = langs.dump();
  return d;
}

// Builds the sentence-aligned pair (a, b) for one document. Sides already in
// the document's language are copied; the rest are translated.
inline ParallelPair pair_for(const Document& doc, const LanguagePair& langs, TranslationClient& client,
                             const TranslationSettings& settings) {
  const auto sentences = split_sentences(doc.text, doc.lang);
  if (sentences.empty()) throw DataError("document \"" + doc.id + "\" has no sentences");
  ParallelPair pair;
  pair.src_lang = langs.first;
  pair.tgt_lang = langs.second;
  pair.src_sentences = doc.lang == langs.first ? sentences
                                               : translate_sentences(sentences, doc.lang, langs.first, client, settings);
  pair.tgt_sentences = doc.lang == langs.second
                           ? sentences
                           : translate_sentences(sentences, doc.lang, langs.second, client, settings);
  pair.origin = PairOrigin::machine_translated;
  pair.source_doc_id = doc.id;
  return pair;
}

struct EmitOptions {
  StartPolicy start_policy = StartPolicy::fixed;
  TranslationSettings translation;
  std::function<void()> after_document;  // e.g. flush a translation cache
};

// One alternating document per (doc, pair), document-major. With round_robin
// the start language flips between successive documents of the same pair.
inline Corpus emit_training_docs(const Corpus& docs, const std::vector<LanguagePair>& pairs, TranslationClient& client,
                                 const EmitOptions& options = {}) {
  Corpus out;
  std::vector<std::size_t> uses(pairs.size(), 0);
  for (const auto& doc : docs.docs) {
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      ParallelPair pair;
      try {
        pair = pair_for(doc, pairs[p], client, options.translation);
      } catch (const TranslationError& e) {
        throw TranslationError(e.sentence_index(), e.cause(), "document \"" + doc.id + "\": ");
      }
      const bool flip = options.start_policy == StartPolicy::round_robin && uses[p] % 2 == 1;
      ++uses[p];
      const auto alt = build_alternating(pair, flip ? pair.tgt_lang : pair.src_lang);
      out.docs.push_back(to_document(alt, pair));
    }
    if (options.after_document) options.after_document();
  }
  return out;
}

}  // namespace nusa
