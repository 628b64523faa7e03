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

// Declarative pipeline runs: config loading and the six subcommands.
// Every command validates its whole configuration before touching the
// output directory, builds its outputs in memory, then writes them together
// with a resolved-config snapshot and a manifest.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nusa/corpus.hpp"
#include "nusa/detail/parallel.hpp"
#include "nusa/detail/text.hpp"
#include "nusa/embedding.hpp"
#include "nusa/error.hpp"
#include "nusa/eval/judge.hpp"
#include "nusa/eval/tasks.hpp"
#include "nusa/http.hpp"
#include "nusa/parallel.hpp"
#include "nusa/preprocess.hpp"
#include "nusa/tokenizer.hpp"

namespace nusa::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr std::uint64_t kDefaultSeed = 1234;

// Empty path strings mean "the matching output of an earlier stage".
inline json default_config() {
  return json::parse(R"({
  "seed": 1234,
  "output_dir": "out",
  "preprocess": {
    "input": "",
    "format": "jsonl",
    "filter": {},
    "exact_dedup": true,
    "near_dedup": true
  },
  "vocab": {
    "base_model": "",
    "corpus": "",
    "new_words": {"indonesian": 2000, "regional": 1000, "english": 0}
  },
  "embed": {
    "matrix": "",
    "base_model": "",
    "extended_model": "",
    "pca_rows": 0
  },
  "parallel": {
    "corpus": "",
    "languages": [],
    "pairs": [],
    "start_policy": "fixed",
    "client": "stub",
    "cache": "",
    "concurrency": 4,
    "retries": 3
  },
  "eval": {
    "model_name": "model",
    "tasks": {},
    "judge": "stub",
    "judge_fixture": "",
    "judge_default": "No",
    "intents": [],
    "negative_intent": "tidak ada",
    "exclude_langs": {},
    "id_en_keyword_mapper": false,
    "concurrency": 4,
    "retries": 3,
    "rate_limit_ms": 0
  },
  "report": {
    "scores": ""
  }
})");
}

namespace detail {

// Objects whose keys are free-form; they replace the default wholesale.
inline bool is_open(const std::string& pointer) {
  return pointer == "/preprocess/filter" || pointer == "/eval/tasks" || pointer == "/eval/exclude_langs";
}

inline void merge_into(json& base, const json& user, const std::string& pointer) {
  if (!user.is_object()) throw ConfigError("config " + (pointer.empty() ? "root" : pointer) + " must be an object");
  for (const auto& [k, v] : user.items()) {
    const auto child = pointer + "/" + k;
    if (!base.contains(k)) throw ConfigError("config: unknown key " + child);
    auto& slot = base[k];
    if (slot.is_object() && !is_open(child)) {
      merge_into(slot, v, child);
    } else {
      if (is_open(child) && !v.is_object()) throw ConfigError("config " + child + " must be an object");
      slot = v;
    }
  }
}

}  // namespace detail

struct PipelineConfig {
  json doc = default_config();
  fs::path base_dir = fs::current_path();  // relative config paths resolve here
  bool near_dup_seed_explicit = false;

  std::uint64_t seed() const { return get<std::uint64_t>("/seed"); }
  fs::path output_dir() const { return resolve(get<std::string>("/output_dir")); }
  fs::path stage_dir(std::string_view cmd) const { return output_dir() / std::string(cmd); }

  template <typename T>
  T get(const std::string& pointer) const {
    try {
      return doc.at(json::json_pointer(pointer)).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config " + pointer + ": " + e.what());
    }
  }

  fs::path resolve(const std::string& p) const {
    if (p.empty()) return {};
    fs::path path(p);
    return (path.is_absolute() ? path : base_dir / path).lexically_normal();
  }

  // Configured path, or `fallback` when left empty.
  fs::path path_or(const std::string& pointer, const fs::path& fallback) const {
    const auto p = get<std::string>(pointer);
    return p.empty() ? fallback : resolve(p);
  }
};

inline PipelineConfig config_from_json(const json& user, fs::path base_dir) {
  PipelineConfig cfg;
  cfg.base_dir = std::move(base_dir);
  detail::merge_into(cfg.doc, user, "");
  if (user.contains("preprocess") && user["preprocess"].contains("filter")) {
    const auto& f = user["preprocess"]["filter"];
    cfg.near_dup_seed_explicit = f.contains("near_dup") && f["near_dup"].is_object() && f["near_dup"].contains("seed");
  }
  return cfg;
}

inline PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json user;
  try {
    user = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(user, fs::absolute(path).parent_path());
}

// "eval.model_name=foo" or "preprocess.filter.min_words=10". The value is
// parsed as JSON when possible, else taken as a string.
inline void apply_override(PipelineConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) throw ConfigError("override \"" + std::string(assignment) + "\" is not key=value");
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json patch = value;
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = json{{*it, patch}};
  std::string pointer;
  for (const auto& p : parts) pointer += "/" + p;
  if (pointer.starts_with("/preprocess/filter/near_dup/seed")) cfg.near_dup_seed_explicit = true;
  // Leaves inside open objects are set directly.
  for (std::size_t n = parts.size(); n > 0; --n) {
    std::string prefix;
    for (std::size_t i = 0; i < n; ++i) prefix += "/" + parts[i];
    if (detail::is_open(prefix) && n < parts.size()) {
      cfg.doc[json::json_pointer(pointer)] = value;
      return;
    }
  }
  detail::merge_into(cfg.doc, patch, "");
}

// Snapshot of the configuration as used: defaults filled in, paths absolute.
inline json resolved_snapshot(const PipelineConfig& cfg) {
  json out = cfg.doc;
  out["output_dir"] = cfg.output_dir().string();
  out["base_dir"] = cfg.base_dir.string();
  return out;
}

// ---- outputs -------------------------------------------------------------

class Outputs {
 public:
  void text(std::string name, std::string content) { texts_.emplace_back(std::move(name), std::move(content)); }
  void writer(std::string name, std::function<void(const fs::path&)> fn) {
    writers_.emplace_back(std::move(name), std::move(fn));
  }

  // Writes everything under `dir`, then a manifest of content hashes.
  std::vector<fs::path> commit(const fs::path& dir, const std::string& command, std::uint64_t seed) const {
    fs::create_directories(dir);
    std::vector<fs::path> written;
    for (const auto& [name, content] : texts_) {
      std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
      if (!out) throw DataError("cannot write " + (dir / name).string());
      out << content;
      written.push_back(dir / name);
    }
    for (const auto& [name, fn] : writers_) {
      fn(dir / name);
      written.push_back(dir / name);
    }
    std::vector<fs::path> all = written;
    for (const auto& p : written) {
      const auto side = embedding_sidecar(p);
      if (fs::exists(side)) all.push_back(side);
    }
    std::sort(all.begin(), all.end());
    json manifest = {{"command", command}, {"seed", seed}, {"files", json::object()}};
    for (const auto& p : all) manifest["files"][p.filename().string()] = text::hex64(text::fnv1a64(nusa::detail::read_file(p)));
    std::ofstream m(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    m << manifest.dump(2) << '\n';
    all.push_back(dir / "manifest.json");
    return all;
  }

 private:
  std::vector<std::pair<std::string, std::string>> texts_;
  std::vector<std::pair<std::string, std::function<void(const fs::path&)>>> writers_;
};

namespace detail {

inline fs::path require_file(const fs::path& p, std::string_view what) {
  if (p.empty()) throw ConfigError(std::string(what) + " is not configured");
  if (!fs::exists(p)) throw ConfigError(std::string(what) + " does not exist: " + p.string());
  return p;
}

inline std::string jsonl(const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.dump(-1, ' ', true) + "\n";
  return out;
}

inline std::string corpus_jsonl(const Corpus& c) {
  std::ostringstream out;
  write_corpus_jsonl(c, out);
  return out.str();
}

inline LanguageTag known_language(const std::string& s) {
  auto t = LanguageTag::parse(s);
  if (t.code() == Language::other) throw ConfigError("unknown language \"" + s + "\"");
  return t;
}

inline std::string snapshot_text(const PipelineConfig& cfg) { return resolved_snapshot(cfg).dump(2) + "\n"; }

}  // namespace detail

struct CommandResult {
  fs::path dir;
  std::vector<fs::path> files;
  json summary;
};

// ---- preprocess ----------------------------------------------------------

inline CommandResult cmd_preprocess(const PipelineConfig& cfg) {
  const auto input = detail::require_file(cfg.path_or("/preprocess/input", {}), "preprocess.input");
  const auto format = parse_corpus_format(cfg.get<std::string>("/preprocess/format"));
  auto filter = filter_config_from_json(cfg.doc.at(json::json_pointer("/preprocess/filter")));
  if (!cfg.near_dup_seed_explicit) filter.near_dup.seed = cfg.seed();
  const bool do_exact = cfg.get<bool>("/preprocess/exact_dedup");
  const bool do_near = cfg.get<bool>("/preprocess/near_dedup");

  const Corpus corpus = load_corpus(input, format);
  const auto n = corpus.docs.size();
  std::vector<RepetitionProfile> profiles(n);
  std::vector<FilterDecision> decisions(n);
  nusa::detail::parallel_for(n, [&](std::size_t i) {
    profiles[i] = repetition_profile(corpus.docs[i]);
    decisions[i] = apply_quality_filter(corpus.docs[i], profiles[i], filter);
  });
  Corpus kept;
  std::vector<json> decision_rows;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = to_json(corpus.docs[i].id, decisions[i]);
    row["profile"] = to_json(profiles[i]);
    decision_rows.push_back(std::move(row));
    if (decisions[i].keep) kept.docs.push_back(corpus.docs[i]);
  }

  Outputs out;
  json summary = {{"seed", cfg.seed()}, {"input_docs", n}, {"filtered_out", n - kept.docs.size()}};
  Corpus current = std::move(kept);
  if (do_exact) {
    auto r = exact_dedup(current);
    std::ostringstream rep;
    write_dedup_report(r.report, rep);
    out.text("exact_dedup.txt", rep.str());
    summary["exact_removed"] = r.report.removed_ids.size();
    current = std::move(r.corpus);
  }
  if (do_near) {
    auto r = near_dedup(current, filter);
    std::ostringstream rep;
    write_dedup_report(r.report, rep);
    out.text("near_dedup.txt", rep.str());
    summary["near_removed"] = r.report.removed_ids.size();
    current = std::move(r.corpus);
  }
  summary["output_docs"] = current.docs.size();
  out.text("corpus.jsonl", detail::corpus_jsonl(current));
  out.text("filter_decisions.jsonl", detail::jsonl(decision_rows));
  out.text("summary.json", summary.dump(2) + "\n");
  out.text("config.resolved.json", detail::snapshot_text(cfg));
  const auto dir = cfg.stage_dir("preprocess");
  return {dir, out.commit(dir, "preprocess", cfg.seed()), summary};
}

// ---- vocab ---------------------------------------------------------------

inline CommandResult cmd_vocab(const PipelineConfig& cfg) {
  const auto base_path = detail::require_file(cfg.path_or("/vocab/base_model", {}), "vocab.base_model");
  const auto corpus_path =
      detail::require_file(cfg.path_or("/vocab/corpus", cfg.stage_dir("preprocess") / "corpus.jsonl"), "vocab.corpus");
  const auto n_id = cfg.get<std::size_t>("/vocab/new_words/indonesian");
  const auto n_reg = cfg.get<std::size_t>("/vocab/new_words/regional");
  const auto n_en = cfg.get<std::size_t>("/vocab/new_words/english");

  const auto base = load_tokenizer(base_path);
  const auto corpus = load_corpus(corpus_path);

  std::vector<WordFrequencyTable> regional_tables;
  std::set<LanguageTag> regional_langs;
  for (const auto& d : corpus.docs)
    if (d.lang.is_regional()) regional_langs.insert(d.lang);
  for (const auto& l : regional_langs) regional_tables.push_back(word_frequencies(corpus, l));

  std::vector<std::string> words;
  std::vector<json> listing;
  std::set<std::string> chosen;
  auto take = [&](const WordFrequencyTable& table, std::size_t n, const std::string& group) {
    std::size_t added = 0;
    for (auto& w : select_new_words(table, base, n + chosen.size())) {
      if (added == n) break;
      if (!chosen.insert(w).second) continue;
      listing.push_back({{"word", w}, {"group", group}, {"count", table.counts.at(w)}});
      words.push_back(std::move(w));
      ++added;
    }
  };
  take(word_frequencies(corpus, lang(Language::indonesian)), n_id, "indonesian");
  take(merge_tables(regional_tables, LanguageTag::other("regional")), n_reg, "regional");
  take(word_frequencies(corpus, lang(Language::english)), n_en, "english");

  const auto extended = extend_vocab(base, words);
  const auto fb = fertility(base, corpus);
  const auto fe = fertility(extended, corpus);

  Outputs out;
  std::ostringstream tok;
  save_tokenizer(extended, tok);
  out.text("tokenizer.jsonl", tok.str());
  std::ostringstream csv_out;
  write_fertility_csv({{"base", fb, base.size()}, {"extended", fe, extended.size()}}, csv_out);
  out.text("fertility.csv", csv_out.str());
  out.text("new_words.jsonl", detail::jsonl(listing));
  json improvement = json::object();
  for (const auto& [l, v] : fertility_improvement(fb, fe)) improvement[l.name()] = v;
  json summary = {{"seed", cfg.seed()},
                  {"base_vocab_size", base.size()},
                  {"extended_vocab_size", extended.size()},
                  {"added_words", words.size()},
                  {"padding_tokens", extended.size() - base.size() - words.size()},
                  {"improvement_pct", improvement}};
  out.text("summary.json", summary.dump(2) + "\n");
  out.text("config.resolved.json", detail::snapshot_text(cfg));
  const auto dir = cfg.stage_dir("vocab");
  return {dir, out.commit(dir, "vocab", cfg.seed()), summary};
}

// ---- embed ---------------------------------------------------------------

// Up to k ids chosen by a seeded hash order, returned ascending.
inline std::vector<std::int64_t> sample_ids(std::vector<std::int64_t> ids, std::size_t k, std::uint64_t seed) {
  if (k == 0 || k >= ids.size()) return ids;
  std::sort(ids.begin(), ids.end(), [seed](std::int64_t a, std::int64_t b) {
    const auto ha = text::mix64(static_cast<std::uint64_t>(a) ^ seed);
    const auto hb = text::mix64(static_cast<std::uint64_t>(b) ^ seed);
    return ha != hb ? ha < hb : a < b;
  });
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

inline CommandResult cmd_embed(const PipelineConfig& cfg) {
  const auto matrix_path = detail::require_file(cfg.path_or("/embed/matrix", {}), "embed.matrix");
  const auto base_path =
      detail::require_file(cfg.path_or("/embed/base_model", cfg.path_or("/vocab/base_model", {})), "embed.base_model");
  const auto ext_path = detail::require_file(
      cfg.path_or("/embed/extended_model", cfg.stage_dir("vocab") / "tokenizer.jsonl"), "embed.extended_model");
  const auto pca_rows = cfg.get<std::size_t>("/embed/pca_rows");
  if (pca_rows != 0 && pca_rows < 3) throw ConfigError("embed.pca_rows must be 0 or >= 3");

  const auto loaded = load_embeddings(matrix_path);
  const auto base = load_tokenizer(base_path);
  const auto extended = load_tokenizer(ext_path);
  const auto& m = loaded.matrix;
  if (m.rows() != base.size())
    throw DataError("embedding matrix has " + std::to_string(m.rows()) + " rows but the base tokenizer has " +
                    std::to_string(base.size()) + " tokens");
  if (extended.size() < base.size()) throw DataError("extended tokenizer is smaller than the base tokenizer");
  for (std::size_t i = 0; i < base.size(); ++i)
    if (extended.token(static_cast<TokenId>(i)).piece != base.token(static_cast<TokenId>(i)).piece)
      throw DataError("extended tokenizer does not start with the base vocabulary (id " + std::to_string(i) + ")");

  std::vector<std::int64_t> new_ids;
  for (std::size_t i = base.size(); i < extended.size(); ++i) new_ids.push_back(static_cast<std::int64_t>(i));
  const auto ext_m = extend_embeddings(m, new_ids);

  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < extended.size(); ++i) tokens.push_back(extended.token(static_cast<TokenId>(i)).piece);
  auto labels_of = [&](const std::vector<std::int64_t>& ids) {
    std::vector<std::string> out;
    for (auto id : ids) out.push_back(tokens[static_cast<std::size_t>(id)]);
    return out;
  };

  const auto before_sel = sample_ids(m.token_ids(), pca_rows, cfg.seed());
  auto after_sel = before_sel;
  for (auto id : new_ids)
    if (extended.token(static_cast<TokenId>(id)).kind == TokenKind::word) after_sel.push_back(id);
  const auto before = pca2(m, before_sel, labels_of(before_sel));
  const auto after = pca2(ext_m, after_sel, labels_of(after_sel));

  Outputs out;
  out.writer("embeddings.bin", [ext_m, tokens](const fs::path& p) { save_embeddings(ext_m, p, tokens); });
  std::ostringstream b, a;
  write_projection_csv(before, b);
  write_projection_csv(after, a);
  out.text("pca_before.csv", b.str());
  out.text("pca_after.csv", a.str());
  json summary = {{"seed", cfg.seed()},
                  {"rows_before", m.rows()},
                  {"rows_after", ext_m.rows()},
                  {"dim", m.dim()},
                  {"explained_variance_before", before.explained_variance},
                  {"explained_variance_after", after.explained_variance}};
  out.text("summary.json", summary.dump(2) + "\n");
  out.text("config.resolved.json", detail::snapshot_text(cfg));
  const auto dir = cfg.stage_dir("embed");
  return {dir, out.commit(dir, "embed", cfg.seed()), summary};
}

// ---- parallel ------------------------------------------------------------

inline std::unique_ptr<TranslationClient> make_translator(const std::string& mode) {
  if (mode == "stub") return std::make_unique<StubTranslator>();
  if (mode == "http") return std::make_unique<http::HttpTranslator>(http::HttpTranslator::from_env());
  throw ConfigError("parallel.client must be \"stub\" or \"http\", got \"" + mode + "\"");
}

inline CommandResult cmd_parallel(const PipelineConfig& cfg) {
  const auto corpus_path = detail::require_file(
      cfg.path_or("/parallel/corpus", cfg.stage_dir("preprocess") / "corpus.jsonl"), "parallel.corpus");
  std::vector<LanguagePair> pairs;
  for (const auto& p : cfg.get<std::vector<std::vector<std::string>>>("/parallel/pairs")) {
    if (p.size() != 2) throw ConfigError("parallel.pairs entries must be [source, target]");
    auto a = detail::known_language(p[0]), b = detail::known_language(p[1]);
    if (a == b) throw ConfigError("parallel.pairs: identical languages in pair " + a.name());
    pairs.emplace_back(a, b);
  }
  if (pairs.empty()) {
    std::vector<LanguageTag> langs;
    for (const auto& s : cfg.get<std::vector<std::string>>("/parallel/languages")) langs.push_back(detail::known_language(s));
    try {
      pairs = enumerate_language_pairs(langs);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("parallel.languages: ") + e.what());
    }
  }
  if (pairs.empty()) throw ConfigError("parallel: configure at least two languages or one pair");
  EmitOptions options;
  options.start_policy = parse_start_policy(cfg.get<std::string>("/parallel/start_policy"));
  options.translation.concurrency = std::max(1u, cfg.get<unsigned>("/parallel/concurrency"));
  options.translation.retry.retries = cfg.get<int>("/parallel/retries");
  const auto inner = make_translator(cfg.get<std::string>("/parallel/client"));
  const auto dir = cfg.stage_dir("parallel");
  const auto cache_path = cfg.path_or("/parallel/cache", dir / "translation_cache.jsonl");

  const auto corpus = load_corpus(corpus_path);
  fs::create_directories(cache_path.parent_path());
  CachedTranslator cached(*inner, cache_path);
  options.after_document = [&cached] { cached.flush(); };
  const auto docs = emit_training_docs(corpus, pairs, cached, options);
  cached.flush();

  Outputs out;
  out.text("corpus.jsonl", detail::corpus_jsonl(docs));
  json pair_list = json::array();
  for (const auto& [a, b] : pairs) pair_list.push_back({a.name(), b.name()});
  json summary = {{"seed", cfg.seed()},
                  {"input_docs", corpus.docs.size()},
                  {"pairs", pair_list},
                  {"output_docs", docs.docs.size()},
                  {"start_policy", cfg.get<std::string>("/parallel/start_policy")}};
  out.text("summary.json", summary.dump(2) + "\n");
  out.text("config.resolved.json", detail::snapshot_text(cfg));
  return {dir, out.commit(dir, "parallel", cfg.seed()), summary};
}

// ---- eval ----------------------------------------------------------------

inline std::unique_ptr<judge::JudgeClient> make_judge(const PipelineConfig& cfg) {
  const auto mode = cfg.get<std::string>("/eval/judge");
  if (mode == "stub") {
    const auto fixture = cfg.path_or("/eval/judge_fixture", {});
    const auto fallback = cfg.get<std::string>("/eval/judge_default");
    if (fixture.empty()) return std::make_unique<judge::StubJudge>(fallback);
    detail::require_file(fixture, "eval.judge_fixture");
    return std::make_unique<judge::StubJudge>(judge::StubJudge::from_fixture(fixture, fallback));
  }
  if (mode == "http") return std::make_unique<http::HttpJudge>(http::HttpJudge::from_env());
  throw ConfigError("eval.judge must be \"stub\" or \"http\", got \"" + mode + "\"");
}

inline CommandResult cmd_eval(const PipelineConfig& cfg) {
  const auto tasks_cfg = cfg.get<std::map<std::string, std::string>>("/eval/tasks");
  if (tasks_cfg.empty()) throw ConfigError("eval.tasks is empty");
  std::map<eval::TaskName, fs::path> tasks;
  for (const auto& [name, path] : tasks_cfg)
    tasks[eval::parse_task_name(name)] = detail::require_file(cfg.resolve(path), "eval.tasks." + name);
  std::map<eval::TaskName, std::vector<LanguageTag>> excludes;
  for (const auto& [name, langs] : cfg.get<std::map<std::string, std::vector<std::string>>>("/eval/exclude_langs")) {
    auto& dst = excludes[eval::parse_task_name(name)];
    for (const auto& l : langs) dst.push_back(LanguageTag::parse(l));
  }
  auto intents = cfg.get<std::vector<std::string>>("/eval/intents");
  if (intents.empty()) intents = eval::default_intents();
  const auto negative = cfg.get<std::string>("/eval/negative_intent");
  const bool use_mapper = cfg.get<bool>("/eval/id_en_keyword_mapper");
  const auto concurrency = std::max(1u, cfg.get<unsigned>("/eval/concurrency"));
  const auto model_name = cfg.get<std::string>("/eval/model_name");
  judge::RateLimiter limiter(std::chrono::milliseconds(cfg.get<long>("/eval/rate_limit_ms")));
  judge::JudgeOptions jopts;
  jopts.retry.retries = cfg.get<int>("/eval/retries");
  jopts.limiter = &limiter;
  const auto client = make_judge(cfg);

  std::map<eval::TaskName, std::vector<eval::EvalRecord>> records;
  for (const auto& [t, path] : tasks) records[t] = eval::load_task_file(path);

  const eval::EntailmentKeywordMapper mapper;
  const auto judge_fn = judge::bind(*client, jopts);
  std::vector<eval::TaskScore> scores;
  for (const auto& [t, recs] : records) {
    auto opts = eval::default_task_options(t);
    if (auto it = excludes.find(t); it != excludes.end()) opts.exclude_langs = it->second;
    opts.intents = intents;
    opts.negative_intent = negative;
    opts.id_en_mapper = use_mapper ? &mapper : nullptr;
    opts.concurrency = concurrency;
    scores.push_back(eval::run_task(eval::task_spec(t), recs, judge_fn, opts));
  }
  const auto board = eval::aggregate(scores, model_name);

  Outputs out;
  std::ostringstream csv_out, md, audit;
  eval::write_scoreboard_csv(csv_out, {board});
  eval::write_scoreboard_markdown(md, {board});
  std::vector<json> rows;
  json task_summary = json::object();
  for (const auto& s : scores) {
    eval::write_audit(audit, s);
    const std::string name(eval::to_string(s.task.name));
    for (const auto& r : s.per_record) {
      json row = {{"task", name}, {"index", r.index}, {"lang", r.lang.name()}, {"correct", r.correct},
                  {"judged", r.judged()}, {"flagged", r.flagged()}};
      if (!r.prediction.empty()) row["prediction"] = r.prediction;
      if (r.score) row["score"] = *r.score;
      if (r.verdict) row["verdict"] = judge::to_string(r.verdict->verdict);
      if (r.error) row["error"] = *r.error;
      rows.push_back(std::move(row));
    }
    task_summary[name] = {{"metric", eval::to_string(s.task.metric)},
                          {"value", s.value},
                          {"n", s.n},
                          {"excluded", s.excluded},
                          {"judge_calls", s.judge_calls},
                          {"flagged", s.flagged()}};
  }
  out.text("scoreboard.csv", csv_out.str());
  out.text("scoreboard.md", md.str());
  out.text("audit.jsonl", audit.str());
  out.text("records.jsonl", detail::jsonl(rows));
  json summary = {{"seed", cfg.seed()}, {"model_name", model_name}, {"tasks", task_summary}, {"average", board.average}};
  out.text("summary.json", summary.dump(2) + "\n");
  out.text("config.resolved.json", detail::snapshot_text(cfg));
  const auto dir = cfg.stage_dir("eval");
  return {dir, out.commit(dir, "eval", cfg.seed()), summary};
}

// ---- report --------------------------------------------------------------

// {"models": [{"model_name": ..., "scores": {"indommlu": 43.2, ...}}, ...]}
inline std::vector<eval::Scoreboard> read_score_table(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<eval::Scoreboard> boards;
  try {
    const auto j = json::parse(in);
    for (const auto& m : j.at("models")) {
      std::map<eval::TaskName, double> values;
      for (const auto& [task, v] : m.at("scores").items()) {
        try {
          values[eval::parse_task_name(task)] = v.get<double>();
        } catch (const ConfigError& e) {
          throw DataError(e.what());
        }
      }
      boards.push_back(eval::aggregate(values, m.at("model_name").get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  if (boards.empty()) throw DataError(path.string() + ": no models");
  return boards;
}

inline CommandResult cmd_report(const PipelineConfig& cfg) {
  const auto scores_path = detail::require_file(cfg.path_or("/report/scores", {}), "report.scores");
  const auto boards = read_score_table(scores_path);
  Outputs out;
  std::ostringstream csv_out, md;
  eval::write_scoreboard_csv(csv_out, boards);
  eval::write_scoreboard_markdown(md, boards);
  out.text("scoreboard.csv", csv_out.str());
  out.text("scoreboard.md", md.str());
  json averages = json::object();
  for (const auto& b : boards) averages[b.model_name] = b.average;
  json summary = {{"seed", cfg.seed()}, {"models", boards.size()}, {"average", averages}};
  out.text("summary.json", summary.dump(2) + "\n");
  out.text("config.resolved.json", detail::snapshot_text(cfg));
  const auto dir = cfg.stage_dir("report");
  return {dir, out.commit(dir, "report", cfg.seed()), summary};
}

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> kNames = {"preprocess", "vocab", "embed", "parallel", "eval", "report"};
  return kNames;
}

inline CommandResult run_command(std::string_view name, const PipelineConfig& cfg) {
  if (name == "preprocess") return cmd_preprocess(cfg);
  if (name == "vocab") return cmd_vocab(cfg);
  if (name == "embed") return cmd_embed(cfg);
  if (name == "parallel") return cmd_parallel(cfg);
  if (name == "eval") return cmd_eval(cfg);
  if (name == "report") return cmd_report(cfg);
  throw ConfigError("unknown command \"" + std::string(name) + "\"");
}

// 0 success, 2 configuration error, 3 data error, 1 anything else.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  return 1;
}

}  // namespace nusa::pipeline
