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

// Benchmark tasks: file loading, per-record scoring, aggregation and export.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nusa/corpus.hpp"
#include "nusa/detail/csv.hpp"
#include "nusa/detail/parallel.hpp"
#include "nusa/detail/text.hpp"
#include "nusa/error.hpp"
#include "nusa/eval/evaluators.hpp"
#include "nusa/eval/judge.hpp"
#include "nusa/eval/metrics.hpp"

namespace nusa::eval {

enum class TaskName {
  indommlu,
  id_en,
  xcopa_id,
  intent,
  colloquial,
  nusax_senti,
  id_hatespeech,
  nusax_mt,
  tydiqa_id,
  indosum,
};

enum class TaskKind { discriminative, generative };
enum class Metric { accuracy, f1_weighted, chrf_pp, rouge_l_f1 };

struct TaskSpec {
  TaskName name;
  TaskKind kind;
  Metric metric;
  std::vector<LanguageTag> languages;  // empty when the benchmark does not list them
  int language_count = 0;              // as reported for the benchmark
  std::string_view display;
};

inline std::string_view to_string(TaskName t) {
  switch (t) {
    case TaskName::indommlu: return "indommlu";
    case TaskName::id_en: return "id_en";
    case TaskName::xcopa_id: return "xcopa_id";
    case TaskName::intent: return "intent";
    case TaskName::colloquial: return "colloquial";
    case TaskName::nusax_senti: return "nusax_senti";
    case TaskName::id_hatespeech: return "id_hatespeech";
    case TaskName::nusax_mt: return "nusax_mt";
    case TaskName::tydiqa_id: return "tydiqa_id";
    case TaskName::indosum: return "indosum";
  }
  return "";
}

inline std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::accuracy: return "accuracy";
    case Metric::f1_weighted: return "f1_weighted";
    case Metric::chrf_pp: return "chrf_pp";
    case Metric::rouge_l_f1: return "rouge_l_f1";
  }
  return "";
}

inline std::string_view to_string(TaskKind k) { return k == TaskKind::discriminative ? "discriminative" : "generative"; }

inline const std::vector<TaskSpec>& task_specs() {
  using L = Language;
  static const std::vector<TaskSpec> kSpecs = [] {
    const std::vector<LanguageTag> nusax = {
        lang(L::acehnese),  lang(L::balinese),    lang(L::toba_batak),  lang(L::banjarese),
        lang(L::buginese),  lang(L::english),     lang(L::indonesian),  lang(L::javanese),
        lang(L::madurese),  lang(L::minangkabau), lang(L::dayak_ngaju), lang(L::sundanese),
    };
    std::vector<LanguageTag> senti;
    std::copy_if(nusax.begin(), nusax.end(), std::back_inserter(senti),
                 [](const LanguageTag& t) { return t.code() != L::english; });
    const std::vector<LanguageTag> id = {lang(L::indonesian)};
    return std::vector<TaskSpec>{
        {TaskName::indommlu, TaskKind::discriminative, Metric::accuracy, {}, 10, "IndoMMLU"},
        {TaskName::id_en, TaskKind::discriminative, Metric::accuracy, {lang(L::indonesian), lang(L::english)}, 2, "ID-EN"},
        {TaskName::xcopa_id, TaskKind::discriminative, Metric::accuracy, id, 1, "XCOPA-ID"},
        {TaskName::intent, TaskKind::discriminative, Metric::f1_weighted,
         {lang(L::indonesian), lang(L::javanese), lang(L::sundanese)}, 3, "Intent Classification"},
        {TaskName::colloquial, TaskKind::discriminative, Metric::accuracy, id, 1, "Colloquial Detection"},
        {TaskName::nusax_senti, TaskKind::discriminative, Metric::accuracy, senti, 11, "NusaX-Senti"},
        {TaskName::id_hatespeech, TaskKind::discriminative, Metric::accuracy, id, 1, "ID-Hate Speech"},
        {TaskName::nusax_mt, TaskKind::generative, Metric::chrf_pp, nusax, 13, "NusaX-MT"},
        {TaskName::tydiqa_id, TaskKind::generative, Metric::accuracy, id, 1, "TydiQA-ID"},
        {TaskName::indosum, TaskKind::generative, Metric::rouge_l_f1, id, 1, "Indosum"},
    };
  }();
  return kSpecs;
}

inline const TaskSpec& task_spec(TaskName t) { return task_specs()[static_cast<std::size_t>(t)]; }

inline TaskName parse_task_name(std::string_view s) {
  for (const auto& spec : task_specs())
    if (to_string(spec.name) == s) return spec.name;
  throw ConfigError("unknown task \"" + std::string(s) + "\"");
}

// ---- task files ----------------------------------------------------------

namespace detail {

// Text of a scalar cell the way str() renders it after a pandas load.
inline std::string cell_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "True" : "False";
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 1e16) return std::to_string(static_cast<long long>(d)) + ".0";
    return v.dump();
  }
  if (v.is_number()) return v.dump();
  if (v.is_null()) return "nan";
  return v.dump();
}

inline std::optional<std::string> optional_cell(const nlohmann::json& row, const char* key) {
  auto it = row.find(key);
  if (it == row.end() || it->is_null()) return std::nullopt;
  return cell_text(*it);
}

}  // namespace detail

inline EvalRecord record_from_json(const nlohmann::json& row) {
  if (!row.is_object()) throw DataError("task row is not a JSON object");
  EvalRecord rec;
  rec.input = detail::optional_cell(row, "Input").value_or("");
  if (auto it = row.find("Output"); it == row.end() || it->is_null()) {
    rec.output = ModelOutput::missing();
  } else if (it->is_string()) {
    rec.output = ModelOutput::of(it->get<std::string>());
  } else if (it->is_number()) {
    rec.output = ModelOutput{detail::cell_text(*it), OutputKind::number};
  } else {
    throw DataError("\"Output\" must be a string, number or null");
  }
  auto answer = detail::optional_cell(row, "answer");
  if (!answer || answer->empty()) throw DataError("\"answer\" is missing or empty");
  rec.answer = *answer;
  rec.output_mapped = detail::optional_cell(row, "Output_Mapped");
  rec.options = detail::optional_cell(row, "Options");
  if (auto l = detail::optional_cell(row, "lang")) rec.lang = LanguageTag::parse(*l);
  return rec;
}

inline nlohmann::json record_to_json(const EvalRecord& rec) {
  nlohmann::json j;
  j["Input"] = rec.input;
  if (rec.output.kind == OutputKind::missing) j["Output"] = nullptr;
  else j["Output"] = rec.output.text;
  j["answer"] = rec.answer;
  if (rec.output_mapped) j["Output_Mapped"] = *rec.output_mapped;
  if (rec.options) j["Options"] = *rec.options;
  j["lang"] = rec.lang.name();
  return j;
}

inline std::vector<EvalRecord> load_task_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read task file " + path.string());
  std::vector<EvalRecord> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (text::strip(line).empty()) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// ---- scoring -------------------------------------------------------------

struct RecordResult {
  std::size_t index = 0;  // position in the input record list
  LanguageTag lang;
  bool correct = false;
  std::string prediction;       // mapped label (intent, colloquial)
  std::string gold;
  std::optional<double> score;  // generative metrics
  std::optional<judge::JudgeVerdict> verdict;
  std::optional<std::string> error;

  bool judged() const noexcept { return verdict.has_value(); }
  bool flagged() const noexcept {
    return error.has_value() || (verdict && verdict->verdict == judge::Verdict::unparseable);
  }
};

struct TaskScore {
  TaskSpec task;
  double value = 0;
  std::size_t n = 0;
  std::vector<RecordResult> per_record;
  std::size_t judge_calls = 0;
  std::size_t excluded = 0;  // dropped by the language filter

  std::vector<std::size_t> flagged() const {
    std::vector<std::size_t> out;
    for (const auto& r : per_record)
      if (r.flagged()) out.push_back(r.index);
    return out;
  }
};

struct TaskOptions {
  std::vector<std::string> intents = default_intents();
  std::string negative_intent = std::string(kNegativeIntent);
  const EntailmentKeywordMapper* id_en_mapper = nullptr;
  std::vector<LanguageTag> exclude_langs;
  unsigned concurrency = nusa::detail::default_workers();
};

// Defaults per task; sentiment scoring leaves out English rows.
inline TaskOptions default_task_options(TaskName t) {
  TaskOptions o;
  if (t == TaskName::nusax_senti) o.exclude_langs = {lang(Language::english)};
  return o;
}

inline RecordResult score_record(const TaskSpec& spec, const EvalRecord& rec, const judge::JudgeFn& judge,
                                 const TaskOptions& options) {
  RecordResult r;
  r.lang = rec.lang;
  r.gold = rec.answer;
  auto take = [&r](Decision d) {
    r.correct = d.correct;
    r.verdict = std::move(d.verdict);
    r.error = std::move(d.error);
  };
  switch (spec.name) {
    case TaskName::indommlu: take(eval_indommlu(rec, judge)); break;
    case TaskName::id_en: take(eval_id_en(rec, judge, options.id_en_mapper)); break;
    case TaskName::xcopa_id:
    case TaskName::tydiqa_id: take(eval_containment(rec, judge)); break;
    case TaskName::nusax_senti: take(eval_nusax_senti(rec, judge)); break;
    case TaskName::id_hatespeech: take(eval_hatespeech(rec, judge)); break;
    case TaskName::intent:
      r.prediction = map_intent(rec.output.text, options.intents, options.negative_intent);
      r.gold = text::lower(text::strip(rec.answer));
      r.correct = r.prediction == r.gold;
      break;
    case TaskName::colloquial: {
      const auto label = map_colloquial(rec.output);
      r.prediction = label.str();
      r.correct = colloquial_correct(label, rec.answer);
      break;
    }
    case TaskName::nusax_mt:
    case TaskName::indosum:
      try {
        r.score = spec.name == TaskName::nusax_mt ? metrics::chrf_pp(rec.output.text, rec.answer)
                                                  : 100.0 * metrics::rouge_l(rec.output.text, rec.answer).f1;
      } catch (const DataError& e) {
        r.score = 0.0;
        r.error = e.what();
      }
      break;
  }
  return r;
}

// Task value from per-record results alone.
inline double recompute(const TaskSpec& spec, const std::vector<RecordResult>& results) {
  if (results.empty()) throw DataError("task " + std::string(to_string(spec.name)) + ": no records to score");
  switch (spec.metric) {
    case Metric::accuracy: {
      std::vector<bool> hits;
      hits.reserve(results.size());
      for (const auto& r : results) hits.push_back(r.correct);
      return metrics::accuracy(hits);
    }
    case Metric::f1_weighted: {
      std::vector<std::string> pred, gold;
      for (const auto& r : results) {
        pred.push_back(r.prediction);
        gold.push_back(r.gold);
      }
      return metrics::weighted_f1(pred, gold);
    }
    case Metric::chrf_pp:
    case Metric::rouge_l_f1: {
      double sum = 0;
      for (const auto& r : results) sum += r.score.value_or(0.0);
      return sum / static_cast<double>(results.size());
    }
  }
  return 0;
}

inline double recompute(const TaskScore& s) { return recompute(s.task, s.per_record); }

// Scores every record (in parallel, so judge calls run up to
// options.concurrency at a time) and then applies the task metric.
inline TaskScore run_task(const TaskSpec& spec, const std::vector<EvalRecord>& records, const judge::JudgeFn& judge,
                          const TaskOptions& options = {}) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (std::find(options.exclude_langs.begin(), options.exclude_langs.end(), records[i].lang) ==
        options.exclude_langs.end())
      kept.push_back(i);

  TaskScore out;
  out.task = spec;
  out.excluded = records.size() - kept.size();
  out.per_record.resize(kept.size());
  nusa::detail::parallel_for(
      kept.size(),
      [&](std::size_t k) {
        auto r = score_record(spec, records[kept[k]], judge, options);
        r.index = kept[k];
        out.per_record[k] = std::move(r);
      },
      std::max(1u, options.concurrency));
  out.n = kept.size();
  for (const auto& r : out.per_record)
    if (r.judged()) ++out.judge_calls;
  out.value = recompute(spec, out.per_record);
  return out;
}

// One audit line per judge call, in record order.
inline void write_audit(std::ostream& out, const TaskScore& score) {
  for (const auto& r : score.per_record) {
    if (!r.verdict) continue;
    nlohmann::json j;
    j["task"] = to_string(score.task.name);
    j["index"] = r.index;
    j["prompt_id"] = r.verdict->prompt_id;
    j["prompt"] = r.verdict->prompt;
    j["raw"] = r.verdict->raw;
    j["verdict"] = judge::to_string(r.verdict->verdict);
    if (r.error) j["error"] = *r.error;
    out << j.dump(-1, ' ', true) << '\n';
  }
}

// ---- aggregation ---------------------------------------------------------

inline double round1(double v) { return std::round(v * 10.0) / 10.0; }

struct Scoreboard {
  std::string model_name;
  std::map<TaskName, double> scores;  // full precision
  double average = 0;                 // rounded to one decimal
};

inline Scoreboard aggregate(const std::map<TaskName, double>& board, std::string model_name) {
  if (board.empty()) throw DataError("aggregate: no task values");
  double sum = 0;
  for (const auto& [task, v] : board) sum += v;
  return {std::move(model_name), board, round1(sum / static_cast<double>(board.size()))};
}

inline Scoreboard aggregate(const std::vector<TaskScore>& scores, std::string model_name) {
  std::map<TaskName, double> board;
  for (const auto& s : scores) board[s.task.name] = s.value;
  return aggregate(board, std::move(model_name));
}

namespace detail {

inline std::vector<TaskName> present_tasks(const std::vector<Scoreboard>& boards) {
  std::set<TaskName> seen;
  for (const auto& b : boards)
    for (const auto& [t, v] : b.scores) seen.insert(t);
  return {seen.begin(), seen.end()};
}

}  // namespace detail

inline void write_scoreboard_csv(std::ostream& out, const std::vector<Scoreboard>& boards) {
  const auto tasks = detail::present_tasks(boards);
  out << "model";
  for (auto t : tasks) out << ',' << to_string(t);
  out << ",average\n";
  for (const auto& b : boards) {
    out << csv::field(b.model_name);
    for (auto t : tasks) {
      out << ',';
      if (auto it = b.scores.find(t); it != b.scores.end()) out << csv::fixed(it->second, 1);
    }
    out << ',' << csv::fixed(b.average, 1) << '\n';
  }
}

inline void write_scoreboard_markdown(std::ostream& out, const std::vector<Scoreboard>& boards) {
  const auto tasks = detail::present_tasks(boards);
  out << "| Model Name |";
  for (auto t : tasks) out << ' ' << task_spec(t).display << " |";
  out << " Average |\n|---|";
  for (std::size_t i = 0; i < tasks.size(); ++i) out << "---:|";
  out << "---:|\n";
  for (const auto& b : boards) {
    out << "| " << b.model_name << " |";
    for (auto t : tasks) {
      auto it = b.scores.find(t);
      out << ' ' << (it == b.scores.end() ? std::string("-") : csv::fixed(it->second, 1)) << " |";
    }
    out << ' ' << csv::fixed(b.average, 1) << " |\n";
  }
}

}  // namespace nusa::eval
