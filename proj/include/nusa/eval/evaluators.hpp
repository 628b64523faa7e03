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

// Per-task answer checkers. Outputs the rules cannot settle go to the judge.

#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nusa/corpus.hpp"
#include "nusa/detail/text.hpp"
#include "nusa/detail/utf8.hpp"
#include "nusa/eval/judge.hpp"
#include "nusa/eval/metrics.hpp"

namespace nusa::eval {

// How the model output arrived in the task file. Numbers and missing values
// keep the text Python's str() would give them ("1.0", "nan").
enum class OutputKind { text, number, missing };

struct ModelOutput {
  std::string text;
  OutputKind kind = OutputKind::text;

  static ModelOutput of(std::string s) { return {std::move(s), OutputKind::text}; }
  static ModelOutput missing() { return {"nan", OutputKind::missing}; }
};

struct EvalRecord {
  std::string input;
  ModelOutput output;
  std::string answer;
  std::optional<std::string> output_mapped;
  std::optional<std::string> options;
  LanguageTag lang = LanguageTag::other("unspecified");
};

struct Decision {
  bool correct = false;
  std::optional<judge::JudgeVerdict> verdict;  // set iff the judge was asked
  std::optional<std::string> error;

  bool judged() const noexcept { return verdict.has_value(); }
  bool flagged() const noexcept {
    return error.has_value() || (verdict && verdict->verdict == judge::Verdict::unparseable);
  }
};

namespace detail {

inline Decision ask(const judge::JudgeFn& judge, judge::TemplateId id, judge::Fields fields) {
  Decision d;
  try {
    d.verdict = judge(id, fields);
    d.correct = d.verdict->verdict == judge::Verdict::yes;
  } catch (const std::exception& e) {
    d.error = std::string("judge failed: ") + e.what();
    d.verdict = judge::JudgeVerdict{judge::Verdict::unparseable, "", std::string(judge::to_string(id)), ""};
  }
  return d;
}

inline Decision decided(bool correct) { return Decision{correct, std::nullopt, std::nullopt}; }

inline Decision failed(std::string why) { return Decision{false, std::nullopt, std::move(why)}; }

}  // namespace detail

// Multiple-choice: a bare letter, or a letter followed by '.', is compared
// with the answer after lowercasing.
inline Decision eval_indommlu(const EvalRecord& rec, const judge::JudgeFn& judge) {
  const std::string output = text::lower(rec.output.text);
  const std::string answer = text::lower(rec.answer);
  const auto cps = utf8::to_u32(output);
  if (cps.size() == 1) return detail::decided(output == answer);
  if (cps.size() > 1 && cps[1] == U'.') return detail::decided(utf8::from_u32(cps.substr(0, 1)) == answer);
  return detail::ask(judge, judge::TemplateId::mcq_correctness,
                     {{"Options", rec.options.value_or(rec.input)}, {"output_text", output}, {"answer", answer}});
}

// Optional keyword mapping from a raw entailment answer to "1"/"0". Off by
// default; the task file is expected to carry the mapped column.
struct EntailmentKeywordMapper {
  std::vector<std::string> yes = {"ya", "yes", "benar", "true", "entailment"};
  std::vector<std::string> no = {"tidak", "no", "bukan", "salah", "false", "contradiction"};

  std::optional<std::string> map(std::string_view output) const {
    const auto tokens = metrics::rouge_tokens(output);
    const std::set<std::string> present(tokens.begin(), tokens.end());
    auto any = [&](const std::vector<std::string>& words) {
      for (const auto& w : words)
        if (present.contains(text::lower(w))) return true;
      return false;
    };
    const bool y = any(yes), n = any(no);
    if (y == n) return std::nullopt;
    return y ? "1" : "0";
  }
};

inline Decision eval_id_en(const EvalRecord& rec, const judge::JudgeFn& judge,
                           const EntailmentKeywordMapper* mapper = nullptr) {
  std::optional<std::string> mapped = rec.output_mapped;
  if (!mapped && mapper) mapped = mapper->map(rec.output.text);
  if (!mapped) return detail::failed("Output_Mapped column missing");
  const std::string answer(text::strip(rec.answer));
  const std::string output(text::strip(*mapped));
  if (output == "1" || output == "0") return detail::decided(output.substr(0, 1) == answer);
  return detail::ask(judge, judge::TemplateId::equality, {{"output_text", output}, {"expected_answer", answer}});
}

inline constexpr std::string_view kRefusal = "Saya tidak dapat menemukan jawaban atas pertanyaan yang diajukan.";

// Shared by the commonsense and extractive QA tasks.
inline Decision eval_containment(const EvalRecord& rec, const judge::JudgeFn& judge) {
  const std::string& answer = rec.answer;
  const std::string& output = rec.output.text;
  const auto lowered = text::lower(output);
  if (text::contains(lowered, text::lower(answer))) return detail::decided(true);
  if (text::contains(lowered, text::lower(kRefusal))) return detail::decided(false);
  return detail::ask(judge, judge::TemplateId::containment, {{"generated_answer", output}, {"actual_answer", answer}});
}

inline const std::vector<std::string>& default_intents() {
  static const std::vector<std::string> kIntents = {
      "automatic top up",
      "balance not updated after cheque or cash deposit",
      "declined card payment",
      "declined transfer",
      "edit personal details",
  };
  return kIntents;
}

inline constexpr std::string_view kNegativeIntent = "tidak ada";

namespace detail {

// True when at least two of `words` occur in `sentence`, case-insensitively.
template <typename Range>
bool multiple_occurrences(std::string_view sentence, const Range& words) {
  const auto s = text::lower(sentence);
  int count = 0;
  for (const auto& w : words)
    if (text::contains(s, text::lower(w))) ++count;
  return count >= 2;
}

}  // namespace detail

// Ambiguous (two or more intents named) or unmatched outputs map to the
// negative intent; otherwise the first listed intent found wins.
inline std::string map_intent(std::string_view output, const std::vector<std::string>& intent_list = default_intents(),
                              std::string_view negative = kNegativeIntent) {
  if (intent_list.empty()) throw std::invalid_argument("map_intent: empty intent list");
  if (detail::multiple_occurrences(output, intent_list)) return std::string(negative);
  const auto lowered = text::lower(output);
  for (const auto& intent : intent_list)
    if (text::contains(lowered, text::lower(intent))) return text::lower(intent);
  return std::string(negative);
}

// Either a formality code (-1 unusable, 0 formal, 1 colloquial) or the
// lowercased output passed through unmapped.
struct ColloquialLabel {
  std::optional<int> code;
  std::string passthrough;

  std::string str() const { return code ? std::to_string(*code) : passthrough; }
  friend bool operator==(const ColloquialLabel&, const ColloquialLabel&) = default;
};

inline ColloquialLabel map_colloquial(const ModelOutput& output) {
  if (output.kind != OutputKind::text) return {-1, {}};
  static constexpr std::array<std::string_view, 5> kAll = {"ceremonial", "polished", "everyday", "conversational",
                                                           "colloquial"};
  if (detail::multiple_occurrences(output.text, kAll)) return {-1, {}};
  const auto lowered = text::lower(output.text);
  for (auto w : {"ceremonial", "polished", "everyday"})
    if (text::contains(lowered, w)) return {0, {}};
  for (auto w : {"conversational", "colloquial"})
    if (text::contains(lowered, w)) return {1, {}};
  return {std::nullopt, lowered};
}

inline ColloquialLabel map_colloquial(std::string_view output) { return map_colloquial(ModelOutput::of(std::string(output))); }

// -1 is never correct; codes compare with the gold label as text, and a
// passthrough must equal the gold label exactly.
inline bool colloquial_correct(const ColloquialLabel& label, std::string_view gold) {
  const auto g = text::strip(gold);
  if (label.code) return *label.code != -1 && std::to_string(*label.code) == g;
  return label.passthrough == g;
}

inline Decision eval_nusax_senti(const EvalRecord& rec, const judge::JudgeFn& judge) {
  const std::string output = text::replace_all(rec.output.text, ".", "");
  if (output.find(' ') == std::string::npos) {
    const auto ol = text::lower(output);
    const auto al = text::lower(rec.answer);
    if (ol == al) return detail::decided(true);
    static const std::map<std::string, std::string, std::less<>> kDictionary = {
        {"positive", "positif"}, {"negative", "negatif"}, {"neutral", "netral"}};
    if (auto it = kDictionary.find(ol); it != kDictionary.end()) return detail::decided(text::lower(it->second) == al);
    return detail::decided(false);
  }
  return detail::ask(judge, judge::TemplateId::equality, {{"output_text", output}, {"expected_answer", rec.answer}});
}

inline Decision eval_hatespeech(const EvalRecord& rec, const judge::JudgeFn& judge) {
  const std::string answer(text::strip(rec.answer));
  const std::string output = text::replace_all(text::strip(rec.output.text), ".", "");
  const auto cps = utf8::to_u32(output);
  if (cps.size() == 1) return detail::decided(output == answer);
  if (cps.empty()) return detail::failed("empty output");
  if (cps[0] == U'1' || cps[0] == U'0') return detail::decided(output.substr(0, 1) == answer);
  return detail::ask(judge, judge::TemplateId::equality, {{"output_text", output}, {"expected_answer", answer}});
}

}  // namespace nusa::eval
