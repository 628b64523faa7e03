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

// LLM-judge fallback: the fixed yes/no prompt templates, verdict parsing,
// and a client interface with an offline fixture-backed stub.

#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

#include "nusa/detail/text.hpp"
#include "nusa/error.hpp"
#include "nusa/parallel.hpp"

namespace nusa::judge {

enum class TemplateId { mcq_correctness, containment, equality };

inline std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::mcq_correctness: return "mcq_correctness";
    case TemplateId::containment: return "containment";
    case TemplateId::equality: return "equality";
  }
  return "";
}

inline TemplateId parse_template_id(std::string_view s) {
  if (s == "mcq_correctness") return TemplateId::mcq_correctness;
  if (s == "containment") return TemplateId::containment;
  if (s == "equality") return TemplateId::equality;
  throw ConfigError("unknown judge template \"" + std::string(s) + "\"");
}

// Exact prompt texts, spacing included.
inline std::string_view template_text(TemplateId id) {
  switch (id) {
    case TemplateId::mcq_correctness:
      return "Given the following options:{Options}.The model's generated response is:{output_text}."
             "The correct answer is: {answer}.Your task is to check if the model's response is correct or not? "
             "Provide a response with Yes or No only.";
    case TemplateId::containment:
      return "Your task is to check if the Actual Answer is present in the Generated Answer."
             "Generated Answer:{generated_answer},Actual Answer:{actual_answer}."
             "Provide a response with Yes or No only.";
    case TemplateId::equality:
      return "Your task is to Verify if the given output is same as expected answer. "
             "Output: {output_text}, Expected Answer: {expected_answer}.Provide a response with Yes or No only.";
  }
  return "";
}

using Fields = std::map<std::string, std::string>;

// Substitutes every {placeholder}; each one must be present in `fields`.
inline std::string render(TemplateId id, const Fields& fields) {
  const auto tpl = template_text(id);
  std::string out;
  std::size_t pos = 0;
  while (pos < tpl.size()) {
    const auto open = tpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tpl.substr(pos));
      break;
    }
    const auto close = tpl.find('}', open);
    out.append(tpl.substr(pos, open - pos));
    const std::string name(tpl.substr(open + 1, close - open - 1));
    auto it = fields.find(name);
    if (it == fields.end())
      throw std::invalid_argument("judge template " + std::string(to_string(id)) + ": missing field \"" + name + "\"");
    out += it->second;
    pos = close + 1;
  }
  return out;
}

enum class Verdict { yes, no, unparseable };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::yes: return "yes";
    case Verdict::no: return "no";
    case Verdict::unparseable: return "unparseable";
  }
  return "";
}

struct JudgeVerdict {
  Verdict verdict = Verdict::unparseable;
  std::string raw;
  std::string prompt_id;
  std::string prompt;
};

inline Verdict parse_verdict(std::string_view raw) {
  const auto folded = text::lower(text::strip(raw));
  if (folded.starts_with("yes")) return Verdict::yes;
  if (folded.starts_with("no")) return Verdict::no;
  return Verdict::unparseable;
}

struct JudgeRequest {
  TemplateId template_id;
  Fields fields;
  std::string prompt;
};

class JudgeClient {
 public:
  virtual ~JudgeClient() = default;
  // Raw text of the judge's reply. Throws TransportError on failure.
  virtual std::string respond(const JudgeRequest& request) = 0;
};

// Scripted replies keyed by (model output, gold answer) as passed to the
// template. Unknown pairs get `default_raw`.
class StubJudge final : public JudgeClient {
 public:
  explicit StubJudge(std::string default_raw = "No") : default_raw_(std::move(default_raw)) {}
  StubJudge(StubJudge&& other) noexcept
      : default_raw_(std::move(other.default_raw_)), replies_(std::move(other.replies_)), calls_(other.calls_) {}

  void add(std::string output, std::string answer, std::string raw) {
    replies_[{std::move(output), std::move(answer)}] = std::move(raw);
  }

  // jsonl lines of {"output": ..., "answer": ..., "raw": ...}.
  static StubJudge from_fixture(const std::filesystem::path& path, std::string default_raw = "No") {
    StubJudge stub(std::move(default_raw));
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read judge fixture " + path.string());
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
      if (text::strip(line).empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        stub.add(j.at("output").get<std::string>(), j.at("answer").get<std::string>(), j.at("raw").get<std::string>());
      } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    return stub;
  }

  static std::pair<std::string, std::string> key_of(const JudgeRequest& r) {
    auto get = [&](std::initializer_list<const char*> names) {
      for (const char* n : names)
        if (auto it = r.fields.find(n); it != r.fields.end()) return it->second;
      return std::string();
    };
    return {get({"output_text", "generated_answer"}), get({"answer", "actual_answer", "expected_answer"})};
  }

  std::string respond(const JudgeRequest& request) override {
    std::lock_guard lock(mu_);
    ++calls_;
    auto it = replies_.find(key_of(request));
    return it == replies_.end() ? default_raw_ : it->second;
  }

  std::size_t calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }

 private:
  std::string default_raw_;
  std::map<std::pair<std::string, std::string>, std::string> replies_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
};

// Minimum spacing between consecutive calls that share a template.
class RateLimiter {
 public:
  explicit RateLimiter(std::chrono::milliseconds min_interval = std::chrono::milliseconds{0})
      : interval_(min_interval) {}

  void acquire(TemplateId id) {
    if (interval_.count() == 0) return;
    std::unique_lock lock(mu_);
    auto& next = next_[id];
    const auto now = std::chrono::steady_clock::now();
    const auto slot = std::max(now, next);
    next = slot + interval_;
    lock.unlock();
    std::this_thread::sleep_until(slot);
  }

 private:
  std::chrono::milliseconds interval_;
  std::mutex mu_;
  std::map<TemplateId, std::chrono::steady_clock::time_point> next_;
};

struct JudgeOptions {
  RetryPolicy retry;
  RateLimiter* limiter = nullptr;
};

// Renders the template, asks the client, and parses the reply. Transport
// failures are retried and then rethrown; unparseable replies are returned
// as such.
inline JudgeVerdict judge_call(TemplateId id, const Fields& fields, JudgeClient& client,
                               const JudgeOptions& options = {}) {
  JudgeRequest req{id, fields, render(id, fields)};
  if (options.limiter) options.limiter->acquire(id);
  std::string raw = with_retries(options.retry, [&] { return client.respond(req); });
  JudgeVerdict v;
  v.verdict = parse_verdict(raw);
  v.raw = std::move(raw);
  v.prompt_id = std::string(to_string(id));
  v.prompt = std::move(req.prompt);
  return v;
}

// The callable evaluators use to reach a judge.
using JudgeFn = std::function<JudgeVerdict(TemplateId, const Fields&)>;

inline JudgeFn bind(JudgeClient& client, JudgeOptions options = {}) {
  return [&client, options](TemplateId id, const Fields& f) { return judge_call(id, f, client, options); };
}

}  // namespace nusa::judge
