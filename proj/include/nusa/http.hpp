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

// HTTP clients for the translation engine and the judge model.
// Requires cpp-httplib; define CPPHTTPLIB_OPENSSL_SUPPORT for https.

#pragma once

#include <chrono>
#include <cstdlib>
#include <string>
#include <string_view>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "nusa/corpus.hpp"
#include "nusa/error.hpp"
#include "nusa/eval/judge.hpp"
#include "nusa/parallel.hpp"

namespace nusa::http {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;  // starts with '/'
};

inline Endpoint parse_endpoint(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw ConfigError("endpoint \"" + std::string(url) + "\" has no scheme");
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https")
    throw ConfigError("endpoint \"" + std::string(url) + "\": unsupported scheme");
  const auto slash = url.find('/', scheme_end + 3);
  Endpoint e;
  e.base = std::string(url.substr(0, slash));
  e.path = slash == std::string_view::npos ? "/" : std::string(url.substr(slash));
  if (e.base.size() == scheme_end + 3) throw ConfigError("endpoint \"" + std::string(url) + "\" has no host");
  return e;
}

inline std::string env_or(const char* name, std::string fallback = {}) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

namespace detail {

inline nlohmann::json post_json(const Endpoint& ep, const nlohmann::json& body, const httplib::Headers& headers,
                                std::chrono::seconds timeout) {
  httplib::Client client(ep.base);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  auto res = client.Post(ep.path, headers, body.dump(), "application/json");
  if (!res) throw TransportError(ep.base + ep.path + ": " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw TransportError(ep.base + ep.path + ": HTTP " + std::to_string(res->status));
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(ep.base + ep.path + ": malformed response: " + e.what());
  }
}

}  // namespace detail

// POST {"q", "source", "target", "format"} -> {"translatedText"}.
class HttpTranslator final : public TranslationClient {
 public:
  HttpTranslator(std::string_view endpoint, std::string api_key = {},
                 std::chrono::seconds timeout = std::chrono::seconds{60})
      : ep_(parse_endpoint(endpoint)), api_key_(std::move(api_key)), timeout_(timeout) {}

  // NUSA_TRANSLATE_ENDPOINT (required), NUSA_TRANSLATE_API_KEY.
  static HttpTranslator from_env() {
    const auto url = env_or("NUSA_TRANSLATE_ENDPOINT");
    if (url.empty()) throw ConfigError("NUSA_TRANSLATE_ENDPOINT is not set");
    return HttpTranslator(url, env_or("NUSA_TRANSLATE_API_KEY"));
  }

  std::string translate(const std::string& text, const LanguageTag& src, const LanguageTag& tgt) override {
    nlohmann::json body = {{"q", text}, {"source", src.iso()}, {"target", tgt.iso()}, {"format", "text"}};
    if (!api_key_.empty()) body["api_key"] = api_key_;
    const auto reply = detail::post_json(ep_, body, {}, timeout_);
    auto it = reply.find("translatedText");
    if (it == reply.end() || !it->is_string()) throw TransportError("translation reply lacks \"translatedText\"");
    return it->get<std::string>();
  }

 private:
  Endpoint ep_;
  std::string api_key_;
  std::chrono::seconds timeout_;
};

// Chat-completion style: one user message, temperature 0, reply text taken
// from choices[0].message.content.
class HttpJudge final : public judge::JudgeClient {
 public:
  HttpJudge(std::string_view endpoint, std::string model, std::string api_key = {},
            std::chrono::seconds timeout = std::chrono::seconds{60})
      : ep_(parse_endpoint(endpoint)), model_(std::move(model)), api_key_(std::move(api_key)), timeout_(timeout) {
    if (model_.empty()) throw ConfigError("judge model name is empty");
  }

  // NUSA_JUDGE_ENDPOINT and NUSA_JUDGE_MODEL (required), NUSA_JUDGE_API_KEY.
  static HttpJudge from_env() {
    const auto url = env_or("NUSA_JUDGE_ENDPOINT");
    if (url.empty()) throw ConfigError("NUSA_JUDGE_ENDPOINT is not set");
    const auto model = env_or("NUSA_JUDGE_MODEL");
    if (model.empty()) throw ConfigError("NUSA_JUDGE_MODEL is not set");
    return HttpJudge(url, model, env_or("NUSA_JUDGE_API_KEY"));
  }

  std::string respond(const judge::JudgeRequest& request) override {
    const nlohmann::json body = {
        {"model", model_},
        {"temperature", 0},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
    };
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    const auto reply = detail::post_json(ep_, body, headers, timeout_);
    try {
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw TransportError("judge reply lacks choices[0].message.content");
    }
  }

 private:
  Endpoint ep_;
  std::string model_;
  std::string api_key_;
  std::chrono::seconds timeout_;
};

}  // namespace nusa::http
