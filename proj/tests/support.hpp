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

// Shared helpers for the test binaries: fixture paths, scratch
// directories and small seeded generators.

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "nusa/detail/utf8.hpp"

namespace nusa::testing {

inline std::filesystem::path data_dir() { return NUSA_TEST_DATA_DIR; }
inline std::filesystem::path oracle_dir() { return NUSA_ORACLE_DIR; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("nusa-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Relative path to content for every regular file under `root`.
inline std::map<std::string, std::string> tree_contents(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).generic_string()] = slurp(e.path());
  return out;
}

using Rng = std::mt19937_64;

inline std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Mixed scripts, assorted whitespace, the word-start marker and astral
// characters; always valid UTF-8.
inline std::string random_unicode(Rng& rng, std::size_t max_len) {
  static const std::vector<std::u32string> pools = {
      U"abcdefghijklmnopqrstuvwxyz",
      U"ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789",
      U".,;:!?'\"()-<>[]{}",
      U" \t\n\r\u000b\u000c  　",
      U"éèêëöüßİı",
      U"▁",
      U"ابتकखกข一二あ",
      U"\U0001F600\U0001F30F\U00010348",
      U"́‍﻿",
  };
  const auto len = uniform(rng, 0, max_len);
  std::u32string out;
  for (std::size_t i = 0; i < len; ++i) {
    const auto& pool = pools[uniform(rng, 0, pools.size() - 1)];
    out.push_back(pool[uniform(rng, 0, pool.size() - 1)]);
  }
  return utf8::from_u32(out);
}

// Space-separated words drawn from a small vocabulary, so repeats are common.
inline std::string random_words(Rng& rng, std::size_t count, std::size_t vocab = 40) {
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    if (i) out += uniform(rng, 0, 9) == 0 ? "\n" : " ";
    out += "w" + std::to_string(uniform(rng, 0, vocab - 1));
  }
  return out;
}

}  // namespace nusa::testing
