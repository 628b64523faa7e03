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

// Builds a small byte-fallback tokenizer and a matching random embedding
// matrix from a corpus. Used to produce the bundled test fixtures.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nusa/corpus.hpp"
#include "nusa/detail/text.hpp"
#include "nusa/detail/utf8.hpp"
#include "nusa/embedding.hpp"
#include "nusa/error.hpp"
#include "nusa/tokenizer.hpp"

namespace {

// Every character seen (bare and marker-prefixed), then the most frequent
// word substrings of 2..4 characters until `budget` pieces are chosen.
std::vector<std::string> choose_pieces(const nusa::Corpus& corpus, std::size_t budget) {
  const std::string marker(nusa::kDefaultMarker);
  std::set<std::string> chars;
  std::map<std::string, std::size_t> counts;
  for (const auto& d : corpus.docs) {
    for (auto w : nusa::text::split_words(d.text)) {
      const auto lowered = nusa::text::lower(w);
      if (nusa::text::contains(lowered, marker)) continue;
      const auto cps = nusa::utf8::to_u32(lowered);
      for (char32_t c : cps) chars.insert(nusa::utf8::from_u32(std::u32string(1, c)));
      for (std::size_t len = 2; len <= 4; ++len)
        for (std::size_t i = 0; i + len <= cps.size(); ++i) {
          auto piece = nusa::utf8::from_u32(cps.substr(i, len));
          ++counts[i == 0 ? marker + piece : piece];
        }
    }
  }
  std::vector<std::string> pieces = {marker};
  for (const auto& c : chars) {
    pieces.push_back(c);
    pieces.push_back(marker + c);
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });
  for (const auto& [p, c] : ranked) {
    if (pieces.size() >= budget) break;
    pieces.push_back(p);
  }
  return pieces;
}

double unit(std::uint64_t seed, std::uint64_t i) {
  const auto h = nusa::text::mix64(seed ^ nusa::text::mix64(i + 1));
  return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Build a toy tokenizer and embedding matrix from a corpus"};
  std::string corpus_path, tokenizer_out, matrix_out;
  std::size_t pieces = 400, dim = 16;
  std::uint64_t seed = 7;
  app.add_option("--corpus", corpus_path, "Corpus jsonl")->required();
  app.add_option("--tokenizer", tokenizer_out, "Output tokenizer path")->required();
  app.add_option("--matrix", matrix_out, "Output embedding matrix path")->required();
  app.add_option("--pieces", pieces, "Normal pieces to keep");
  app.add_option("--dim", dim, "Embedding dimension");
  app.add_option("--seed", seed, "Seed for matrix values");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto corpus = nusa::load_corpus(corpus_path);
    const auto model = nusa::TokenizerModel::with_byte_fallback(choose_pieces(corpus, pieces));
    nusa::save_tokenizer(model, tokenizer_out);

    const auto rows = model.size();
    std::vector<std::int64_t> ids(rows);
    std::vector<double> values(rows * dim);
    std::vector<std::string> tokens(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      ids[r] = static_cast<std::int64_t>(r);
      tokens[r] = model.token(static_cast<nusa::TokenId>(r)).piece;
      for (std::size_t c = 0; c < dim; ++c) values[r * dim + c] = unit(seed, r * dim + c);
    }
    nusa::save_embeddings(nusa::EmbeddingMatrix(ids, dim, values), matrix_out, tokens);
    std::cerr << "tokenizer: " << rows << " tokens; matrix: " << rows << "x" << dim << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
