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

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <numeric>
#include <random>
#include <sstream>

#include "nusa/embedding.hpp"
#include "support.hpp"

namespace {

using namespace nusa;
using nusa::testing::Rng;

EmbeddingMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t dim, std::int64_t first_id = 0) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<std::int64_t> ids(rows);
  std::iota(ids.begin(), ids.end(), first_id);
  std::vector<double> v(rows * dim);
  for (auto& x : v) x = nd(rng) * 3.0 + 1.0;
  return {ids, dim, v};
}

std::vector<std::int64_t> all_ids(const EmbeddingMatrix& m) { return m.token_ids(); }

TEST(Extend, MeanRowsAppended) {
  const EmbeddingMatrix m({0, 1}, 2, {1, 3, 3, 5});
  const auto e = extend_embeddings(m, {7});
  ASSERT_EQ(e.rows(), 3u);
  EXPECT_EQ(e.token_ids().back(), 7);
  EXPECT_EQ(e.row(2)[0], 2.0);
  EXPECT_EQ(e.row(2)[1], 4.0);
  EXPECT_THROW(extend_embeddings(m, {1}), DataError);
  EXPECT_THROW(extend_embeddings(EmbeddingMatrix{}, {1}), DataError);
}

TEST(Extend, PreservesRowsAndColumnMeans) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto m = random_matrix(rng, nusa::testing::uniform(rng, 1, 40), nusa::testing::uniform(rng, 1, 12));
    std::vector<std::int64_t> add(nusa::testing::uniform(rng, 0, 30));
    std::iota(add.begin(), add.end(), 1000);
    const auto e = extend_embeddings(m, add);
    for (std::size_t i = 0; i < m.values().size(); ++i) ASSERT_EQ(e.values()[i], m.values()[i]);
    const auto before = m.column_mean(), after = e.column_mean();
    for (std::size_t c = 0; c < before.size(); ++c)
      EXPECT_LE(std::abs(after[c] - before[c]), 1e-10 * std::max(1.0, std::abs(before[c])));
    // One more mean row matches the earlier appended rows.
    const auto again = extend_embeddings(e, {5000});
    if (!add.empty()) {
      for (std::size_t c = 0; c < m.dim(); ++c)
        EXPECT_NEAR(again.row(again.rows() - 1)[c], e.row(m.rows())[c], 1e-10 * std::max(1.0, std::abs(before[c])));
    }
  }
}

TEST(Pca, MatchesDenseEigensolver) {
  Rng rng(2);
  for (int t = 0; t < 40; ++t) {
    const auto m = random_matrix(rng, 10, 5);
    const auto p = pca2(m, all_ids(m), {});

    Eigen::MatrixXd x(10, 5);
    for (int i = 0; i < 10; ++i)
      for (int c = 0; c < 5; ++c) x(i, c) = m.row(static_cast<std::size_t>(i))[static_cast<std::size_t>(c)];
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered / 9.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    for (int k = 0; k < 2; ++k) {
      Eigen::VectorXd v = solver.eigenvectors().col(4 - k);
      for (int c = 0; c < 5; ++c)
        if (std::abs(v(c)) > 1e-12) {
          if (v(c) < 0) v = -v;
          break;
        }
      EXPECT_NEAR(p.explained_variance[static_cast<std::size_t>(k)], solver.eigenvalues()(4 - k), 1e-8);
      const Eigen::VectorXd coords = centered * v;
      for (int i = 0; i < 10; ++i)
        EXPECT_NEAR(p.coords[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)], coords(i), 1e-8);
    }
    double dot = 0, n0 = 0, n1 = 0;
    for (std::size_t c = 0; c < 5; ++c) {
      dot += p.components[0][c] * p.components[1][c];
      n0 += p.components[0][c] * p.components[0][c];
      n1 += p.components[1][c] * p.components[1][c];
    }
    EXPECT_NEAR(dot, 0.0, 1e-8);
    EXPECT_NEAR(n0, 1.0, 1e-8);
    EXPECT_NEAR(n1, 1.0, 1e-8);
    EXPECT_GE(p.explained_variance[0], p.explained_variance[1]);
    EXPECT_LE(p.explained_variance[0] + p.explained_variance[1], cov.trace() + 1e-9);
  }
}

TEST(Pca, CollinearPointsHaveOneComponent) {
  const EmbeddingMatrix m({0, 1, 2, 3}, 3, {0, 0, 0, 1, 2, 2, 2, 4, 4, 3, 6, 6});
  const auto p = pca2(m, {0, 1, 2, 3}, {"a", "b", "c", "d"});
  EXPECT_EQ(p.explained_variance[1], 0.0);
  // total variance = (1+4+4) * var([0,1,2,3]) = 9 * 5/3
  EXPECT_NEAR(p.explained_variance[0], 15.0, 1e-9);
  double sx = 0, sy = 0;
  for (const auto& c : p.coords) {
    sx += c[0];
    sy += c[1];
  }
  EXPECT_NEAR(sx, 0.0, 1e-12);
  EXPECT_NEAR(sy, 0.0, 1e-12);
}

TEST(Pca, IdentityCaseAndPermutationInvariance) {
  // Centered data already on principal axes with variances 9 > 4 > 1.
  const EmbeddingMatrix m({0, 1, 2, 3, 4, 5}, 3, {3, 0, 0, -3, 0, 0, 0, 2, 0, 0, -2, 0, 0, 0, 1, 0, 0, -1});
  const auto p = pca2(m, {0, 1, 2, 3, 4, 5}, {});
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(p.coords[i][0], m.row(i)[0], 1e-12);
    EXPECT_NEAR(p.coords[i][1], m.row(i)[1], 1e-12);
  }
  const auto q = pca2(m, {5, 3, 1, 0, 2, 4}, {});
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_NEAR(q.explained_variance[k], p.explained_variance[k], 1e-12);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(q.components[k][c], p.components[k][c], 1e-12);
  }
  EXPECT_NEAR(q.coords[0][0], p.coords[5][0], 1e-12);
}

TEST(Pca, RejectsBadSelections) {
  const EmbeddingMatrix m({0, 1, 2}, 2, {1, 1, 1, 1, 1, 1});
  EXPECT_THROW(pca2(m, {0, 1}, {}), DataError);
  EXPECT_THROW(pca2(m, {0, 1, 9}, {}), DataError);
  EXPECT_THROW(pca2(m, {0, 1, 2}, {}), DataError);
  EXPECT_THROW(pca2(m, {0, 1, 2}, {"x"}), DataError);
}

TEST(Pca, CsvLayout) {
  const EmbeddingMatrix m({0, 1, 2}, 2, {0, 0, 1, 0, 0, 2});
  std::ostringstream out;
  write_projection_csv(pca2(m, {0, 1, 2}, {"a", "b,c", "d"}), out);
  EXPECT_TRUE(out.str().starts_with("label,x,y\na,"));
  EXPECT_NE(out.str().find("\"b,c\","), std::string::npos);
}

TEST(MatrixFile, RoundTripIsExact) {
  Rng rng(4);
  nusa::testing::TempDir dir;
  const auto m = random_matrix(rng, 7, 3, 100);
  save_embeddings(m, dir / "m.bin", {"a", "b", "c", "d", "e", "f", "▁g"});
  const auto back = load_embeddings(dir / "m.bin");
  EXPECT_EQ(back.matrix.values(), m.values());
  EXPECT_EQ(back.matrix.token_ids(), m.token_ids());
  EXPECT_EQ(back.tokens.back(), "▁g");
  EXPECT_EQ(std::filesystem::file_size(dir / "m.bin"), 32u + 7 * 3 * 8);

  nusa::testing::spit(dir / "bad.bin", "NOTEMBED");
  EXPECT_THROW(load_embeddings(dir / "bad.bin"), DataError);
  auto bytes = nusa::testing::slurp(dir / "m.bin");
  nusa::testing::spit(dir / "short.bin", bytes.substr(0, bytes.size() - 1));
  std::filesystem::copy_file(embedding_sidecar(dir / "m.bin"), embedding_sidecar(dir / "short.bin"));
  EXPECT_THROW(load_embeddings(dir / "short.bin"), DataError);
}

}  // namespace
