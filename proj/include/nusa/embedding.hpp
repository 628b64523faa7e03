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

// Embedding matrices: mean initialization of rows for new vocabulary and
// two-component PCA projections for drift plots.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nusa/detail/csv.hpp"
#include "nusa/error.hpp"

namespace nusa {

// V x d, row-major, rows aligned with token_ids.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::vector<std::int64_t> token_ids, std::size_t dim, std::vector<double> values)
      : ids_(std::move(token_ids)), dim_(dim), values_(std::move(values)) {
    if (values_.size() != ids_.size() * dim_)
      throw DataError("embedding: expected " + std::to_string(ids_.size() * dim_) + " values, got " +
                      std::to_string(values_.size()));
    for (double v : values_)
      if (!std::isfinite(v)) throw DataError("embedding: non-finite entry");
    std::unordered_set<std::int64_t> seen;
    for (auto id : ids_)
      if (!seen.insert(id).second) throw DataError("embedding: duplicate token id " + std::to_string(id));
  }

  std::size_t rows() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<std::int64_t>& token_ids() const noexcept { return ids_; }
  const std::vector<double>& values() const noexcept { return values_; }

  std::span<const double> row(std::size_t r) const { return {values_.data() + r * dim_, dim_}; }

  // Row index of a token id, or rows() when absent.
  std::size_t index_of(std::int64_t id) const {
    auto it = std::find(ids_.begin(), ids_.end(), id);
    return static_cast<std::size_t>(it - ids_.begin());
  }

  std::vector<double> column_mean() const {
    std::vector<double> mean(dim_, 0.0);
    for (std::size_t r = 0; r < rows(); ++r)
      for (std::size_t c = 0; c < dim_; ++c) mean[c] += values_[r * dim_ + c];
    for (auto& m : mean) m /= static_cast<double>(rows());
    return mean;
  }

 private:
  std::vector<std::int64_t> ids_;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

// Appends one row per new id, each equal to the mean of all original rows.
inline EmbeddingMatrix extend_embeddings(const EmbeddingMatrix& m, const std::vector<std::int64_t>& new_ids) {
  if (m.rows() == 0) throw DataError("extend_embeddings: empty source matrix");
  std::unordered_set<std::int64_t> taken(m.token_ids().begin(), m.token_ids().end());
  for (auto id : new_ids)
    if (!taken.insert(id).second) throw DataError("extend_embeddings: token id collision " + std::to_string(id));
  const auto mean = m.column_mean();
  auto ids = m.token_ids();
  auto values = m.values();
  ids.reserve(ids.size() + new_ids.size());
  values.reserve(values.size() + new_ids.size() * m.dim());
  for (auto id : new_ids) {
    ids.push_back(id);
    values.insert(values.end(), mean.begin(), mean.end());
  }
  return EmbeddingMatrix(std::move(ids), m.dim(), std::move(values));
}

struct SymmetricEigen {
  std::vector<double> values;   // descending
  std::vector<double> vectors;  // row k is the eigenvector for values[k]
  std::size_t n = 0;
};

// Cyclic Jacobi rotations on a dense symmetric n x n matrix (row-major).
// Stops when the off-diagonal Frobenius norm falls below tol times the
// matrix norm.
inline SymmetricEigen jacobi_eigen(std::vector<double> a, std::size_t n, double tol = 1e-12,
                                   int max_sweeps = 100) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };
  double norm = 0;
  for (double x : a) norm += x * x;
  norm = std::sqrt(norm);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += 2 * at(i, j) * at(i, j);
    if (std::sqrt(off) <= tol * norm || off == 0) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return at(x, x) > at(y, y); });
  SymmetricEigen out;
  out.n = n;
  for (auto k : order) {
    out.values.push_back(at(k, k));
    for (std::size_t i = 0; i < n; ++i) out.vectors.push_back(v[i * n + k]);
  }
  return out;
}

struct ProjectionResult {
  std::vector<std::array<double, 2>> coords;
  std::array<std::vector<double>, 2> components;  // orthonormal, each of length d
  std::array<double, 2> explained_variance{};     // descending
  std::vector<std::string> labels;
};

// Top-2 principal components of the selected rows. Rows are mean-centered,
// the sample covariance (n - 1 denominator) is diagonalized, and each
// component is signed so its first nonzero coordinate is positive.
inline ProjectionResult pca2(const EmbeddingMatrix& m, const std::vector<std::int64_t>& selection,
                             std::vector<std::string> labels) {
  if (selection.size() < 3) throw DataError("pca2: need at least 3 selected rows");
  if (!labels.empty() && labels.size() != selection.size())
    throw DataError("pca2: labels must align with selection");
  if (m.dim() < 2) throw DataError("pca2: embedding dimension must be at least 2");
  const std::size_t n = selection.size(), d = m.dim();
  std::unordered_map<std::int64_t, std::size_t> where;
  for (std::size_t r = 0; r < m.rows(); ++r) where.emplace(m.token_ids()[r], r);
  std::vector<double> x(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = where.find(selection[i]);
    if (it == where.end()) throw DataError("pca2: token id " + std::to_string(selection[i]) + " not in matrix");
    const auto row = m.row(it->second);
    std::copy(row.begin(), row.end(), x.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) mean[c] += x[i * d + c];
  for (auto& v : mean) v /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) x[i * d + c] -= mean[c];

  std::vector<double> cov(d * d, 0.0);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) {
      double s = 0;
      for (std::size_t i = 0; i < n; ++i) s += x[i * d + a] * x[i * d + b];
      cov[a * d + b] = cov[b * d + a] = s / static_cast<double>(n - 1);
    }
  double trace = 0;
  for (std::size_t c = 0; c < d; ++c) trace += cov[c * d + c];
  if (trace == 0) throw DataError("pca2: degenerate selection (all rows identical)");

  const auto eig = jacobi_eigen(cov, d);
  ProjectionResult out;
  for (std::size_t k = 0; k < 2; ++k) {
    std::vector<double> comp(eig.vectors.begin() + static_cast<std::ptrdiff_t>(k * d),
                             eig.vectors.begin() + static_cast<std::ptrdiff_t>((k + 1) * d));
    double norm = 0;
    for (double c : comp) norm += c * c;
    norm = std::sqrt(norm);
    for (auto& c : comp) c /= norm;
    for (double c : comp) {
      if (std::abs(c) > 1e-12) {
        if (c < 0)
          for (auto& e : comp) e = -e;
        break;
      }
    }
    out.components[k] = std::move(comp);
    // Eigenvalues below the solver tolerance are zero variance.
    const double ev = eig.values[k];
    out.explained_variance[k] = std::abs(ev) <= 1e-12 * trace ? 0.0 : std::max(0.0, ev);
  }
  out.coords.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < 2; ++k) {
      double s = 0;
      for (std::size_t c = 0; c < d; ++c) s += x[i * d + c] * out.components[k][c];
      out.coords[i][k] = s;
    }
  out.labels = std::move(labels);
  if (out.labels.empty())
    for (auto id : selection) out.labels.push_back(std::to_string(id));
  return out;
}

inline void write_projection_csv(const ProjectionResult& p, std::ostream& out) {
  out << "label,x,y\n";
  for (std::size_t i = 0; i < p.coords.size(); ++i)
    out << csv::field(p.labels[i]) << ',' << csv::number(p.coords[i][0]) << ',' << csv::number(p.coords[i][1])
        << '\n';
}

// --- matrix file ------------------------------------------------------------
// Binary: 8-byte magic "NUSAEMB\0", u32 version, u32 reserved, u64 rows,
// u64 dim, then rows*dim little-endian float64 values in row-major order.
// Sidecar `<path>.ids.jsonl`: one {"id": n} or {"id": n, "token": "..."} per row.

inline constexpr char kEmbeddingMagic[8] = {'N', 'U', 'S', 'A', 'E', 'M', 'B', '\0'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;

namespace detail {

template <typename T>
void write_le(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
bool read_le(std::istream& in, T& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof v));
}

}  // namespace detail

inline std::filesystem::path embedding_sidecar(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".ids.jsonl");
}

inline void save_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path,
                            const std::vector<std::string>& tokens = {}) {
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(kEmbeddingMagic, sizeof kEmbeddingMagic);
    detail::write_le<std::uint32_t>(out, kEmbeddingVersion);
    detail::write_le<std::uint32_t>(out, 0);
    detail::write_le<std::uint64_t>(out, m.rows());
    detail::write_le<std::uint64_t>(out, m.dim());
    out.write(reinterpret_cast<const char*>(m.values().data()),
              static_cast<std::streamsize>(m.values().size() * sizeof(double)));
  }
  std::ofstream ids(embedding_sidecar(path), std::ios::binary | std::ios::trunc);
  if (!ids) throw DataError("cannot write " + embedding_sidecar(path).string());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    nlohmann::json j = {{"id", m.token_ids()[r]}};
    if (r < tokens.size()) j["token"] = tokens[r];
    ids << j.dump(-1, ' ', true) << '\n';
  }
}

struct LoadedEmbeddings {
  EmbeddingMatrix matrix;
  std::vector<std::string> tokens;  // empty when the sidecar carries none
};

inline LoadedEmbeddings load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  char magic[8];
  std::uint32_t version = 0, reserved = 0;
  std::uint64_t rows = 0, dim = 0;
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kEmbeddingMagic, sizeof magic) != 0)
    throw DataError(path.string() + ": bad embedding header magic");
  if (!detail::read_le(in, version) || !detail::read_le(in, reserved) || !detail::read_le(in, rows) ||
      !detail::read_le(in, dim))
    throw DataError(path.string() + ": truncated embedding header");
  if (version != kEmbeddingVersion) throw DataError(path.string() + ": unsupported embedding version");
  if (dim == 0 || rows > (std::uint64_t{1} << 32) || dim > (std::uint64_t{1} << 20))
    throw DataError(path.string() + ": implausible embedding shape");
  std::vector<double> values(rows * dim);
  if (!in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double))))
    throw DataError(path.string() + ": truncated embedding data");
  if (in.peek() != std::char_traits<char>::eof()) throw DataError(path.string() + ": trailing bytes after data");

  std::vector<std::int64_t> ids;
  std::vector<std::string> tokens;
  const auto sidecar = embedding_sidecar(path);
  std::ifstream sin(sidecar, std::ios::binary);
  if (!sin) throw DataError("cannot read " + sidecar.string());
  std::string line;
  for (std::size_t lineno = 1; std::getline(sin, line); ++lineno) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ids.push_back(j.at("id").get<std::int64_t>());
      if (j.contains("token")) tokens.push_back(j["token"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw DataError(sidecar.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (ids.size() != rows) throw DataError(sidecar.string() + ": row count does not match matrix header");
  if (!tokens.empty() && tokens.size() != rows) throw DataError(sidecar.string() + ": token labels on some rows only");
  return {EmbeddingMatrix(std::move(ids), dim, std::move(values)), std::move(tokens)};
}

}  // namespace nusa
