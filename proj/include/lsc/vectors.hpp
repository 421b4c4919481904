#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lsc/corpus.hpp"
#include "lsc/error.hpp"
#include "lsc/io.hpp"
#include "lsc/parallel.hpp"

namespace lsc {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Dense row-per-word embedding. Row i belongs to words()[i].
class EmbeddingMatrix {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  EmbeddingMatrix() = default;

  EmbeddingMatrix(std::vector<std::string> words, Matrix rows)
      : words_(std::move(words)), rows_(std::move(rows)) {
    if (static_cast<std::size_t>(rows_.rows()) != words_.size())
      throw InvalidArgument("embedding has " + std::to_string(rows_.rows()) + " rows for " +
                            std::to_string(words_.size()) + " words");
    if (!rows_.allFinite()) throw InvalidArgument("embedding contains non-finite entries");
    index_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (!index_.emplace(words_[i], i).second)
        throw InvalidArgument("duplicate embedding word '" + words_[i] + "'");
  }

  std::size_t size() const noexcept { return words_.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(rows_.cols()); }
  const std::vector<std::string>& words() const noexcept { return words_; }
  const std::string& word(std::size_t id) const { return words_.at(id); }
  const Matrix& matrix() const noexcept { return rows_; }

  auto row(std::size_t id) const { return rows_.row(static_cast<Eigen::Index>(id)); }

  std::size_t find(const std::string& w) const {
    auto it = index_.find(w);
    return it == index_.end() ? npos : it->second;
  }
  bool contains(const std::string& w) const { return find(w) != npos; }
  std::size_t id(const std::string& w) const {
    auto i = find(w);
    if (i == npos) throw UnknownWord(w);
    return i;
  }

  // Same words, rows replaced (e.g. after a rotation).
  EmbeddingMatrix with_rows(Matrix rows) const { return EmbeddingMatrix(words_, std::move(rows)); }

 private:
  std::vector<std::string> words_;
  Matrix rows_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Cosine similarity; defined as 0 when either vector has zero norm.
template <typename A, typename B>
double cosine_similarity(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

// word2vec text format: "<n> <dim>" then "word v1 ... vdim". Values get 6
// significant digits, more when |v| >= 1 so every entry survives a round trip
// within 1e-6.
inline void save_embeddings(const EmbeddingMatrix& emb, const std::string& path) {
  TextWriter out(path);
  out << std::to_string(emb.size()) << " " << std::to_string(emb.dim()) << "\n";
  char buf[32];
  std::string line;
  for (std::size_t i = 0; i < emb.size(); ++i) {
    line = emb.word(i);
    for (std::size_t j = 0; j < emb.dim(); ++j) {
      const double v = emb.matrix()(i, j);
      const int extra = std::abs(v) >= 1.0 ? 1 + static_cast<int>(std::floor(std::log10(std::abs(v)))) : 0;
      std::snprintf(buf, sizeof(buf), " %.*g", 6 + extra, v);
      line += buf;
    }
    line += '\n';
    out << line;
  }
  out.close();
}

inline EmbeddingMatrix load_embeddings(const std::string& path) {
  LineReader in(path);
  std::string line;
  if (!in.next(line)) throw ParseError(path, 1, "missing '<n> <dim>' header");
  auto header = tokenize(line);
  long long n = -1, dim = -1;
  try {
    if (header.size() != 2) throw std::invalid_argument("fields");
    std::size_t p1 = 0, p2 = 0;
    n = std::stoll(header[0], &p1);
    dim = std::stoll(header[1], &p2);
    if (p1 != header[0].size() || p2 != header[1].size() || n < 0 || dim < 1)
      throw std::invalid_argument("range");
  } catch (const std::exception&) {
    throw ParseError(path, in.line_number(), "malformed header '" + line + "'");
  }
  std::vector<std::string> words;
  words.reserve(static_cast<std::size_t>(n));
  Matrix rows(n, dim);
  std::vector<std::string> fields;
  while (in.next(line)) {
    fields = tokenize(line);
    if (fields.empty()) continue;
    if (static_cast<long long>(words.size()) >= n)
      throw ParseError(path, in.line_number(), "more rows than the header declares");
    if (static_cast<long long>(fields.size()) != dim + 1)
      throw ParseError(path, in.line_number(),
                       "expected " + std::to_string(dim) + " values, found " +
                           std::to_string(fields.size() - 1));
    const auto r = static_cast<Eigen::Index>(words.size());
    for (long long j = 0; j < dim; ++j) {
      const auto& f = fields[static_cast<std::size_t>(j + 1)];
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (end != f.c_str() + f.size() || !std::isfinite(v))
        throw ParseError(path, in.line_number(), "bad number '" + f + "'");
      rows(r, j) = v;
    }
    words.push_back(std::move(fields[0]));
  }
  if (static_cast<long long>(words.size()) != n)
    throw ParseError(path, in.line_number(),
                     "header declares " + std::to_string(n) + " rows, found " +
                         std::to_string(words.size()));
  try {
    return EmbeddingMatrix(std::move(words), std::move(rows));
  } catch (const InvalidArgument& e) {
    throw ParseError(path, in.line_number(), e.what());
  }
}

struct Neighbor {
  std::size_t id;
  double similarity;
};

struct NeighborList {
  std::size_t query;
  std::vector<Neighbor> neighbors;
};

// Strict ordering: similarity descending, then word id ascending.
inline bool neighbor_before(const Neighbor& a, const Neighbor& b) noexcept {
  return a.similarity != b.similarity ? a.similarity > b.similarity : a.id < b.id;
}

namespace detail {

inline Matrix unit_rows(const Matrix& m) {
  Matrix out = m;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double n = out.row(i).norm();
    if (n > 0.0) out.row(i) /= n;
  }
  return out;
}

inline std::vector<Neighbor> top_k(std::vector<Neighbor>& cand, std::size_t k) {
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end(),
                    neighbor_before);
  cand.resize(k);
  return cand;
}

}  // namespace detail

// Exact top-k by cosine similarity, scanning the pool (default: all words)
// and excluding the query itself.
inline NeighborList nearest_neighbors(const EmbeddingMatrix& emb, std::size_t word_id,
                                      std::size_t k,
                                      std::optional<std::span<const std::size_t>> restrict_to = {}) {
  if (word_id >= emb.size()) throw InvalidArgument("query id out of range");
  std::vector<Neighbor> cand;
  auto consider = [&](std::size_t j) {
    if (j == word_id) return;
    if (j >= emb.size()) throw InvalidArgument("restriction id out of range");
    cand.push_back({j, cosine_similarity(emb.row(word_id), emb.row(j))});
  };
  if (restrict_to) {
    cand.reserve(restrict_to->size());
    for (auto j : *restrict_to) consider(j);
  } else {
    cand.reserve(emb.size());
    for (std::size_t j = 0; j < emb.size(); ++j) consider(j);
  }
  if (k < 1 || k > cand.size())
    throw InvalidArgument("k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(cand.size()) + "]");
  return {word_id, detail::top_k(cand, k)};
}

// Batched variant: neighbor lists for every row of `m` against every other
// row, using blocked matrix products. Row indices are positions in `m`.
inline std::vector<NeighborList> all_nearest_neighbors(const Matrix& m, std::size_t k,
                                                       unsigned threads = 1) {
  const auto n = static_cast<std::size_t>(m.rows());
  if (k < 1 || k + 1 > n)
    throw InvalidArgument("k=" + std::to_string(k) + " outside [1, " + std::to_string(n - 1) + "]");
  const Matrix unit = detail::unit_rows(m);
  std::vector<NeighborList> out(n);
  constexpr std::size_t block = 256;
  const std::size_t nblocks = (n + block - 1) / block;
  parallel_for(nblocks, threads, [&](std::size_t b0, std::size_t b1, unsigned) {
    std::vector<Neighbor> cand;
    for (std::size_t b = b0; b < b1; ++b) {
      const std::size_t lo = b * block;
      const std::size_t hi = std::min(n, lo + block);
      const Eigen::MatrixXd sims =
          unit.middleRows(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo)) *
          unit.transpose();
      for (std::size_t q = lo; q < hi; ++q) {
        cand.clear();
        cand.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j)
          if (j != q)
            cand.push_back({j, sims(static_cast<Eigen::Index>(q - lo), static_cast<Eigen::Index>(j))});
        out[q] = {q, detail::top_k(cand, k)};
      }
    }
  });
  return out;
}

}  // namespace lsc
