#pragma once

#include <Eigen/SVD>

#include <algorithm>
#include <cstdio>
#include <string>
#include <unordered_set>
#include <vector>

#include "lsc/corpus.hpp"
#include "lsc/error.hpp"
#include "lsc/io.hpp"
#include "lsc/vectors.hpp"

namespace lsc {

struct LandmarkSelection {
  enum class Strategy { all_intersection, top_n_frequency, explicit_list };

  Strategy strategy = Strategy::all_intersection;
  std::size_t n = 0;
  std::vector<std::string> words;

  static LandmarkSelection all() { return {}; }
  static LandmarkSelection top(std::size_t n) { return {Strategy::top_n_frequency, n, {}}; }
  static LandmarkSelection list(std::vector<std::string> w) {
    return {Strategy::explicit_list, 0, std::move(w)};
  }

  std::string describe() const {
    switch (strategy) {
      case Strategy::all_intersection: return "all";
      case Strategy::top_n_frequency: return "top:" + std::to_string(n);
      case Strategy::explicit_list: return "list:" + std::to_string(words.size());
    }
    return "?";
  }
};

// Words present in both vocabularies, in ascending byte order.
inline std::vector<std::string> vocabulary_intersection(const Vocabulary& v1, const Vocabulary& v2) {
  std::vector<std::string> out;
  const Vocabulary& small = v1.size() <= v2.size() ? v1 : v2;
  const Vocabulary& large = v1.size() <= v2.size() ? v2 : v1;
  for (const auto& w : small.words())
    if (large.contains(w)) out.push_back(w);
  std::sort(out.begin(), out.end());
  return out;
}

// Resolved landmarks are always listed in ascending byte order, so equal sets
// give bit-identical landmark matrices regardless of strategy.
inline std::vector<std::string> resolve_landmarks(const Vocabulary& v1, const Vocabulary& v2,
                                                  const LandmarkSelection& sel) {
  auto shared = vocabulary_intersection(v1, v2);
  if (shared.empty()) throw Error("landmarks: vocabularies do not intersect");
  std::vector<std::string> out;
  switch (sel.strategy) {
    case LandmarkSelection::Strategy::all_intersection:
      out = std::move(shared);
      break;
    case LandmarkSelection::Strategy::top_n_frequency: {
      if (sel.n >= shared.size()) {
        out = std::move(shared);
        break;
      }
      std::vector<std::pair<double, const std::string*>> scored;
      scored.reserve(shared.size());
      for (const auto& w : shared)
        scored.emplace_back(relative_frequency(v1, w) + relative_frequency(v2, w), &w);
      std::stable_sort(scored.begin(), scored.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      for (std::size_t i = 0; i < sel.n; ++i) out.push_back(*scored[i].second);
      std::sort(out.begin(), out.end());
      break;
    }
    case LandmarkSelection::Strategy::explicit_list: {
      std::unordered_set<std::string> seen;
      for (const auto& w : sel.words)
        if (v1.contains(w) && v2.contains(w) && seen.insert(w).second) out.push_back(w);
      if (out.empty()) throw Error("landmarks: no listed word is in both vocabularies");
      std::sort(out.begin(), out.end());
      break;
    }
  }
  if (out.size() < 2)
    throw Error("landmarks: need at least 2, resolved " + std::to_string(out.size()));
  return out;
}

// Orthogonal Q minimising ||AQ - B||_F: Q = U V^T where U S V^T = svd(A^T B).
inline Eigen::MatrixXd procrustes(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument("procrustes: shape mismatch " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()));
  if (a.rows() == 0 || a.cols() == 0) throw InvalidArgument("procrustes: empty input");
  if (!a.allFinite() || !b.allFinite()) throw Error("procrustes: non-finite input");
  const Eigen::MatrixXd m = a.transpose() * b;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw Error("procrustes: SVD did not converge");
  Eigen::MatrixXd q = svd.matrixU() * svd.matrixV().transpose();
  if (!q.allFinite()) throw Error("procrustes: SVD produced non-finite factors");
  return q;
}

struct AlignmentResult {
  Eigen::MatrixXd q;
  std::vector<std::string> landmarks;
  double residual = 0.0;       // ||A_L Q - B_L||_F
  EmbeddingMatrix aligned;     // every source row multiplied by Q
};

inline Matrix gather_rows(const EmbeddingMatrix& emb, const std::vector<std::string>& words) {
  Matrix m(static_cast<Eigen::Index>(words.size()), static_cast<Eigen::Index>(emb.dim()));
  for (std::size_t i = 0; i < words.size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) = emb.row(emb.id(words[i]));
  return m;
}

inline AlignmentResult align(const EmbeddingMatrix& source, const EmbeddingMatrix& target,
                             std::vector<std::string> landmarks) {
  if (source.dim() != target.dim())
    throw InvalidArgument("align: dimension mismatch (" + std::to_string(source.dim()) + " vs " +
                          std::to_string(target.dim()) + ")");
  if (landmarks.size() < 2) throw Error("align: need at least 2 landmarks");
  const Matrix a = gather_rows(source, landmarks);
  const Matrix b = gather_rows(target, landmarks);
  AlignmentResult r;
  r.q = procrustes(a, b);
  r.residual = (a * r.q - b).norm();
  r.landmarks = std::move(landmarks);
  r.aligned = source.with_rows(source.matrix() * r.q);
  return r;
}

// Vocabularies must describe the embedding words; landmarks outside either
// embedding are excluded by restricting the vocabularies first.
inline AlignmentResult align(const EmbeddingMatrix& source, const EmbeddingMatrix& target,
                             const Vocabulary& v1, const Vocabulary& v2,
                             const LandmarkSelection& sel) {
  const auto r1 = v1.restricted([&](const std::string& w) { return source.contains(w); });
  const auto r2 = v2.restricted([&](const std::string& w) { return target.contains(w); });
  return align(source, target, resolve_landmarks(r1, r2, sel));
}

// Diagnostics: "landmarks=<n>" and "residual=<r>" lines, plus a CSV of
// post-alignment cosine distance per landmark.
inline void write_alignment_report(const AlignmentResult& r, const EmbeddingMatrix& target,
                                   const std::string& summary_path, const std::string& csv_path) {
  char buf[64];
  {
    TextWriter out(summary_path);
    out << "landmarks=" << std::to_string(r.landmarks.size()) << "\n";
    std::snprintf(buf, sizeof(buf), "residual=%.10g\n", r.residual);
    out << buf;
    out.close();
  }
  TextWriter csv(csv_path);
  csv << "word,distance\n";
  for (const auto& w : r.landmarks) {
    const double d = 1.0 - cosine_similarity(r.aligned.row(r.aligned.id(w)), target.row(target.id(w)));
    std::snprintf(buf, sizeof(buf), ",%.6g\n", d);
    csv << w << buf;
  }
  csv.close();
}

}  // namespace lsc
