#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "lsc/align.hpp"
#include "lsc/corpus.hpp"
#include "lsc/error.hpp"
#include "lsc/io.hpp"
#include "lsc/parallel.hpp"
#include "lsc/vectors.hpp"

namespace lsc {

enum class Feature : std::size_t { cos = 0, map = 1, freq = 2 };
inline constexpr std::array<Feature, 3> all_features{Feature::cos, Feature::map, Feature::freq};

inline std::string_view feature_name(Feature f) {
  switch (f) {
    case Feature::cos: return "cos";
    case Feature::map: return "map";
    case Feature::freq: return "freq";
  }
  return "?";
}

// Enabled subset of {cos, map, freq}; iteration is always in that order.
class FeatureSet {
 public:
  constexpr FeatureSet() = default;
  constexpr FeatureSet(std::initializer_list<Feature> fs) {
    for (auto f : fs) bits_[static_cast<std::size_t>(f)] = true;
  }

  static FeatureSet parse(std::string_view spec) {
    FeatureSet s;
    std::size_t i = 0;
    while (i <= spec.size()) {
      auto j = spec.find_first_of(",+", i);
      if (j == std::string_view::npos) j = spec.size();
      auto name = spec.substr(i, j - i);
      while (!name.empty() && is_space(name.front())) name.remove_prefix(1);
      while (!name.empty() && is_space(name.back())) name.remove_suffix(1);
      bool ok = false;
      for (auto f : all_features)
        if (name == feature_name(f)) s.bits_[static_cast<std::size_t>(f)] = ok = true;
      if (!ok) throw InvalidArgument("unknown feature '" + std::string(name) + "'");
      i = j + 1;
    }
    return s;
  }

  constexpr bool has(Feature f) const { return bits_[static_cast<std::size_t>(f)]; }
  void set(Feature f, bool on = true) { bits_[static_cast<std::size_t>(f)] = on; }
  std::size_t count() const { return std::size_t(bits_[0]) + bits_[1] + bits_[2]; }
  bool empty() const { return count() == 0; }

  std::vector<Feature> list() const {
    std::vector<Feature> out;
    for (auto f : all_features)
      if (has(f)) out.push_back(f);
    return out;
  }

  // "cos+map+freq"
  std::string str() const {
    std::string s;
    for (auto f : list()) {
      if (!s.empty()) s += '+';
      s += feature_name(f);
    }
    return s;
  }

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;

 private:
  std::array<bool, 3> bits_{};
};

// Orientation of the frequency differential. increase: (f2-f1)/(f1+f2),
// positive when the word became more frequent. decrease: (f1-f2)/(f1+f2).
enum class FreqSign { increase, decrease };

inline FreqSign parse_freq_sign(std::string_view s) {
  if (s == "increase") return FreqSign::increase;
  if (s == "decrease") return FreqSign::decrease;
  throw InvalidArgument("freq-sign must be 'increase' or 'decrease', got '" + std::string(s) + "'");
}

inline std::string_view freq_sign_name(FreqSign s) { return s == FreqSign::increase ? "increase" : "decrease"; }

template <typename A, typename B>
double cos_distance(const Eigen::MatrixBase<A>& v1, const Eigen::MatrixBase<B>& v2) {
  if (v1.size() != v2.size())
    throw InvalidArgument("cos_distance: dimension mismatch (" + std::to_string(v1.size()) +
                          " vs " + std::to_string(v2.size()) + ")");
  return 1.0 - cosine_similarity(v1, v2);
}

inline double cos_distance(std::span<const double> v1, std::span<const double> v2) {
  using Map = Eigen::Map<const Eigen::VectorXd>;
  return cos_distance(Map(v1.data(), static_cast<Eigen::Index>(v1.size())),
                      Map(v2.data(), static_cast<Eigen::Index>(v2.size())));
}

inline double freq_differential(double f1, double f2, FreqSign sign = FreqSign::increase) {
  if (!(f1 >= 0.0 && f1 <= 1.0 && f2 >= 0.0 && f2 <= 1.0))
    throw InvalidArgument("freq_differential: frequencies must lie in [0, 1]");
  if (f1 + f2 == 0.0) throw InvalidArgument("freq_differential: word absent from both corpora");
  const double d = (f2 - f1) / (f1 + f2);
  return sign == FreqSign::increase ? d : -d;
}

// Source and target rows restricted to a shared word list, in the same order.
struct PairedSpace {
  std::vector<std::string> words;
  Matrix source;  // aligned source rows
  Matrix target;

  static PairedSpace build(const EmbeddingMatrix& aligned_source, const EmbeddingMatrix& target,
                           std::vector<std::string> words) {
    PairedSpace p;
    p.source = gather_rows(aligned_source, words);
    p.target = gather_rows(target, words);
    p.words = std::move(words);
    return p;
  }
};

// Mapped neighbourhood distance of the word at `row` given its neighbour rows:
// s1[j] = d(v1, S[n_j]), s2[j] = d(v1, T[n_j]), result d(s1, s2), with v1 the
// aligned source vector in both profiles.
inline double map_distance_from_neighbors(const Matrix& source, const Matrix& target,
                                          std::size_t row, std::span<const Neighbor> neighbors) {
  const auto v1 = source.row(static_cast<Eigen::Index>(row));
  Eigen::VectorXd s1(static_cast<Eigen::Index>(neighbors.size()));
  Eigen::VectorXd s2(static_cast<Eigen::Index>(neighbors.size()));
  for (std::size_t j = 0; j < neighbors.size(); ++j) {
    const auto n = static_cast<Eigen::Index>(neighbors[j].id);
    s1(static_cast<Eigen::Index>(j)) = cos_distance(v1, source.row(n));
    s2(static_cast<Eigen::Index>(j)) = cos_distance(v1, target.row(n));
  }
  return cos_distance(s1, s2);
}

inline std::size_t effective_map_k(std::size_t k, std::size_t pool) {
  if (k < 1) throw InvalidArgument("map: k must be >= 1");
  if (pool < 2) throw Error("map: no neighbours available in the shared vocabulary");
  if (k > pool - 1) {
    warn("map: only " + std::to_string(pool - 1) + " neighbours available, k=" +
         std::to_string(k) + " reduced");
    return pool - 1;
  }
  return k;
}

// Single-word MAP. Neighbours of `word` are searched among the words shared
// by both spaces, so every neighbour has a target vector.
inline double map_distance(const std::string& word, const EmbeddingMatrix& aligned_source,
                           const EmbeddingMatrix& target, std::size_t k) {
  std::vector<std::string> shared;
  for (const auto& w : aligned_source.words())
    if (target.contains(w)) shared.push_back(w);
  std::sort(shared.begin(), shared.end());
  if (!target.contains(word) || !aligned_source.contains(word))
    throw UnknownWord(word);
  k = effective_map_k(k, shared.size());
  const auto space = PairedSpace::build(aligned_source, target, std::move(shared));
  const auto pos = static_cast<std::size_t>(
      std::lower_bound(space.words.begin(), space.words.end(), word) - space.words.begin());
  EmbeddingMatrix src(space.words, space.source);
  const auto nl = nearest_neighbors(src, pos, k);
  return map_distance_from_neighbors(space.source, space.target, pos, nl.neighbors);
}

struct FeatureTable {
  std::vector<std::string> words;
  FeatureSet enabled;
  std::array<std::vector<double>, 3> values;  // indexed by Feature; empty if disabled
  std::size_t map_k = 0;
  std::string landmark_config;
  FreqSign freq_sign = FreqSign::increase;

  const std::vector<double>& column(Feature f) const { return values[static_cast<std::size_t>(f)]; }
  std::vector<double>& column(Feature f) { return values[static_cast<std::size_t>(f)]; }
  std::size_t size() const noexcept { return words.size(); }

  // Range and finiteness checks; throws on violation.
  void check() const {
    constexpr double slack = 1e-9;
    for (auto f : enabled.list()) {
      const auto& col = column(f);
      if (col.size() != words.size()) throw Error("feature table: column size mismatch");
      const double lo = f == Feature::freq ? -1.0 : 0.0;
      const double hi = f == Feature::freq ? 1.0 : 2.0;
      for (std::size_t i = 0; i < col.size(); ++i)
        if (!std::isfinite(col[i]) || col[i] < lo - slack || col[i] > hi + slack)
          throw Error("feature table: " + std::string(feature_name(f)) + " value " +
                      std::to_string(col[i]) + " out of range for '" + words[i] + "'");
    }
  }
};

struct FeatureOptions {
  FeatureSet enabled{Feature::cos, Feature::map, Feature::freq};
  std::size_t map_k = 100;
  FreqSign freq_sign = FreqSign::increase;
  unsigned threads = 1;
  std::string landmark_config;
};

// One row per word present in both vocabularies and both embeddings,
// ascending byte order.
inline FeatureTable build_feature_table(const EmbeddingMatrix& aligned_source,
                                        const EmbeddingMatrix& target, const Vocabulary& v1,
                                        const Vocabulary& v2, const FeatureOptions& opt) {
  if (opt.enabled.empty()) throw InvalidArgument("features: no feature enabled");
  if (aligned_source.dim() != target.dim())
    throw InvalidArgument("features: embedding dimensions differ");
  std::vector<std::string> words;
  for (const auto& w : vocabulary_intersection(v1, v2))
    if (aligned_source.contains(w) && target.contains(w)) words.push_back(w);
  if (words.empty()) throw Error("features: empty intersection vocabulary");

  FeatureTable t;
  t.enabled = opt.enabled;
  t.map_k = opt.enabled.has(Feature::map) ? opt.map_k : 0;
  t.landmark_config = opt.landmark_config;
  t.freq_sign = opt.freq_sign;
  const std::size_t n = words.size();
  const auto space = PairedSpace::build(aligned_source, target, words);

  if (opt.enabled.has(Feature::cos)) {
    auto& col = t.column(Feature::cos);
    col.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      col[i] = cos_distance(space.source.row(static_cast<Eigen::Index>(i)),
                            space.target.row(static_cast<Eigen::Index>(i)));
  }
  if (opt.enabled.has(Feature::map)) {
    const std::size_t k = effective_map_k(opt.map_k, n);
    t.map_k = k;
    const auto neighbors = all_nearest_neighbors(space.source, k, opt.threads);
    auto& col = t.column(Feature::map);
    col.resize(n);
    parallel_for(n, opt.threads, [&](std::size_t b, std::size_t e, unsigned) {
      for (std::size_t i = b; i < e; ++i)
        col[i] = map_distance_from_neighbors(space.source, space.target, i, neighbors[i].neighbors);
    });
  }
  if (opt.enabled.has(Feature::freq)) {
    auto& col = t.column(Feature::freq);
    col.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      col[i] = freq_differential(relative_frequency(v1, words[i]), relative_frequency(v2, words[i]),
                                 opt.freq_sign);
  }
  t.words = std::move(words);
  t.check();
  return t;
}

// CSV "word,cos,map,freq" (enabled columns only), 6 significant digits.
inline void write_feature_csv(const FeatureTable& t, const std::string& path) {
  TextWriter out(path);
  const auto feats = t.enabled.list();
  std::string line = "word";
  for (auto f : feats) (line += ',') += feature_name(f);
  out << line << "\n";
  char buf[32];
  for (std::size_t i = 0; i < t.size(); ++i) {
    line = t.words[i];
    for (auto f : feats) {
      std::snprintf(buf, sizeof(buf), ",%.6g", t.column(f)[i]);
      line += buf;
    }
    out << line << "\n";
  }
  out.close();
}

}  // namespace lsc
