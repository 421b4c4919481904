#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lsc/error.hpp"
#include "lsc/features.hpp"
#include "lsc/io.hpp"

namespace lsc {

// Empirical CDF with inclusive ties: evaluate(x) = #{samples <= x} / N.
class Ecdf {
 public:
  explicit Ecdf(std::span<const double> values) : sorted_(values.begin(), values.end()) {
    if (sorted_.empty()) throw InvalidArgument("ecdf: no samples");
    for (double v : sorted_)
      if (std::isnan(v)) throw InvalidArgument("ecdf: NaN sample");
    std::sort(sorted_.begin(), sorted_.end());
  }

  double evaluate(double x) const {
    const auto le = std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
    return static_cast<double>(le) / static_cast<double>(sorted_.size());
  }

  std::size_t size() const noexcept { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

inline Ecdf fit_ecdf(std::span<const double> values) { return Ecdf(values); }

inline double soft_vote(std::span<const double> probs) {
  if (probs.empty()) throw InvalidArgument("soft_vote: no probabilities");
  double s = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("soft_vote: probability outside [0, 1]");
    s += p;
  }
  return s / static_cast<double>(probs.size());
}

// Label 1 iff score > t (strict).
inline std::vector<int> classify(std::span<const double> scores, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("threshold must lie in [0, 1]");
  std::vector<int> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] > t ? 1 : 0;
  return out;
}

// Indices ordered by descending score, ties by ascending word.
inline std::vector<std::size_t> rank_order(std::span<const std::string> words,
                                           std::span<const double> scores) {
  if (words.size() != scores.size()) throw InvalidArgument("rank: size mismatch");
  std::vector<std::size_t> idx(words.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] != scores[b] ? scores[a] > scores[b] : words[a] < words[b];
  });
  return idx;
}

inline std::vector<std::string> rank(std::span<const std::string> words,
                                     std::span<const double> scores) {
  std::vector<std::string> out;
  for (auto i : rank_order(words, scores)) out.push_back(words[i]);
  return out;
}

struct ScoreTable {
  std::vector<std::string> words;
  FeatureSet enabled;
  std::array<std::vector<double>, 3> probs;  // per Feature; empty if disabled
  std::vector<double> score;
  std::vector<int> label;
  std::vector<std::size_t> rank;  // 1 = most changed
  double threshold = 0.75;

  const std::vector<double>& prob(Feature f) const { return probs[static_cast<std::size_t>(f)]; }
  std::size_t size() const noexcept { return words.size(); }

  std::optional<std::size_t> find(const std::string& w) const {
    auto it = std::lower_bound(words.begin(), words.end(), w);
    if (it == words.end() || *it != w) return std::nullopt;
    return static_cast<std::size_t>(it - words.begin());
  }
};

// Fits one ECDF per enabled feature over all table words, evaluates each word
// against it, soft-votes, thresholds and ranks.
inline ScoreTable score_pipeline(const FeatureTable& table, double t) {
  if (table.size() == 0) throw InvalidArgument("score: empty feature table");
  if (table.enabled.empty()) throw InvalidArgument("score: no enabled features");
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("threshold must lie in [0, 1]");
  const std::size_t n = table.size();
  ScoreTable s;
  s.words = table.words;
  s.enabled = table.enabled;
  s.threshold = t;
  const auto feats = table.enabled.list();
  for (auto f : feats) {
    const auto& col = table.column(f);
    const Ecdf cdf(col);
    auto& p = s.probs[static_cast<std::size_t>(f)];
    p.resize(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = cdf.evaluate(col[i]);
  }
  s.score.resize(n);
  std::vector<double> votes(feats.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < feats.size(); ++j) votes[j] = s.prob(feats[j])[i];
    s.score[i] = soft_vote(votes);
  }
  s.label = classify(s.score, t);
  s.rank.assign(n, 0);
  const auto order = rank_order(s.words, s.score);
  for (std::size_t r = 0; r < n; ++r) s.rank[order[r]] = r + 1;
  return s;
}

// CSV "word,p_cos,p_map,p_freq,score,label,rank" (enabled columns only).
inline void write_score_csv(const ScoreTable& s, const std::string& path) {
  TextWriter out(path);
  const auto feats = s.enabled.list();
  std::string line = "word";
  for (auto f : feats) (line += ",p_") += feature_name(f);
  out << line << ",score,label,rank\n";
  char buf[64];
  for (std::size_t i = 0; i < s.size(); ++i) {
    line = s.words[i];
    for (auto f : feats) {
      std::snprintf(buf, sizeof(buf), ",%.6g", s.prob(f)[i]);
      line += buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.6g,%d,%zu\n", s.score[i], s.label[i], s.rank[i]);
    line += buf;
    out << line;
  }
  out.close();
}

// What to report for a target word outside the scored vocabulary.
enum class MissingWordPolicy { change, unchanged, error };

inline MissingWordPolicy parse_missing_policy(std::string_view s) {
  if (s == "change") return MissingWordPolicy::change;
  if (s == "unchanged") return MissingWordPolicy::unchanged;
  if (s == "error") return MissingWordPolicy::error;
  throw InvalidArgument("missing-word policy must be change, unchanged or error; got '" +
                        std::string(s) + "'");
}

inline std::string_view missing_policy_name(MissingWordPolicy p) {
  switch (p) {
    case MissingWordPolicy::change: return "change";
    case MissingWordPolicy::unchanged: return "unchanged";
    case MissingWordPolicy::error: return "error";
  }
  return "?";
}

struct TargetAnswer {
  std::string word;
  int label = 0;
  double score = 0.0;
  bool missing = false;
};

inline std::vector<TargetAnswer> answer_targets(const ScoreTable& s,
                                                std::span<const std::string> targets,
                                                MissingWordPolicy policy) {
  std::vector<TargetAnswer> out;
  out.reserve(targets.size());
  for (const auto& w : targets) {
    if (auto i = s.find(w)) {
      out.push_back({w, s.label[*i], s.score[*i], false});
      continue;
    }
    switch (policy) {
      case MissingWordPolicy::error:
        throw Error("target word '" + w + "' is not in the scored vocabulary");
      case MissingWordPolicy::change:
        warn("target '" + w + "' not in the scored vocabulary; reported as changed");
        out.push_back({w, 1, 1.0, true});
        break;
      case MissingWordPolicy::unchanged:
        warn("target '" + w + "' not in the scored vocabulary; reported as unchanged");
        out.push_back({w, 0, 0.0, true});
        break;
    }
  }
  return out;
}

// Subtask 1: "word<TAB>label"; subtask 2: "word<TAB>score".
inline void write_answers(std::span<const TargetAnswer> answers, const std::string& task1_path,
                          const std::string& task2_path) {
  TextWriter t1(task1_path);
  TextWriter t2(task2_path);
  char buf[32];
  for (const auto& a : answers) {
    t1 << a.word << "\t" << std::to_string(a.label) << "\n";
    std::snprintf(buf, sizeof(buf), "\t%.10g\n", a.score);
    t2 << a.word << buf;
  }
  t1.close();
  t2.close();
}

// Reads "word<TAB>value" lines (answer / gold format), in file order.
inline std::vector<std::pair<std::string, double>> read_word_values(const std::string& path) {
  LineReader in(path);
  std::string line;
  std::vector<std::pair<std::string, double>> out;
  while (in.next(line)) {
    auto f = tokenize(line);
    if (f.empty()) continue;
    if (f.size() != 2) throw ParseError(path, in.line_number(), "expected 'word<TAB>value'");
    char* end = nullptr;
    const double v = std::strtod(f[1].c_str(), &end);
    if (end != f[1].c_str() + f[1].size() || !std::isfinite(v))
      throw ParseError(path, in.line_number(), "bad value '" + f[1] + "'");
    out.emplace_back(std::move(f[0]), v);
  }
  return out;
}

// One word per line (first whitespace-delimited field).
inline std::vector<std::string> read_word_list(const std::string& path) {
  LineReader in(path);
  std::string line;
  std::vector<std::string> out;
  while (in.next(line)) {
    auto f = tokenize(line);
    if (!f.empty()) out.push_back(std::move(f[0]));
  }
  return out;
}

}  // namespace lsc
