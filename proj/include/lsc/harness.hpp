#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lsc/corpus.hpp"
#include "lsc/ensemble.hpp"
#include "lsc/error.hpp"
#include "lsc/io.hpp"
#include "lsc/parallel.hpp"
#include "lsc/pipeline.hpp"
#include "lsc/sgns.hpp"

namespace lsc {

// Gold annotations keyed by word: binary class and/or graded change.
struct GoldLabels {
  std::map<std::string, int> binary;
  std::map<std::string, double> graded;

  std::vector<std::string> words() const {
    std::set<std::string> s;
    for (const auto& [w, _] : binary) s.insert(w);
    for (const auto& [w, _] : graded) s.insert(w);
    return {s.begin(), s.end()};
  }
};

inline std::map<std::string, int> read_binary_labels(const std::string& path) {
  std::map<std::string, int> out;
  for (auto& [w, v] : read_word_values(path)) {
    if (v != 0.0 && v != 1.0)
      throw ParseError(path, 0, "binary label for '" + w + "' is not 0 or 1");
    out[w] = static_cast<int>(v);
  }
  return out;
}

inline std::map<std::string, double> read_graded_labels(const std::string& path) {
  std::map<std::string, double> out;
  for (auto& [w, v] : read_word_values(path)) out[w] = v;
  return out;
}

// `path` is either a directory holding binary.txt and/or graded.txt, or a
// single binary label file.
inline GoldLabels read_gold(const std::string& path) {
  namespace fs = std::filesystem;
  GoldLabels g;
  if (fs::is_directory(path)) {
    const auto b = fs::path(path) / "binary.txt";
    const auto r = fs::path(path) / "graded.txt";
    if (fs::exists(b)) g.binary = read_binary_labels(b.string());
    if (fs::exists(r)) g.graded = read_graded_labels(r.string());
    if (g.binary.empty() && g.graded.empty())
      throw IoError("gold directory '" + path + "' has neither binary.txt nor graded.txt");
  } else {
    g.binary = read_binary_labels(path);
  }
  return g;
}

inline void write_gold(const GoldLabels& g, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    TextWriter out(dir + "/binary.txt");
    for (const auto& [w, v] : g.binary) out << w << "\t" << std::to_string(v) << "\n";
    out.close();
  }
  TextWriter out(dir + "/graded.txt");
  char buf[32];
  for (const auto& [w, v] : g.graded) {
    std::snprintf(buf, sizeof(buf), "\t%.10g\n", v);
    out << w << buf;
  }
  out.close();
}

namespace detail {

template <typename V>
void require_same_words(const std::map<std::string, V>& pred, const std::map<std::string, V>& gold) {
  std::vector<std::string> missing, extra;
  for (const auto& [w, _] : gold)
    if (!pred.count(w)) missing.push_back(w);
  for (const auto& [w, _] : pred)
    if (!gold.count(w)) extra.push_back(w);
  if (missing.empty() && extra.empty()) return;
  std::string msg = "word sets differ;";
  if (!missing.empty()) {
    msg += " missing from predictions:";
    for (const auto& w : missing) msg += " " + w;
    msg += ";";
  }
  if (!extra.empty()) {
    msg += " not in gold:";
    for (const auto& w : extra) msg += " " + w;
  }
  throw Error(msg);
}

}  // namespace detail

inline double accuracy(const std::map<std::string, int>& predicted,
                       const std::map<std::string, int>& gold) {
  detail::require_same_words(predicted, gold);
  if (gold.empty()) throw InvalidArgument("accuracy: no words");
  std::size_t hit = 0;
  for (const auto& [w, y] : gold) hit += predicted.at(w) == y;
  return static_cast<double>(hit) / static_cast<double>(gold.size());
}

struct BaselineResult {
  int majority_class = 0;
  double accuracy = 0.0;
  std::map<std::string, int> predicted;
};

// Predicts the most common gold class for every word; ties go to class 0.
inline BaselineResult majority_class_baseline(const std::map<std::string, int>& gold) {
  if (gold.empty()) throw InvalidArgument("majority baseline: empty gold");
  std::size_t ones = 0;
  for (const auto& [_, y] : gold) ones += y == 1;
  BaselineResult r;
  r.majority_class = 2 * ones > gold.size() ? 1 : 0;
  for (const auto& [w, _] : gold) r.predicted[w] = r.majority_class;
  r.accuracy = accuracy(r.predicted, gold);
  return r;
}

// Mid-rank (average) ranks, 1-based.
inline std::vector<double> tied_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = mid;
    i = j + 1;
  }
  return r;
}

// Spearman's rho as the Pearson correlation of mid-rank vectors.
inline double spearman(std::span<const double> pred, std::span<const double> gold) {
  if (pred.size() != gold.size()) throw InvalidArgument("spearman: size mismatch");
  if (pred.size() < 2) throw InvalidArgument("spearman: need at least 2 observations");
  const auto rp = tied_ranks(pred);
  const auto rg = tied_ranks(gold);
  const double n = static_cast<double>(rp.size());
  const double mp = std::accumulate(rp.begin(), rp.end(), 0.0) / n;
  const double mg = std::accumulate(rg.begin(), rg.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rp.size(); ++i) {
    sxy += (rp[i] - mp) * (rg[i] - mg);
    sxx += (rp[i] - mp) * (rp[i] - mp);
    syy += (rg[i] - mg) * (rg[i] - mg);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("spearman: undefined for a constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double spearman(const std::map<std::string, double>& pred,
                       const std::map<std::string, double>& gold) {
  detail::require_same_words(pred, gold);
  std::vector<double> a, b;
  for (const auto& [w, g] : gold) {
    a.push_back(pred.at(w));
    b.push_back(g);
  }
  return spearman(a, b);
}

// relative: mean of (best - score) / best; absolute: mean of (best - score).
enum class DecayMode { relative, absolute };

inline double decay(const std::map<std::string, double>& scores,
                    const std::map<std::string, double>& best, DecayMode mode = DecayMode::relative) {
  if (scores.empty()) throw InvalidArgument("decay: no languages");
  double s = 0.0;
  for (const auto& [lang, v] : scores) {
    auto it = best.find(lang);
    if (it == best.end()) throw InvalidArgument("decay: no best score for '" + lang + "'");
    const double gap = it->second - v;
    s += mode == DecayMode::relative ? gap / it->second : gap;
  }
  return s / static_cast<double>(scores.size());
}

struct Evaluation {
  std::optional<double> accuracy;
  std::optional<double> spearman;
};

// Scores the answers of one run against gold; words absent from the answers
// are an error.
inline Evaluation evaluate_answers(std::span<const TargetAnswer> answers, const GoldLabels& gold) {
  Evaluation e;
  if (!gold.binary.empty()) {
    std::map<std::string, int> pred;
    for (const auto& a : answers)
      if (gold.binary.count(a.word)) pred[a.word] = a.label;
    detail::require_same_words(pred, gold.binary);
    e.accuracy = accuracy(pred, gold.binary);
  }
  if (!gold.graded.empty()) {
    std::map<std::string, double> pred;
    for (const auto& a : answers)
      if (gold.graded.count(a.word)) pred[a.word] = a.score;
    detail::require_same_words(pred, gold.graded);
    try {
      e.spearman = spearman(pred, gold.graded);
    } catch (const Error& err) {
      warn(err.what());
      e.spearman = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return e;
}

// `points` values spaced logarithmically over [lo, hi], rounded, deduplicated,
// always ending in hi.
inline std::vector<std::size_t> log_grid(std::size_t lo, std::size_t hi, std::size_t points) {
  if (lo < 1 || lo > hi) throw InvalidArgument("log_grid: need 1 <= lo <= hi");
  std::vector<std::size_t> g;
  if (points <= 1 || lo == hi) return {hi};
  const double a = std::log(static_cast<double>(lo));
  const double b = std::log(static_cast<double>(hi));
  for (std::size_t i = 0; i < points; ++i) {
    const double x = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    const auto v = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(x)), lo, hi);
    if (g.empty() || g.back() != v) g.push_back(v);
  }
  if (g.back() != hi) g.push_back(hi);
  return g;
}

struct SweepRow {
  std::size_t n = 0;
  double threshold = 0.75;
  std::string features;
  double accuracy = std::numeric_limits<double>::quiet_NaN();
  double spearman = std::numeric_limits<double>::quiet_NaN();
};

using SweepResult = std::vector<SweepRow>;

struct SweepOptions {
  PipelineOptions pipeline;  // landmarks field is overridden per grid point
  std::vector<std::size_t> grid;
  MissingWordPolicy missing = MissingWordPolicy::change;
  unsigned threads = 1;      // grid points evaluated concurrently
};

// Embeddings are trained once by the caller; every grid point redoes only the
// alignment and the scoring with the top-n landmark set.
inline SweepResult landmark_sweep(const EmbeddingMatrix& emb1, const EmbeddingMatrix& emb2,
                                  const Vocabulary& v1, const Vocabulary& v2, const GoldLabels& gold,
                                  const SweepOptions& opt) {
  if (gold.binary.empty() && gold.graded.empty()) throw InvalidArgument("sweep: gold labels required");
  const auto words = gold.words();
  SweepResult rows(opt.grid.size());
  parallel_for(opt.grid.size(), opt.threads, [&](std::size_t b, std::size_t e, unsigned) {
    for (std::size_t i = b; i < e; ++i) {
      if (opt.grid[i] < 2) throw InvalidArgument("sweep: grid values must be >= 2");
      PipelineOptions po = opt.pipeline;
      po.landmarks = LandmarkSelection::top(opt.grid[i]);
      if (opt.threads > 1) po.features.threads = 1;
      const auto res = run_pipeline(emb1, emb2, v1, v2, po);
      const auto answers = answer_targets(res.scores, words, opt.missing);
      const auto ev = evaluate_answers(answers, gold);
      rows[i] = {res.alignment.landmarks.size(), po.threshold, po.features.enabled.str(),
                 ev.accuracy.value_or(std::numeric_limits<double>::quiet_NaN()),
                 ev.spearman.value_or(std::numeric_limits<double>::quiet_NaN())};
    }
  });
  return rows;
}

inline void write_sweep_csv(const SweepResult& rows, const std::string& path) {
  TextWriter out(path);
  out << "n,t,features,accuracy,spearman\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6g,%s,%.6g,%.6g\n", r.n, r.threshold, r.features.c_str(),
                  r.accuracy, r.spearman);
    out << buf;
  }
  out.close();
}

// ---------------------------------------------------------------------------
// Synthetic corpora

// Topic-structured base corpus: every sentence draws its words from a single
// topic, with Zipf-distributed word frequencies inside each topic. Words are
// named "t<topic>w<index>".
struct TopicCorpusConfig {
  std::size_t topics = 25;
  std::size_t words_per_topic = 16;
  std::size_t tokens = 1'000'000;
  std::size_t min_sentence = 8;
  std::size_t max_sentence = 16;
  double zipf_exponent = 1.0;
  std::uint64_t seed = 1;
};

inline std::string topic_word(std::size_t topic, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "t%02zuw%02zu", topic, index);
  return buf;
}

inline std::vector<std::string> generate_topic_corpus(const TopicCorpusConfig& cfg) {
  if (cfg.topics < 1 || cfg.words_per_topic < 1 || cfg.min_sentence < 1 ||
      cfg.max_sentence < cfg.min_sentence)
    throw InvalidArgument("topic corpus: bad configuration");
  std::mt19937_64 rng(cfg.seed);
  std::vector<double> cdf(cfg.words_per_topic);
  double acc = 0.0;
  for (std::size_t i = 0; i < cfg.words_per_topic; ++i) {
    acc += 1.0 / std::pow(static_cast<double>(i + 1), cfg.zipf_exponent);
    cdf[i] = acc;
  }
  std::vector<std::vector<std::string>> names(cfg.topics);
  for (std::size_t t = 0; t < cfg.topics; ++t)
    for (std::size_t i = 0; i < cfg.words_per_topic; ++i) names[t].push_back(topic_word(t, i));
  std::vector<std::string> lines;
  std::size_t produced = 0;
  const std::size_t span = cfg.max_sentence - cfg.min_sentence + 1;
  while (produced < cfg.tokens) {
    const std::size_t topic = static_cast<std::size_t>(rng() % cfg.topics);
    const std::size_t len = cfg.min_sentence + static_cast<std::size_t>(rng() % span);
    std::string line;
    for (std::size_t k = 0; k < len; ++k) {
      const double u = unit_uniform(rng) * acc;
      auto idx = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      if (idx >= cfg.words_per_topic) idx = cfg.words_per_topic - 1;
      if (k) line += ' ';
      line += names[topic][idx];
    }
    lines.push_back(std::move(line));
    produced += len;
  }
  return lines;
}

struct SyntheticShift {
  std::vector<std::string> corpus1;
  std::vector<std::string> corpus2;
  std::vector<std::string> targets;
  std::vector<std::string> donors;    // donors[i] feeds targets[i]
  std::vector<std::string> controls;
  GoldLabels gold;
};

// corpus1 is the base corpus. corpus2 is the base with every occurrence of a
// donor word replaced, with probability shift_rate, by its target, so the
// target picks up the donor's contexts as a new sense. Donors are drawn from
// words at least as frequent as the target that never share a sentence with
// it (or share the fewest). Gold marks targets as changed (graded =
// shift_rate) and `n_controls` sampled other words as unchanged.
inline SyntheticShift generate_synthetic_shift(const std::vector<std::string>& base,
                                               const std::vector<std::string>& target_words,
                                               double shift_rate, std::uint64_t seed,
                                               std::size_t n_controls = 0) {
  if (!(shift_rate > 0.0 && shift_rate <= 1.0))
    throw InvalidArgument("synthetic shift: shift_rate must lie in (0, 1]");
  if (target_words.empty()) throw InvalidArgument("synthetic shift: no target words");
  if (n_controls == 0) n_controls = 3 * target_words.size();

  std::unordered_map<std::string, std::uint64_t> counts;
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(base.size());
  for (const auto& line : base) {
    sentences.push_back(tokenize(line));
    for (const auto& t : sentences.back()) ++counts[t];
  }
  std::unordered_set<std::string> target_set;
  for (const auto& t : target_words) {
    if (!counts.count(t)) throw Error("synthetic shift: target '" + t + "' not in base corpus");
    if (!target_set.insert(t).second) throw InvalidArgument("synthetic shift: duplicate target '" + t + "'");
  }

  // Sorted word list keeps candidate order independent of hash iteration.
  std::vector<std::string> vocab;
  for (const auto& [w, _] : counts) vocab.push_back(w);
  std::sort(vocab.begin(), vocab.end());

  std::mt19937_64 rng(seed);
  SyntheticShift out;
  out.targets = target_words;
  std::unordered_set<std::string> used(target_set);
  for (const auto& t : target_words) {
    std::unordered_map<std::string, std::uint64_t> cooc;
    for (const auto& s : sentences) {
      if (std::find(s.begin(), s.end(), t) == s.end()) continue;
      std::unordered_set<std::string> seen(s.begin(), s.end());
      for (const auto& w : seen) ++cooc[w];
    }
    std::vector<std::string> pool;
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    for (const auto& w : vocab) {
      if (used.count(w) || counts[w] < counts[t]) continue;
      const auto c = cooc.count(w) ? cooc[w] : 0;
      if (c < best) {
        best = c;
        pool.clear();
      }
      if (c == best) pool.push_back(w);
    }
    if (pool.empty()) {
      // No word at least as frequent: fall back to the most frequent unused.
      std::string top;
      for (const auto& w : vocab)
        if (!used.count(w) && (top.empty() || counts[w] > counts[top])) top = w;
      if (top.empty()) throw Error("synthetic shift: no donor available for '" + t + "'");
      pool.push_back(top);
    }
    const auto& donor = pool[static_cast<std::size_t>(rng() % pool.size())];
    used.insert(donor);
    out.donors.push_back(donor);
  }

  std::unordered_map<std::string, std::string> replace;
  for (std::size_t i = 0; i < out.targets.size(); ++i) replace[out.donors[i]] = out.targets[i];

  out.corpus1 = base;
  out.corpus2.reserve(base.size());
  for (const auto& s : sentences) {
    std::string line;
    for (std::size_t k = 0; k < s.size(); ++k) {
      const std::string* w = &s[k];
      if (auto it = replace.find(*w); it != replace.end() && unit_uniform(rng) < shift_rate)
        w = &it->second;
      if (k) line += ' ';
      line += *w;
    }
    out.corpus2.push_back(std::move(line));
  }

  std::vector<std::string> candidates;
  for (const auto& w : vocab)
    if (!used.count(w)) candidates.push_back(w);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  candidates.resize(std::min(n_controls, candidates.size()));
  std::sort(candidates.begin(), candidates.end());
  out.controls = candidates;

  for (const auto& t : out.targets) {
    out.gold.binary[t] = 1;
    out.gold.graded[t] = shift_rate;
  }
  for (const auto& c : out.controls) {
    out.gold.binary[c] = 0;
    out.gold.graded[c] = 0.0;
  }
  return out;
}

// Picks n distinct words with at least `min_count` occurrences, uniformly at
// random (seeded), returned in ascending order.
inline std::vector<std::string> pick_target_words(const std::vector<std::string>& base, std::size_t n,
                                                  std::uint64_t min_count, std::uint64_t seed) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& line : base)
    for (auto& t : tokenize(line)) ++counts[t];
  std::vector<std::string> pool;
  for (const auto& [w, c] : counts)
    if (c >= min_count) pool.push_back(w);
  if (pool.size() < n) throw Error("synthetic shift: not enough frequent words for the targets");
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(n);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace lsc
