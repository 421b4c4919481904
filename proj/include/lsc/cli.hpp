#pragma once

// Batch commands behind the `lsc` executable. Each command takes a fully
// populated RunConfig and writes into a fixed output layout:
//
//   <out>/embeddings/corpus{1,2}.vec   word2vec text vectors
//   <out>/embeddings/corpus{1,2}.vocab vocabulary exports
//   <out>/features.csv, scores.csv, alignment.txt, landmarks.csv
//   <out>/answer/task1/<language>.txt, answer/task2/<language>.txt
//   <out>/eval.txt, eval.csv, sweep.csv, config.resolved

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lsc/align.hpp"
#include "lsc/corpus.hpp"
#include "lsc/ensemble.hpp"
#include "lsc/error.hpp"
#include "lsc/features.hpp"
#include "lsc/harness.hpp"
#include "lsc/io.hpp"
#include "lsc/pipeline.hpp"
#include "lsc/sgns.hpp"
#include "lsc/vectors.hpp"

namespace lsc::cli {

namespace fs = std::filesystem;

struct RunConfig {
  std::string corpus1, corpus2, targets, gold, out = "out";
  std::string emb1, emb2;
  SgnsConfig sgns;
  std::string landmarks = "all";
  std::string features = "cos,map,freq";
  std::size_t map_k = 100;
  std::string freq_sign = "increase";
  double threshold = 0.75;
  std::string missing_word_policy = "change";
  std::string language = "lang";
  std::uint64_t seed = 1;
  unsigned threads = 1;

  // sweep
  std::vector<std::size_t> grid;
  std::size_t grid_points = 20;
  std::size_t grid_min = 300;

  // synth
  std::string base;
  std::size_t synth_targets = 5;
  std::size_t synth_controls = 15;
  double shift_rate = 0.9;
  std::size_t synth_tokens = 1'000'000;

  void validate() const {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw InvalidArgument("threshold must lie in [0, 1]");
    (void)FeatureSet::parse(features);
    (void)parse_freq_sign(freq_sign);
    (void)parse_missing_policy(missing_word_policy);
    if (map_k < 1) throw InvalidArgument("map-k must be >= 1");
    for (const auto* p : {&corpus1, &corpus2, &targets, &gold, &emb1, &emb2, &base})
      if (!p->empty() && !fs::exists(*p)) throw IoError("input path '" + *p + "' does not exist");
    SgnsConfig s = sgns;
    s.validate();
  }

  SgnsConfig effective_sgns() const {
    SgnsConfig s = sgns;
    s.seed = seed;
    s.threads = threads;
    return s;
  }

  std::string embeddings_dir() const { return (fs::path(out) / "embeddings").string(); }
};

class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : Error("[" + stage + "] " + what), stage_(stage) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

// "all" | "top:<n>" | "file:<path>"
inline LandmarkSelection parse_landmarks(const std::string& spec) {
  if (spec == "all") return LandmarkSelection::all();
  if (spec.starts_with("top:")) {
    const auto num = spec.substr(4);
    std::size_t pos = 0;
    long long n = -1;
    try {
      n = std::stoll(num, &pos);
    } catch (const std::exception&) {
    }
    if (n < 2 || pos != num.size()) throw InvalidArgument("landmarks: bad count in '" + spec + "'");
    return LandmarkSelection::top(static_cast<std::size_t>(n));
  }
  if (spec.starts_with("file:")) return LandmarkSelection::list(read_word_list(spec.substr(5)));
  throw InvalidArgument("landmarks must be all, top:<n> or file:<path>; got '" + spec + "'");
}

inline PipelineOptions pipeline_options(const RunConfig& cfg) {
  PipelineOptions po;
  po.landmarks = parse_landmarks(cfg.landmarks);
  po.features.enabled = FeatureSet::parse(cfg.features);
  po.features.map_k = cfg.map_k;
  po.features.freq_sign = parse_freq_sign(cfg.freq_sign);
  po.features.threads = cfg.threads;
  po.threshold = cfg.threshold;
  return po;
}

// Flat "key=value" text, readable back through --config.
inline std::string resolved_config_text(const RunConfig& c) {
  std::string s;
  auto str = [&](const char* k, const std::string& v) { s += std::string(k) + "=\"" + v + "\"\n"; };
  auto num = [&](const char* k, auto v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    s += std::string(k) + "=" + os.str() + "\n";
  };
  str("corpus1", c.corpus1);
  str("corpus2", c.corpus2);
  str("targets", c.targets);
  str("gold", c.gold);
  str("out", c.out);
  str("emb1", c.emb1);
  str("emb2", c.emb2);
  num("dim", c.sgns.dim);
  num("window", c.sgns.window);
  num("negatives", c.sgns.negatives);
  num("min-count", c.sgns.min_count);
  num("epochs", c.sgns.epochs);
  num("lr", c.sgns.initial_lr);
  num("subsample", c.sgns.subsample_threshold);
  num("unigram-power", c.sgns.unigram_power);
  str("landmarks", c.landmarks);
  str("features", c.features);
  num("map-k", c.map_k);
  str("freq-sign", c.freq_sign);
  num("threshold", c.threshold);
  str("missing-word-policy", c.missing_word_policy);
  str("language", c.language);
  num("seed", c.seed);
  num("threads", c.threads);
  if (!c.grid.empty()) {
    std::string g = "[";
    for (std::size_t i = 0; i < c.grid.size(); ++i) g += (i ? "," : "") + std::to_string(c.grid[i]);
    s += "grid=" + g + "]\n";
  }
  num("grid-points", c.grid_points);
  num("grid-min", c.grid_min);
  str("base", c.base);
  num("synth-targets", c.synth_targets);
  num("synth-controls", c.synth_controls);
  num("shift-rate", c.shift_rate);
  num("synth-tokens", c.synth_tokens);
  return s;
}

inline void write_resolved_config(const RunConfig& c) {
  fs::create_directories(c.out);
  TextWriter out((fs::path(c.out) / "config.resolved").string());
  out << resolved_config_text(c);
  out.close();
}

struct Corpora {
  Vocabulary v1, v2;
  EmbeddingMatrix e1, e2;
};

inline void require(const std::string& value, const char* flag) {
  if (value.empty()) throw InvalidArgument(std::string("missing required option --") + flag);
}

// Trains both embeddings and persists them with their vocabularies.
inline Corpora cmd_train(const RunConfig& cfg, std::ostream& log = std::cout) {
  stage("config", [&] {
    cfg.validate();
    require(cfg.corpus1, "corpus1");
    require(cfg.corpus2, "corpus2");
  });
  const auto sc = cfg.effective_sgns();
  const auto dir = cfg.embeddings_dir();
  fs::create_directories(dir);
  Corpora c;
  int idx = 1;
  for (const auto* path : {&cfg.corpus1, &cfg.corpus2}) {
    const std::string name = "corpus" + std::to_string(idx);
    auto& v = idx == 1 ? c.v1 : c.v2;
    auto& e = idx == 1 ? c.e1 : c.e2;
    CorpusStream stream(*path);
    v = stage("vocabulary", [&] { return build_vocabulary(stream, sc.min_count); });
    e = stage("train", [&] { return train(stream, v, sc); });
    stage("save", [&] {
      save_vocabulary(v, dir + "/" + name + ".vocab");
      save_embeddings(e, dir + "/" + name + ".vec");
    });
    log << name << ": " << v.size() << " words (" << v.total_tokens() << " tokens), dim "
        << e.dim() << "\n";
    ++idx;
  }
  return c;
}

// Vocabularies come from the corpora; embeddings from --emb1/--emb2, then the
// output directory cache, and are trained when neither exists.
inline Corpora load_or_train(const RunConfig& cfg, std::ostream& log) {
  const auto dir = cfg.embeddings_dir();
  const std::string c1 = cfg.emb1.empty() ? dir + "/corpus1.vec" : cfg.emb1;
  const std::string c2 = cfg.emb2.empty() ? dir + "/corpus2.vec" : cfg.emb2;
  if (!fs::exists(c1) || !fs::exists(c2)) {
    log << "embeddings not found; training\n";
    auto c = cmd_train(cfg, log);
    // Reload so a fresh run scores exactly what later runs will read back.
    c.e1 = stage("load", [&] { return load_embeddings(dir + "/corpus1.vec"); });
    c.e2 = stage("load", [&] { return load_embeddings(dir + "/corpus2.vec"); });
    return c;
  }
  require(cfg.corpus1, "corpus1");
  require(cfg.corpus2, "corpus2");
  Corpora c;
  c.v1 = stage("vocabulary", [&] { return build_vocabulary(cfg.corpus1, cfg.sgns.min_count); });
  c.v2 = stage("vocabulary", [&] { return build_vocabulary(cfg.corpus2, cfg.sgns.min_count); });
  c.e1 = stage("load", [&] { return load_embeddings(c1); });
  c.e2 = stage("load", [&] { return load_embeddings(c2); });
  return c;
}

inline std::string answer_path(const RunConfig& cfg, int task) {
  return (fs::path(cfg.out) / "answer" / ("task" + std::to_string(task)) / (cfg.language + ".txt"))
      .string();
}

inline PipelineResult cmd_score(const RunConfig& cfg, std::ostream& log = std::cout) {
  stage("config", [&] { cfg.validate(); });
  const auto opts = stage("config", [&] { return pipeline_options(cfg); });
  const auto policy = parse_missing_policy(cfg.missing_word_policy);
  const auto c = load_or_train(cfg, log);
  fs::create_directories(cfg.out);
  const fs::path out(cfg.out);

  PipelineResult r;
  r.alignment = stage("align", [&] { return align(c.e1, c.e2, c.v1, c.v2, opts.landmarks); });
  r.features = stage("features", [&] {
    FeatureOptions fo = opts.features;
    fo.landmark_config = opts.landmarks.describe();
    return build_feature_table(r.alignment.aligned, c.e2, c.v1, c.v2, fo);
  });
  r.scores = stage("ensemble", [&] { return score_pipeline(r.features, opts.threshold); });

  stage("write", [&] {
    write_alignment_report(r.alignment, c.e2, (out / "alignment.txt").string(),
                           (out / "landmarks.csv").string());
    write_feature_csv(r.features, (out / "features.csv").string());
    write_score_csv(r.scores, (out / "scores.csv").string());
  });
  if (!cfg.targets.empty()) {
    const auto targets = stage("targets", [&] { return read_word_list(cfg.targets); });
    const auto answers = stage("answer", [&] { return answer_targets(r.scores, targets, policy); });
    stage("write", [&] {
      fs::create_directories(fs::path(answer_path(cfg, 1)).parent_path());
      fs::create_directories(fs::path(answer_path(cfg, 2)).parent_path());
      write_answers(answers, answer_path(cfg, 1), answer_path(cfg, 2));
    });
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", r.alignment.residual);
  log << "vocab1=" << c.v1.size() << " vocab2=" << c.v2.size()
      << " intersection=" << r.features.size() << " landmarks=" << r.alignment.landmarks.size()
      << " residual=" << buf << " features=" << r.features.enabled.str() << "\n";
  return r;
}

struct EvalReport {
  std::optional<double> accuracy, spearman;
  std::optional<BaselineResult> baseline;
};

inline EvalReport cmd_eval(const RunConfig& cfg, std::ostream& log = std::cout) {
  stage("config", [&] {
    cfg.validate();
    require(cfg.gold, "gold");
  });
  const auto gold = stage("gold", [&] { return read_gold(cfg.gold); });
  EvalReport rep;
  stage("eval", [&] {
    if (!gold.binary.empty()) {
      std::map<std::string, int> pred;
      for (auto& [w, v] : read_word_values(answer_path(cfg, 1))) pred[w] = static_cast<int>(v);
      rep.accuracy = accuracy(pred, gold.binary);
      rep.baseline = majority_class_baseline(gold.binary);
    }
    if (!gold.graded.empty()) {
      std::map<std::string, double> pred;
      for (auto& [w, v] : read_word_values(answer_path(cfg, 2))) pred[w] = v;
      rep.spearman = spearman(pred, gold.graded);
    }
  });
  std::string text, csv = "metric,value\n";
  char buf[96];
  auto line = [&](const char* name, double v) {
    std::snprintf(buf, sizeof(buf), "%-22s %.4f\n", name, v);
    text += buf;
    std::snprintf(buf, sizeof(buf), "%s,%.6g\n", name, v);
    csv += buf;
  };
  if (rep.accuracy) line("accuracy", *rep.accuracy);
  if (rep.baseline) {
    line("majority_accuracy", rep.baseline->accuracy);
    line("majority_class", rep.baseline->majority_class);
  }
  if (rep.spearman) line("spearman", *rep.spearman);
  stage("write", [&] {
    fs::create_directories(cfg.out);
    TextWriter t((fs::path(cfg.out) / "eval.txt").string());
    t << text;
    t.close();
    TextWriter c((fs::path(cfg.out) / "eval.csv").string());
    c << csv;
    c.close();
  });
  log << text;
  return rep;
}

inline SweepResult cmd_sweep(const RunConfig& cfg, std::ostream& log = std::cout) {
  stage("config", [&] {
    cfg.validate();
    require(cfg.gold, "gold");
  });
  SweepOptions so;
  so.pipeline = stage("config", [&] { return pipeline_options(cfg); });
  so.missing = parse_missing_policy(cfg.missing_word_policy);
  const auto gold = stage("gold", [&] { return read_gold(cfg.gold); });
  const auto c = load_or_train(cfg, log);
  const auto shared = stage("landmarks", [&] {
    const auto r1 = c.v1.restricted([&](const std::string& w) { return c.e1.contains(w); });
    const auto r2 = c.v2.restricted([&](const std::string& w) { return c.e2.contains(w); });
    return vocabulary_intersection(r1, r2).size();
  });
  so.grid = cfg.grid;
  if (so.grid.empty())
    so.grid = log_grid(std::min(cfg.grid_min, shared), shared, cfg.grid_points);
  for (auto n : so.grid)
    if (n < 2 || n > shared)
      throw StageError("config", "grid value " + std::to_string(n) + " outside [2, " +
                                     std::to_string(shared) + "]");
  const auto rows = stage("sweep", [&] { return landmark_sweep(c.e1, c.e2, c.v1, c.v2, gold, so); });
  stage("write", [&] {
    fs::create_directories(cfg.out);
    write_sweep_csv(rows, (fs::path(cfg.out) / "sweep.csv").string());
  });
  log << "sweep: " << rows.size() << " points over n in [" << so.grid.front() << ", "
      << so.grid.back() << "], N=" << shared << "\n";
  return rows;
}

inline SyntheticShift cmd_synth(const RunConfig& cfg, std::ostream& log = std::cout) {
  stage("config", [&] { cfg.validate(); });
  std::vector<std::string> base;
  stage("base", [&] {
    if (!cfg.base.empty()) {
      LineReader in(cfg.base);
      std::string line;
      while (in.next(line)) base.push_back(line);
    } else {
      TopicCorpusConfig tc;
      tc.tokens = cfg.synth_tokens;
      tc.seed = cfg.seed;
      base = generate_topic_corpus(tc);
    }
  });
  const auto syn = stage("synth", [&] {
    const auto targets = cfg.targets.empty()
                             ? pick_target_words(base, cfg.synth_targets, 2 * cfg.sgns.min_count, cfg.seed)
                             : read_word_list(cfg.targets);
    return generate_synthetic_shift(base, targets, cfg.shift_rate, cfg.seed, cfg.synth_controls);
  });
  stage("write", [&] {
    const fs::path out(cfg.out);
    fs::create_directories(out);
    auto dump = [](const fs::path& p, const std::vector<std::string>& lines) {
      TextWriter w(p.string());
      for (const auto& l : lines) w << l << "\n";
      w.close();
    };
    dump(out / "corpus1.txt", syn.corpus1);
    dump(out / "corpus2.txt", syn.corpus2);
    std::vector<std::string> scored;
    for (const auto& w : syn.gold.words()) scored.push_back(w);
    dump(out / "targets.txt", scored);
    std::vector<std::string> pairs;
    for (std::size_t i = 0; i < syn.targets.size(); ++i)
      pairs.push_back(syn.targets[i] + "\t" + syn.donors[i]);
    dump(out / "donors.txt", pairs);
    write_gold(syn.gold, (out / "gold").string());
  });
  log << "synth: " << syn.corpus1.size() << " sentences, targets:";
  for (std::size_t i = 0; i < syn.targets.size(); ++i)
    log << " " << syn.targets[i] << "<-" << syn.donors[i];
  log << ", controls: " << syn.controls.size() << "\n";
  return syn;
}

}  // namespace lsc::cli
