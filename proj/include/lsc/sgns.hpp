#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lsc/corpus.hpp"
#include "lsc/error.hpp"
#include "lsc/parallel.hpp"
#include "lsc/vectors.hpp"

namespace lsc {

// Skip-gram with negative sampling. Unstated trainer settings follow the
// usual word2vec defaults.
struct SgnsConfig {
  std::size_t dim = 300;
  std::size_t window = 10;
  std::size_t negatives = 5;
  std::uint64_t min_count = 10;
  std::size_t epochs = 5;
  double initial_lr = 0.025;
  double subsample_threshold = 1e-3;  // 0 disables
  std::uint64_t seed = 1;
  double unigram_power = 0.75;
  unsigned threads = 1;  // 1 = deterministic

  void validate() const {
    if (dim < 1) throw InvalidArgument("sgns: dim must be >= 1");
    if (window < 1) throw InvalidArgument("sgns: window must be >= 1");
    if (negatives < 1) throw InvalidArgument("sgns: negatives must be >= 1");
    if (epochs < 1) throw InvalidArgument("sgns: epochs must be >= 1");
    if (min_count < 1) throw InvalidArgument("sgns: min_count must be >= 1");
    if (!(initial_lr > 0.0)) throw InvalidArgument("sgns: initial_lr must be > 0");
    if (subsample_threshold < 0.0) throw InvalidArgument("sgns: subsample_threshold must be >= 0");
  }
};

// P(w) proportional to count(w)^power.
inline std::vector<double> negative_sampling_distribution(const Vocabulary& vocab, double power) {
  if (vocab.empty()) throw InvalidArgument("negative sampling over an empty vocabulary");
  std::vector<double> p(vocab.size());
  double z = 0.0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    p[i] = std::pow(static_cast<double>(vocab.count(i)), power);
    z += p[i];
  }
  for (auto& x : p) x /= z;
  return p;
}

// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw; keeps
// sampling identical across standard library implementations.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

class NegativeSampler {
 public:
  explicit NegativeSampler(std::span<const double> probs) : cdf_(probs.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      cdf_[i] = acc;
    }
  }

  std::uint32_t sample(std::mt19937_64& rng) const {
    const double u = unit_uniform(rng) * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::uint32_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

struct TrainingState {
  Matrix input;   // target vectors, the exported embedding
  Matrix output;  // context vectors
  std::uint64_t processed = 0;
  double lr = 0.025;

  TrainingState() = default;
  TrainingState(std::size_t vocab_size, std::size_t dim, double lr0)
      : input(Matrix::Zero(static_cast<Eigen::Index>(vocab_size), static_cast<Eigen::Index>(dim))),
        output(Matrix::Zero(static_cast<Eigen::Index>(vocab_size), static_cast<Eigen::Index>(dim))),
        lr(lr0) {}
};

inline double sigmoid(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }

// Gradient of L = log s(u_c . v_t) + sum_n log s(-u_n . v_t), where v is an
// input row and u are output rows.
struct SgnsGradient {
  Vector target;                 // dL/dv_t
  Vector context;                // dL/du_c
  std::vector<Vector> negatives; // dL/du_n, one per entry of negative_ids
};

inline SgnsGradient sgns_gradient(const TrainingState& s, std::size_t target_id,
                                  std::size_t context_id,
                                  std::span<const std::uint32_t> negative_ids) {
  const Vector v = s.input.row(static_cast<Eigen::Index>(target_id)).transpose();
  const Vector u = s.output.row(static_cast<Eigen::Index>(context_id)).transpose();
  SgnsGradient g;
  const double gp = 1.0 - sigmoid(u.dot(v));
  g.target = gp * u;
  g.context = gp * v;
  g.negatives.reserve(negative_ids.size());
  for (auto n : negative_ids) {
    const Vector un = s.output.row(n).transpose();
    const double gn = -sigmoid(un.dot(v));
    g.target += gn * un;
    g.negatives.push_back(gn * v);
  }
  return g;
}

// One ascent step on L using s.lr. Only the rows of target_id, context_id and
// negative_ids are touched; all partial derivatives are taken at the
// pre-step point.
inline void sgd_step(std::size_t target_id, std::size_t context_id,
                     std::span<const std::uint32_t> negative_ids, TrainingState& s) {
  const auto g = sgns_gradient(s, target_id, context_id, negative_ids);
  s.input.row(static_cast<Eigen::Index>(target_id)) += s.lr * g.target.transpose();
  s.output.row(static_cast<Eigen::Index>(context_id)) += s.lr * g.context.transpose();
  for (std::size_t j = 0; j < negative_ids.size(); ++j)
    s.output.row(negative_ids[j]) += s.lr * g.negatives[j].transpose();
}

namespace detail {

// Raw-pointer inner loop shared by all training threads; rows are updated
// without locks (hogwild) when more than one thread runs. Same arithmetic as
// sgd_step.
inline void sgns_update(double* v, double* out_base, std::size_t dim, std::uint32_t context,
                        const std::uint32_t* negs, std::size_t nneg, double lr, double* grad_v) {
  std::fill(grad_v, grad_v + dim, 0.0);
  auto visit = [&](std::uint32_t row, double label) {
    double* u = out_base + static_cast<std::size_t>(row) * dim;
    double dot = 0.0;
    for (std::size_t i = 0; i < dim; ++i) dot += u[i] * v[i];
    const double g = (label - sigmoid(dot)) * lr;
    for (std::size_t i = 0; i < dim; ++i) grad_v[i] += g * u[i];
    for (std::size_t i = 0; i < dim; ++i) u[i] += g * v[i];
  };
  visit(context, 1.0);
  for (std::size_t j = 0; j < nneg; ++j) visit(negs[j], 0.0);
  for (std::size_t i = 0; i < dim; ++i) v[i] += grad_v[i];
}

}  // namespace detail

// Trains on an already-encoded corpus. Returns the input-vector matrix.
inline EmbeddingMatrix train(const EncodedCorpus& corpus, const Vocabulary& vocab,
                             const SgnsConfig& cfg) {
  cfg.validate();
  if (vocab.empty()) throw InvalidArgument("sgns: empty vocabulary");
  const std::size_t V = vocab.size();
  const std::size_t dim = cfg.dim;
  TrainingState state(V, dim, cfg.initial_lr);

  {
    std::mt19937_64 init_rng(cfg.seed);
    for (Eigen::Index i = 0; i < state.input.rows(); ++i)
      for (Eigen::Index j = 0; j < state.input.cols(); ++j)
        state.input(i, j) = (unit_uniform(init_rng) - 0.5) / static_cast<double>(dim);
  }

  const NegativeSampler sampler(negative_sampling_distribution(vocab, cfg.unigram_power));

  std::uint64_t retained = 0;
  for (auto c : vocab.counts()) retained += c;
  std::vector<double> keep_prob(V, 1.0);
  if (cfg.subsample_threshold > 0.0) {
    const double thr = cfg.subsample_threshold * static_cast<double>(retained);
    for (std::size_t i = 0; i < V; ++i) {
      const double c = static_cast<double>(vocab.count(i));
      keep_prob[i] = std::min(1.0, (std::sqrt(c / thr) + 1.0) * thr / c);
    }
  }

  const double total_work = static_cast<double>(cfg.epochs) * static_cast<double>(corpus.tokens.size()) + 1.0;
  const double min_lr = cfg.initial_lr * 1e-4;
  std::atomic<std::uint64_t> processed{0};
  std::atomic<bool> diverged{false};
  double* in_base = state.input.data();
  double* out_base = state.output.data();

  const unsigned threads = std::max(1u, cfg.threads);
  parallel_for(threads, threads, [&](std::size_t t0, std::size_t t1, unsigned) {
    for (std::size_t t = t0; t < t1; ++t) {
      const std::size_t s_begin = corpus.sentences() * t / threads;
      const std::size_t s_end = corpus.sentences() * (t + 1) / threads;
      std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ULL + t + 1);
      std::vector<double> grad(dim);
      std::vector<std::uint32_t> negs(cfg.negatives);
      std::vector<std::uint32_t> sent;
      std::uint64_t local = 0;
      double lr = cfg.initial_lr;
      for (std::size_t epoch = 0; epoch < cfg.epochs && !diverged; ++epoch) {
        for (std::size_t s = s_begin; s < s_end && !diverged; ++s) {
          const std::size_t b = corpus.sentence_starts[s];
          const std::size_t e = corpus.sentence_end(s);
          sent.clear();
          for (std::size_t i = b; i < e; ++i) {
            const auto w = corpus.tokens[i];
            if (keep_prob[w] >= 1.0 || unit_uniform(rng) < keep_prob[w]) sent.push_back(w);
          }
          local += e - b;
          if (local >= 10000) {
            const auto done = processed.fetch_add(local) + local;
            local = 0;
            lr = std::max(min_lr, cfg.initial_lr * (1.0 - static_cast<double>(done) / total_work));
          }
          for (std::size_t pos = 0; pos < sent.size(); ++pos) {
            const std::size_t reduced = static_cast<std::size_t>(rng() % cfg.window);
            const std::size_t span = cfg.window - reduced;  // uniform in 1..window
            const std::size_t lo = pos >= span ? pos - span : 0;
            const std::size_t hi = std::min(sent.size() - 1, pos + span);
            double* v = in_base + static_cast<std::size_t>(sent[pos]) * dim;
            for (std::size_t c = lo; c <= hi; ++c) {
              if (c == pos) continue;
              const std::uint32_t ctx = sent[c];
              std::size_t n = 0;
              while (n < cfg.negatives) {
                const auto cand = sampler.sample(rng);
                if (cand == ctx) continue;
                negs[n++] = cand;
              }
              detail::sgns_update(v, out_base, dim, ctx, negs.data(), n, lr, grad.data());
            }
            if (!std::isfinite(v[0])) {
              diverged = true;
              break;
            }
          }
        }
      }
      processed.fetch_add(local);
    }
  });

  if (diverged || !state.input.allFinite())
    throw Error("sgns: training diverged (non-finite vectors); lower initial_lr (currently " +
                std::to_string(cfg.initial_lr) + ")");
  state.processed = processed.load();
  return EmbeddingMatrix(vocab.words(), std::move(state.input));
}

template <SentenceSource Source>
EmbeddingMatrix train(Source& stream, const Vocabulary& vocab, const SgnsConfig& cfg) {
  if (vocab.empty()) throw InvalidArgument("sgns: empty vocabulary");
  return train(encode_corpus(stream, vocab), vocab, cfg);
}

}  // namespace lsc
