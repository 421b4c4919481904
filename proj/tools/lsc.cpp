// lsc: lexical semantic change detection between two corpora.
//
//   lsc synth --out data                      synthetic corpus pair + gold
//   lsc train --corpus1 a.txt --corpus2 b.txt --out run
//   lsc score --corpus1 a.txt --corpus2 b.txt --targets t.txt --out run
//   lsc eval  --gold truth/ --out run
//   lsc sweep --corpus1 a.txt --corpus2 b.txt --gold truth/ --out run
//
// All options may also come from a flat key=value file given with --config;
// flags on the command line win.

#include <CLI11.hpp>

#include <iostream>

#include "lsc/cli.hpp"

int main(int argc, char** argv) {
  using lsc::cli::RunConfig;
  RunConfig cfg;

  CLI::App app{"Lexical semantic change detection between two corpora"};
  app.set_config("--config", "", "Flat key=value configuration file");
  app.require_subcommand(1);

  app.add_option("--corpus1", cfg.corpus1, "Earlier corpus (one sentence per line, .gz ok)");
  app.add_option("--corpus2", cfg.corpus2, "Later corpus");
  app.add_option("--targets", cfg.targets, "Target word list, one per line");
  app.add_option("--gold", cfg.gold, "Gold labels: directory with binary.txt/graded.txt, or a binary file");
  app.add_option("--out", cfg.out, "Output directory")->capture_default_str();
  app.add_option("--emb1", cfg.emb1, "Pre-trained vectors for corpus1 (word2vec text)");
  app.add_option("--emb2", cfg.emb2, "Pre-trained vectors for corpus2 (word2vec text)");

  app.add_option("--dim", cfg.sgns.dim, "Embedding dimension")->capture_default_str();
  app.add_option("--window", cfg.sgns.window, "Maximum context offset")->capture_default_str();
  app.add_option("--negatives", cfg.sgns.negatives, "Negative samples per pair")->capture_default_str();
  app.add_option("--min-count", cfg.sgns.min_count, "Drop words rarer than this")->capture_default_str();
  app.add_option("--epochs", cfg.sgns.epochs, "Training epochs")->capture_default_str();
  app.add_option("--lr", cfg.sgns.initial_lr, "Initial learning rate")->capture_default_str();
  app.add_option("--subsample", cfg.sgns.subsample_threshold, "Subsampling threshold (0 disables)")
      ->capture_default_str();
  app.add_option("--unigram-power", cfg.sgns.unigram_power, "Negative sampling exponent")
      ->capture_default_str();

  app.add_option("--landmarks", cfg.landmarks, "all | top:<n> | file:<path>")->capture_default_str();
  app.add_option("--features", cfg.features, "Comma list of cos,map,freq")->capture_default_str();
  app.add_option("--map-k", cfg.map_k, "Neighbours used by MAP")->capture_default_str();
  app.add_option("--freq-sign", cfg.freq_sign, "increase (more frequent > 0) or decrease")
      ->check(CLI::IsMember({"increase", "decrease"}))
      ->capture_default_str();
  app.add_option("--threshold", cfg.threshold, "Classification threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--missing-word-policy", cfg.missing_word_policy,
                 "Targets outside the shared vocabulary: change, unchanged or error")
      ->check(CLI::IsMember({"change", "unchanged", "error"}))
      ->capture_default_str();
  app.add_option("--language", cfg.language, "Answer file name under answer/task{1,2}/")
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", cfg.threads, "Worker threads (1 = deterministic)")->capture_default_str();

  app.add_option("--grid", cfg.grid, "Explicit landmark counts for sweep")->delimiter(',');
  app.add_option("--grid-points", cfg.grid_points, "Log-spaced sweep points")->capture_default_str();
  app.add_option("--grid-min", cfg.grid_min, "Smallest landmark count in the sweep")->capture_default_str();

  app.add_option("--base", cfg.base, "Base corpus for synth (default: generated topic corpus)");
  app.add_option("--synth-targets", cfg.synth_targets, "Number of injected targets")->capture_default_str();
  app.add_option("--synth-controls", cfg.synth_controls, "Number of unchanged control words")
      ->capture_default_str();
  app.add_option("--shift-rate", cfg.shift_rate, "Donor replacement probability")->capture_default_str();
  app.add_option("--synth-tokens", cfg.synth_tokens, "Generated base corpus size")->capture_default_str();

  auto* train = app.add_subcommand("train", "Train and save both embeddings")->fallthrough();
  auto* score = app.add_subcommand("score", "Align, extract features, score and write answers")->fallthrough();
  auto* eval = app.add_subcommand("eval", "Evaluate answer files against gold labels")->fallthrough();
  auto* sweep = app.add_subcommand("sweep", "Landmark-count sweep")->fallthrough();
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus pair with gold labels")
                    ->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) lsc::cli::cmd_train(cfg);
    if (score->parsed()) lsc::cli::cmd_score(cfg);
    if (eval->parsed()) lsc::cli::cmd_eval(cfg);
    if (sweep->parsed()) lsc::cli::cmd_sweep(cfg);
    if (synth->parsed()) lsc::cli::cmd_synth(cfg);
    lsc::cli::write_resolved_config(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
