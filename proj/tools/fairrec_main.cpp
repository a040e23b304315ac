// Command-line driver for the fairness-aware recommender pipeline:
// preprocess -> stats -> train -> evaluate -> rerank -> report.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "fairrec/harness.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string ratings;
  std::string genders;
  std::string out_dir;
  std::vector<double> p_grid;
  std::vector<double> lambda_grid;
  std::vector<std::uint64_t> seeds;
  std::string selection;
  double learning_rate = 0.0;
  std::uint64_t dim = 0;
  int epochs = 0;
  int k = 0;
  int k_prime = 0;
  int rating_threshold = -1;
  int kcore_k = -1;
  int n_groups = -1;
  std::uint64_t split_seed = 0;
  bool split_seed_set = false;
};

fairrec::ExperimentConfig resolve_config(const CommonOptions& options) {
  fairrec::ExperimentConfig config;
  if (!options.config_path.empty()) {
    config = fairrec::load_config(options.config_path);
  }
  if (!options.ratings.empty()) config.ratings_path = options.ratings;
  if (!options.genders.empty()) config.genders_path = options.genders;
  if (!options.out_dir.empty()) config.out_dir = options.out_dir;
  if (!options.p_grid.empty()) config.p_grid = options.p_grid;
  if (!options.lambda_grid.empty()) config.lambda_grid = options.lambda_grid;
  if (!options.seeds.empty()) config.seeds = options.seeds;
  if (options.selection == "avg_utility") {
    config.selection = fairrec::SelectionRule::avg_utility;
  } else if (options.selection == "utility_minus_fairness") {
    config.selection = fairrec::SelectionRule::utility_minus_fairness;
  }
  if (options.learning_rate > 0.0) config.train.learning_rate = options.learning_rate;
  if (options.dim > 0) config.train.dim = options.dim;
  if (options.epochs > 0) config.train.epochs = options.epochs;
  if (options.k > 0) config.rerank.k = options.k;
  if (options.k_prime > 0) config.rerank.k_prime = options.k_prime;
  if (options.rating_threshold >= 0) config.rating_threshold = options.rating_threshold;
  if (options.kcore_k >= 0) config.kcore_k = options.kcore_k;
  if (options.n_groups >= 0) config.n_groups = options.n_groups;
  if (options.split_seed_set) config.split_seed = options.split_seed;
  return config;
}

void add_common(CLI::App* cmd, CommonOptions& options) {
  cmd->add_option("--config", options.config_path, "JSON experiment config");
  cmd->add_option("--ratings", options.ratings, "ratings csv (rater,ratee,rating)");
  cmd->add_option("--genders", options.genders, "gender csv (user,F|M|U)");
  cmd->add_option("--out", options.out_dir, "output directory for run artifacts");
  cmd->add_option("--p-grid", options.p_grid, "re-weight exponent grid")
      ->delimiter(',');
  cmd->add_option("--lambda-grid", options.lambda_grid, "re-rank trade-off grid")
      ->delimiter(',');
  cmd->add_option("--seeds", options.seeds, "training seeds")->delimiter(',');
  cmd->add_option("--selection", options.selection, "model selection rule")
      ->check(CLI::IsMember({"avg_utility", "utility_minus_fairness"}));
  cmd->add_option("--lr", options.learning_rate, "learning rate");
  cmd->add_option("--dim", options.dim, "embedding dimension");
  cmd->add_option("--epochs", options.epochs, "training epochs");
  cmd->add_option("--k", options.k, "recommendation list length");
  cmd->add_option("--k-prime", options.k_prime, "re-rank candidate pool size");
  cmd->add_option("--rating-threshold", options.rating_threshold,
                  "keep ratings >= threshold");
  cmd->add_option("--kcore", options.kcore_k, "k-core parameter");
  cmd->add_option("--groups", options.n_groups, "number of equal-width groups");
  cmd->add_option("--split-seed", options.split_seed, "split shuffle seed")
      ->each([&options](const std::string&) { options.split_seed_set = true; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairness-aware dating recommender toolkit"};
  app.require_subcommand(1);

  CommonOptions options;

  auto* preprocess = app.add_subcommand(
      "preprocess", "filter, k-core, stratified split, group partition");
  add_common(preprocess, options);

  auto* stats = app.add_subcommand("stats", "descriptive dataset statistics");
  add_common(stats, options);

  auto* train = app.add_subcommand("train", "train the p-grid across seeds");
  add_common(train, options);

  auto* evaluate = app.add_subcommand(
      "evaluate", "test metrics for a p cell (default: baseline and selected p)");
  add_common(evaluate, options);
  double eval_p = 0.0;
  auto* eval_p_opt =
      evaluate->add_option("--p", eval_p, "re-weight exponent of the cell");

  auto* rerank = app.add_subcommand("rerank", "lambda-grid re-ranking");
  add_common(rerank, options);
  std::string which = "base";
  rerank->add_option("--which", which, "base or rw")
      ->check(CLI::IsMember({"base", "rw"}));

  auto* report = app.add_subcommand("report", "aggregate records into CSVs");
  add_common(report, options);

  CLI11_PARSE(app, argc, argv);

  try {
    fairrec::ExperimentConfig config = resolve_config(options);

    if (preprocess->parsed()) {
      auto dir = fairrec::cmd_preprocess(config);
      std::cout << "preprocessed artifacts in " << dir.string() << "\n";
    } else if (stats->parsed()) {
      auto path = fairrec::cmd_stats(config);
      std::cout << "stats written to " << path.string() << "\n";
    } else if (train->parsed()) {
      auto cells = fairrec::cmd_train(config);
      int failed = 0;
      for (const auto& cell : cells) failed += cell.failed ? 1 : 0;
      std::cout << cells.size() << " cells trained, " << failed << " failed\n";
      std::cout << "selected p = " << fairrec::select_p(config) << "\n";
    } else if (evaluate->parsed()) {
      std::vector<double> cells;
      if (eval_p_opt->count() > 0) {
        cells.push_back(eval_p);
      } else {
        cells.push_back(0.0);
        double selected = fairrec::select_p(config);
        if (selected != 0.0) cells.push_back(selected);
      }
      for (double p : cells) {
        fairrec::cmd_evaluate(config, p);
        std::cout << "test evaluation for p=" << p << " written under "
                  << fairrec::run_dir(config).string() << "/eval\n";
      }
    } else if (rerank->parsed()) {
      fairrec::cmd_rerank(config, which);
      std::cout << "re-ranked records written under "
                << fairrec::run_dir(config).string() << "/rerank/" << which << "\n";
    } else if (report->parsed()) {
      fairrec::cmd_report(config);
      std::cout << "reports written under " << fairrec::run_dir(config).string()
                << "/reports\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
