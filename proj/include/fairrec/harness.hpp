#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairrec/dataset.hpp"
#include "fairrec/encoding.hpp"
#include "fairrec/grouping.hpp"
#include "fairrec/metrics.hpp"
#include "fairrec/rerank.hpp"
#include "fairrec/trainer.hpp"

namespace fairrec {

struct ExperimentConfig {
  std::string ratings_path;
  std::string genders_path;
  std::string out_dir = "runs";

  int rating_threshold = 10;
  int kcore_k = 5;
  SplitRatios split_ratios;
  std::uint64_t split_seed = 0;

  int n_groups = 3;
  std::vector<double> group_thresholds;  // nonempty: fixed-threshold partition
  int stats_bins = 10;

  TrainConfig train;
  RerankConfig rerank;

  std::vector<double> p_grid = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5};
  std::vector<double> lambda_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                     0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  SelectionRule selection = SelectionRule::avg_utility;
  // Re-weight exponent selection: largest grid p whose validation avg utility
  // stays within this relative tolerance of the p=0 run.
  double p_select_tolerance = 0.05;
  bool calibration_sum = false;
};

std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// FNV-1a over the canonical JSON form, excluding output location.
std::string config_hash(const ExperimentConfig& config);

std::filesystem::path run_dir(const ExperimentConfig& config);

// Preprocessed artifacts loaded back into dense form.
struct Workspace {
  UserEncoder encoder;
  EdgeSet train;
  std::vector<std::vector<std::uint32_t>> validation_positives;
  std::vector<std::vector<std::uint32_t>> test_positives;
  GroupPartition partition;
  std::vector<int> group_by_user;
};

// Load raw files, drop unlabeled users, filter low ratings, take the k-core,
// split per gender, compute the training-history partition, and persist
// everything under run_dir(config). Errors out when the k-core removes all
// edges. Returns the run directory.
std::filesystem::path cmd_preprocess(const ExperimentConfig& config);

// Descriptive statistics of the gender-labeled raw data (pre-filter) written
// to stats.json in the run directory.
std::filesystem::path cmd_stats(const ExperimentConfig& config);

Workspace load_workspace(const std::filesystem::path& dir);

struct TrainedCell {
  std::uint64_t seed = 0;
  double p = 0.0;
  bool failed = false;
  std::string error;
  int best_epoch = -1;
  double val_avg_utility = 0.0;
  double val_avg_fairness = 0.0;
};

// Train one model per (seed, p in p_grid). p=0 is the unweighted baseline;
// p>0 re-weights by group size. Divergence in one cell is recorded and the
// sweep continues. Returns the per-cell records.
std::vector<TrainedCell> cmd_train(const ExperimentConfig& config);

// Epoch picked from a validation curve: argmax of the rule's score, ties
// keeping the earlier epoch. Epochs without validation values are skipped.
int select_epoch(const std::vector<EpochRecord>& curve, SelectionRule rule);

// Largest grid p whose mean validation avg-utility (across seeds) is within
// `tolerance` relative of the p=0 value.
double select_p(const ExperimentConfig& config);

// Evaluate the best checkpoint of the given p-cell on the test split for
// every seed; persists metrics/calibration/per-user artifacts.
void cmd_evaluate(const ExperimentConfig& config, double p);

// Re-rank the checkpoints of `which` ("base": p=0, "rw": selected p) for
// every lambda in the grid and persist evaluated records.
void cmd_rerank(const ExperimentConfig& config, const std::string& which);

// Aggregate persisted records into report CSVs (comparison table, per-group
// utility bars, lambda sweep curves, calibration by variant).
void cmd_report(const ExperimentConfig& config);

// Seed-averaged test metrics of one persisted record, used by reports and
// acceptance checks.
struct VariantSummary {
  std::string variant;
  std::optional<double> lambda;
  double p = 0.0;
  int n_seeds = 0;
  UtilityValues overall;
  std::array<double, kNumUtilityMetrics> delta{};
  double avg_utility = 0.0;
  double avg_fairness = 0.0;
  double avg_group_delta = 0.0;
  std::vector<double> group_delta;                       // calibration per group
  std::vector<std::array<double, kNumUtilityMetrics>> group_means;
  std::array<double, kNumUtilityMetrics + 1> utility_std{};   // per metric + avg
  std::array<double, kNumUtilityMetrics + 1> fairness_std{};
};

std::optional<VariantSummary> summarize_variant(const ExperimentConfig& config,
                                                const std::string& variant,
                                                std::optional<double> lambda);

}  // namespace fairrec
