#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fairrec/types.hpp"

namespace fairrec {

inline constexpr int kRatingScaleMin = 1;
inline constexpr int kRatingScaleMax = 10;

// Parses `rater_id,ratee_id,rating` lines. Duplicate (rater, ratee) pairs
// keep the maximum rating. Self-ratings are dropped with a warning.
// Throws on malformed lines (with line number) and on an empty file.
std::vector<Interaction> load_interactions(const std::string& path);

// Parses `user_id,gender` lines with gender in {F, M, U}; U rows are dropped.
// Conflicting duplicate labels for a user are an error.
GenderTable load_genders(const std::string& path);

// Keeps interactions whose rater and ratee both carry a gender label.
std::vector<Interaction> drop_ungendered(std::vector<Interaction> interactions,
                                         const GenderTable& genders);

// Keeps interactions with rating >= threshold.
std::vector<Interaction> filter_low_ratings(std::vector<Interaction> interactions,
                                            int threshold = 10);

// Maximal subgraph in which every user has combined in+out degree >= k,
// obtained by iterative pruning. A fully emptied result is reported via
// warn(), not an error.
std::vector<Interaction> kcore(std::vector<Interaction> interactions, int k = 5);

struct SplitRatios {
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;
};

struct SplitDataset {
  std::vector<Interaction> train;
  std::vector<Interaction> validation;
  std::vector<Interaction> test;
  std::uint64_t seed = 0;
};

// Shuffles female-rater and male-rater edges separately and cuts each gender
// at the requested proportions, so per-gender shares hold within one edge.
// Deterministic for a given seed. Every rater must carry a gender label.
SplitDataset stratified_split(const std::vector<Interaction>& interactions,
                              const GenderTable& genders, SplitRatios ratios,
                              std::uint64_t seed);

struct InteractionTypeStats {
  std::int64_t count = 0;
  double mean_rating = 0.0;
};

struct DatasetStats {
  std::int64_t female_users = 0;
  std::int64_t male_users = 0;
  // Buckets keyed by rater gender then ratee gender.
  InteractionTypeStats ff, fm, mf, mm;
  int n_bins = 0;
  // Histograms of per-user opposite-gender ratio over n_bins equal-width
  // bins of [0, 1] (last bin closed). Only raters have a ratio.
  std::vector<std::int64_t> ogir_hist_female;
  std::vector<std::int64_t> ogir_hist_male;
  std::vector<std::int64_t> bin_user_count;
  std::vector<double> bin_mean_degree;
};

// Descriptive statistics over the given edge set. Throws on empty input.
DatasetStats dataset_stats(const std::vector<Interaction>& interactions,
                           const GenderTable& genders, int n_bins);

std::string stats_to_json(const DatasetStats& stats);

// Split persistence: one `rater,ratee,rating` line per edge.
void write_interactions_csv(const std::string& path,
                            const std::vector<Interaction>& interactions);
std::vector<Interaction> read_interactions_csv(const std::string& path);

}  // namespace fairrec
