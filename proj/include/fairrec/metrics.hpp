#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fairrec/model.hpp"
#include "fairrec/types.hpp"

namespace fairrec {

inline constexpr int kNumUtilityMetrics = 5;
inline const std::array<std::string, kNumUtilityMetrics> kUtilityMetricNames = {
    "recall", "precision", "f1", "hit", "ndcg"};

// Ordered top-K recommendation for one user. Pre-re-ranking the order is by
// descending score with ties broken by ascending user index; candidates never
// include the user or their training positives.
struct RecList {
  std::uint32_t user = 0;
  std::vector<std::uint32_t> items;
  std::vector<double> scores;
};

// K highest-scoring candidates for `u`, excluding u itself and
// `train_positives` (sorted). Emits a warning and a shorter list when the
// candidate pool runs out.
RecList topk(const ModelParams& params, std::uint32_t u, int k,
             const std::vector<std::uint32_t>& train_positives);

struct UtilityValues {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  double hit = 0.0;
  double ndcg = 0.0;

  double operator[](int i) const {
    const double v[kNumUtilityMetrics] = {recall, precision, f1, hit, ndcg};
    return v[i];
  }
};

// R = hits/|test|, P = hits/K, F1 = harmonic mean (0 when both are 0),
// H = [hits >= 1], N = DCG/IDCG with binary gains, 1/log2(rank+1) discounting
// and IDCG truncated at min(K, |test|). `test_positives` must be sorted and
// nonempty.
UtilityValues utility_metrics(const RecList& rec,
                              const std::vector<std::uint32_t>& test_positives,
                              int k);

// Arithmetic mean per group over evaluated users only; NaN for groups with no
// evaluated users. values[i] pairs with group_by_user[users[i]].
std::vector<double> group_mean(const std::vector<double>& values,
                               const std::vector<std::uint32_t>& users,
                               const std::vector<int>& group_by_user,
                               int n_groups);

// Mean absolute gap over unordered distinct group pairs, normalized by the
// mean group value. Groups without a value (NaN) are excluded with a warning;
// a zero mean yields NaN with a diagnostic.
double unfairness(const std::vector<double>& group_values);

// |T^F - R^F|: gap between the female ratio of the user's training positives
// and of the recommendation list.
double calibration_user(const RecList& rec, const std::vector<Gender>& genders,
                        const std::vector<std::uint32_t>& train_positives);

// Group calibration. The default aggregates by mean; `use_sum` switches to a
// plain sum over the group's users.
std::vector<double> calibration_group(const std::vector<double>& delta_user,
                                      const std::vector<std::uint32_t>& users,
                                      const std::vector<int>& group_by_user,
                                      int n_groups, bool use_sum = false);

struct MetricReport {
  int k = 0;
  std::int64_t evaluated_users = 0;
  UtilityValues overall;                              // means over evaluated users
  std::vector<std::array<double, kNumUtilityMetrics>> group_means;  // Q_X(G)
  std::array<double, kNumUtilityMetrics> delta{};     // unfairness per metric
  double avg_utility = 0.0;   // mean of the five overall means
  double avg_fairness = 0.0;  // mean of the five unfairness values
};

struct CalibrationUserRow {
  std::uint32_t user = 0;
  double train_female_ratio = 0.0;  // T^F
  double rec_female_ratio = 0.0;    // R^F
  double delta_user = 0.0;
};

struct CalibrationReport {
  std::vector<CalibrationUserRow> per_user;
  std::vector<double> group_delta;  // Delta_Group, NaN for empty groups
  double avg_group_delta = 0.0;     // mean over groups with a value
  bool sum_variant = false;
};

struct PerUserRow {
  std::uint32_t user = 0;
  int group = -1;
  UtilityValues utility;
  double delta_user = 0.0;  // NaN when calibration is undefined for the user
};

struct EvaluationResult {
  MetricReport metrics;
  CalibrationReport calibration;
  std::vector<PerUserRow> per_user;
};

// Full evaluation of recommendation lists against `eval_positives`.
// Users evaluated: nonempty eval positives and an assigned group.
EvaluationResult evaluate_lists(
    const std::vector<RecList>& lists,
    const std::vector<std::vector<std::uint32_t>>& eval_positives,
    const std::vector<std::vector<std::uint32_t>>& train_positives,
    const std::vector<int>& group_by_user, int n_groups,
    const std::vector<Gender>& genders, int k, bool calibration_sum = false);

// Scores the model and evaluates its raw top-K lists.
EvaluationResult evaluate_model(
    const ModelParams& params,
    const std::vector<std::vector<std::uint32_t>>& eval_positives,
    const std::vector<std::vector<std::uint32_t>>& train_positives,
    const std::vector<int>& group_by_user, int n_groups,
    const std::vector<Gender>& genders, int k);

std::string metric_report_to_json(const MetricReport& report);
std::string calibration_report_to_json(const CalibrationReport& report,
                                       const std::vector<UserId>& raw_ids);

// CSV: user_id,group,R,P,F1,H,N,delta_user (raw user ids).
void write_per_user_csv(const std::string& path,
                        const std::vector<PerUserRow>& rows,
                        const std::vector<UserId>& raw_ids);

}  // namespace fairrec
