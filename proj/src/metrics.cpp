#include "fairrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "parallel_for.hpp"

namespace fairrec {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

RecList topk(const ModelParams& params, std::uint32_t u, int k,
             const std::vector<std::uint32_t>& train_positives) {
  RecList rec;
  rec.user = u;
  if (k <= 0) return rec;

  const std::size_t n = params.n_users;
  std::vector<std::pair<double, std::uint32_t>> scored;
  scored.reserve(n);
  for (std::uint32_t v = 0; v < n; ++v) {
    if (v == u) continue;
    if (std::binary_search(train_positives.begin(), train_positives.end(), v)) {
      continue;
    }
    scored.emplace_back(score(params, u, v), v);
  }
  auto better = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  if (scored.size() < static_cast<std::size_t>(k)) {
    warn("top-k: user " + std::to_string(u) + " has only " +
         std::to_string(scored.size()) + " candidates for k=" + std::to_string(k));
    std::sort(scored.begin(), scored.end(), better);
  } else {
    std::partial_sort(scored.begin(), scored.begin() + k, scored.end(), better);
    scored.resize(k);
  }
  rec.items.reserve(scored.size());
  rec.scores.reserve(scored.size());
  for (const auto& [s, v] : scored) {
    rec.items.push_back(v);
    rec.scores.push_back(s);
  }
  return rec;
}

UtilityValues utility_metrics(const RecList& rec,
                              const std::vector<std::uint32_t>& test_positives,
                              int k) {
  if (test_positives.empty()) {
    throw std::invalid_argument("utility_metrics: empty test positives");
  }
  UtilityValues values;
  int hits = 0;
  double dcg = 0.0;
  for (std::size_t rank = 0; rank < rec.items.size(); ++rank) {
    if (std::binary_search(test_positives.begin(), test_positives.end(),
                           rec.items[rank])) {
      ++hits;
      dcg += 1.0 / std::log2(static_cast<double>(rank) + 2.0);
    }
  }
  auto n_test = static_cast<double>(test_positives.size());
  values.recall = hits / n_test;
  values.precision = hits / static_cast<double>(k);
  values.f1 = (values.recall + values.precision) > 0.0
                  ? 2.0 * values.recall * values.precision /
                        (values.recall + values.precision)
                  : 0.0;
  values.hit = hits >= 1 ? 1.0 : 0.0;
  int ideal = std::min<int>(k, static_cast<int>(test_positives.size()));
  double idcg = 0.0;
  for (int rank = 0; rank < ideal; ++rank) {
    idcg += 1.0 / std::log2(static_cast<double>(rank) + 2.0);
  }
  values.ndcg = idcg > 0.0 ? dcg / idcg : 0.0;
  return values;
}

std::vector<double> group_mean(const std::vector<double>& values,
                               const std::vector<std::uint32_t>& users,
                               const std::vector<int>& group_by_user,
                               int n_groups) {
  if (values.size() != users.size()) {
    throw std::invalid_argument("group_mean: values/users size mismatch");
  }
  std::vector<double> sums(n_groups, 0.0);
  std::vector<std::int64_t> counts(n_groups, 0);
  for (std::size_t i = 0; i < users.size(); ++i) {
    int g = group_by_user[users[i]];
    if (g < 0 || g >= n_groups) {
      throw std::invalid_argument("group_mean: user " +
                                  std::to_string(users[i]) + " has no group");
    }
    sums[g] += values[i];
    counts[g] += 1;
  }
  std::vector<double> means(n_groups, kNaN);
  for (int g = 0; g < n_groups; ++g) {
    if (counts[g] > 0) means[g] = sums[g] / static_cast<double>(counts[g]);
  }
  return means;
}

double unfairness(const std::vector<double>& group_values) {
  std::vector<double> values;
  values.reserve(group_values.size());
  for (double v : group_values) {
    if (std::isnan(v)) {
      warn("unfairness: skipping group without evaluated users");
      continue;
    }
    values.push_back(v);
  }
  if (values.size() < 2) {
    throw std::invalid_argument("unfairness needs at least two groups with values");
  }
  double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                static_cast<double>(values.size());
  if (mean <= 0.0) {
    warn("unfairness: mean group value is not positive; result undefined");
    return kNaN;
  }
  double gap_sum = 0.0;
  std::int64_t pairs = 0;
  for (std::size_t a = 0; a < values.size(); ++a) {
    for (std::size_t b = a + 1; b < values.size(); ++b) {
      gap_sum += std::abs(values[a] - values[b]);
      ++pairs;
    }
  }
  return gap_sum / static_cast<double>(pairs) / mean;
}

double calibration_user(const RecList& rec, const std::vector<Gender>& genders,
                        const std::vector<std::uint32_t>& train_positives) {
  if (rec.items.empty() || train_positives.empty()) {
    throw std::invalid_argument("calibration_user: empty list or empty history");
  }
  auto female_ratio = [&](const std::vector<std::uint32_t>& items) {
    std::int64_t f = 0;
    for (std::uint32_t v : items) {
      if (genders[v] == Gender::F) ++f;
    }
    return static_cast<double>(f) / static_cast<double>(items.size());
  };
  return std::abs(female_ratio(train_positives) - female_ratio(rec.items));
}

std::vector<double> calibration_group(const std::vector<double>& delta_user,
                                      const std::vector<std::uint32_t>& users,
                                      const std::vector<int>& group_by_user,
                                      int n_groups, bool use_sum) {
  std::vector<double> sums(n_groups, 0.0);
  std::vector<std::int64_t> counts(n_groups, 0);
  for (std::size_t i = 0; i < users.size(); ++i) {
    int g = group_by_user[users[i]];
    if (g < 0 || g >= n_groups) continue;
    sums[g] += delta_user[i];
    counts[g] += 1;
  }
  std::vector<double> result(n_groups, kNaN);
  for (int g = 0; g < n_groups; ++g) {
    if (counts[g] == 0) continue;
    result[g] = use_sum ? sums[g] : sums[g] / static_cast<double>(counts[g]);
  }
  return result;
}

EvaluationResult evaluate_lists(
    const std::vector<RecList>& lists,
    const std::vector<std::vector<std::uint32_t>>& eval_positives,
    const std::vector<std::vector<std::uint32_t>>& train_positives,
    const std::vector<int>& group_by_user, int n_groups,
    const std::vector<Gender>& genders, int k, bool calibration_sum) {
  EvaluationResult result;
  result.metrics.k = k;
  result.metrics.group_means.assign(
      n_groups, std::array<double, kNumUtilityMetrics>{kNaN, kNaN, kNaN, kNaN, kNaN});

  std::vector<std::uint32_t> eval_users;
  std::vector<std::array<double, kNumUtilityMetrics>> eval_values;
  std::vector<std::uint32_t> cal_users;
  std::vector<double> cal_delta;

  for (const RecList& rec : lists) {
    std::uint32_t u = rec.user;
    const auto& positives = eval_positives[u];
    int g = group_by_user[u];
    if (positives.empty() || g < 0) continue;

    UtilityValues utility = utility_metrics(rec, positives, k);
    eval_users.push_back(u);
    eval_values.push_back({utility.recall, utility.precision, utility.f1,
                           utility.hit, utility.ndcg});

    PerUserRow row;
    row.user = u;
    row.group = g;
    row.utility = utility;
    row.delta_user = kNaN;
    if (!rec.items.empty() && !train_positives[u].empty()) {
      double delta = calibration_user(rec, genders, train_positives[u]);
      row.delta_user = delta;
      cal_users.push_back(u);
      cal_delta.push_back(delta);
      CalibrationUserRow cal_row;
      cal_row.user = u;
      std::int64_t f_train = 0;
      for (std::uint32_t v : train_positives[u]) {
        if (genders[v] == Gender::F) ++f_train;
      }
      cal_row.train_female_ratio = static_cast<double>(f_train) /
                                   static_cast<double>(train_positives[u].size());
      std::int64_t f_rec = 0;
      for (std::uint32_t v : rec.items) {
        if (genders[v] == Gender::F) ++f_rec;
      }
      cal_row.rec_female_ratio =
          static_cast<double>(f_rec) / static_cast<double>(rec.items.size());
      cal_row.delta_user = delta;
      result.calibration.per_user.push_back(cal_row);
    } else if (!rec.items.empty()) {
      warn("calibration: user " + std::to_string(u) + " has no training history");
    } else {
      warn("calibration: user " + std::to_string(u) + " has an empty list");
    }
    result.per_user.push_back(row);
  }

  result.metrics.evaluated_users = static_cast<std::int64_t>(eval_users.size());
  if (!eval_users.empty()) {
    double overall[kNumUtilityMetrics] = {0, 0, 0, 0, 0};
    for (int m = 0; m < kNumUtilityMetrics; ++m) {
      std::vector<double> per_metric(eval_users.size());
      for (std::size_t i = 0; i < eval_users.size(); ++i) {
        per_metric[i] = eval_values[i][m];
        overall[m] += eval_values[i][m];
      }
      overall[m] /= static_cast<double>(eval_users.size());
      std::vector<double> means =
          group_mean(per_metric, eval_users, group_by_user, n_groups);
      int groups_with_values = 0;
      for (int g = 0; g < n_groups; ++g) {
        result.metrics.group_means[g][m] = means[g];
        if (!std::isnan(means[g])) ++groups_with_values;
      }
      if (groups_with_values >= 2) {
        result.metrics.delta[m] = unfairness(means);
      } else {
        warn("unfairness undefined: fewer than two groups have evaluated users");
        result.metrics.delta[m] = kNaN;
      }
    }
    result.metrics.overall =
        UtilityValues{overall[0], overall[1], overall[2], overall[3], overall[4]};
    result.metrics.avg_utility =
        (overall[0] + overall[1] + overall[2] + overall[3] + overall[4]) / 5.0;
    result.metrics.avg_fairness =
        (result.metrics.delta[0] + result.metrics.delta[1] +
         result.metrics.delta[2] + result.metrics.delta[3] +
         result.metrics.delta[4]) /
        5.0;
  }

  result.calibration.sum_variant = calibration_sum;
  result.calibration.group_delta = calibration_group(
      cal_delta, cal_users, group_by_user, n_groups, calibration_sum);
  double sum = 0.0;
  int with_value = 0;
  for (double v : result.calibration.group_delta) {
    if (!std::isnan(v)) {
      sum += v;
      ++with_value;
    }
  }
  result.calibration.avg_group_delta = with_value > 0 ? sum / with_value : kNaN;
  return result;
}

EvaluationResult evaluate_model(
    const ModelParams& params,
    const std::vector<std::vector<std::uint32_t>>& eval_positives,
    const std::vector<std::vector<std::uint32_t>>& train_positives,
    const std::vector<int>& group_by_user, int n_groups,
    const std::vector<Gender>& genders, int k) {
  std::vector<std::uint32_t> users;
  users.reserve(params.n_users);
  for (std::uint32_t u = 0; u < params.n_users; ++u) {
    if (eval_positives[u].empty() || group_by_user[u] < 0) continue;
    users.push_back(u);
  }
  // Scoring against frozen parameters is read-only per user.
  std::vector<RecList> lists(users.size());
  detail::parallel_for(users.size(), [&](std::size_t i) {
    lists[i] = topk(params, users[i], k, train_positives[users[i]]);
  });
  return evaluate_lists(lists, eval_positives, train_positives, group_by_user,
                        n_groups, genders, k);
}

namespace {

nlohmann::ordered_json nan_safe(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace

std::string metric_report_to_json(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["k"] = report.k;
  j["evaluated_users"] = report.evaluated_users;
  j["overall"] = {{"recall", report.overall.recall},
                  {"precision", report.overall.precision},
                  {"f1", report.overall.f1},
                  {"hit", report.overall.hit},
                  {"ndcg", report.overall.ndcg}};
  nlohmann::ordered_json groups = nlohmann::ordered_json::array();
  for (const auto& means : report.group_means) {
    nlohmann::ordered_json g;
    for (int m = 0; m < kNumUtilityMetrics; ++m) {
      g[kUtilityMetricNames[m]] = nan_safe(means[m]);
    }
    groups.push_back(g);
  }
  j["group_means"] = groups;
  nlohmann::ordered_json delta;
  for (int m = 0; m < kNumUtilityMetrics; ++m) {
    delta[kUtilityMetricNames[m]] = nan_safe(report.delta[m]);
  }
  j["unfairness"] = delta;
  j["avg_utility"] = report.avg_utility;
  j["avg_fairness"] = nan_safe(report.avg_fairness);
  return j.dump(2);
}

std::string calibration_report_to_json(const CalibrationReport& report,
                                       const std::vector<UserId>& raw_ids) {
  nlohmann::ordered_json j;
  j["aggregation"] = report.sum_variant ? "sum" : "mean";
  nlohmann::ordered_json groups = nlohmann::ordered_json::array();
  for (double v : report.group_delta) groups.push_back(nan_safe(v));
  j["group_delta"] = groups;
  j["avg_group_delta"] = nan_safe(report.avg_group_delta);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const CalibrationUserRow& row : report.per_user) {
    rows.push_back({{"user", raw_ids[row.user]},
                    {"train_female_ratio", row.train_female_ratio},
                    {"rec_female_ratio", row.rec_female_ratio},
                    {"delta_user", row.delta_user}});
  }
  j["per_user"] = rows;
  return j.dump(2);
}

void write_per_user_csv(const std::string& path,
                        const std::vector<PerUserRow>& rows,
                        const std::vector<UserId>& raw_ids) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out << "user_id,group,R,P,F1,H,N,delta_user\n";
  char buf[160];
  for (const PerUserRow& row : rows) {
    std::snprintf(buf, sizeof(buf), "%lld,%d,%.10g,%.10g,%.10g,%.10g,%.10g,",
                  static_cast<long long>(raw_ids[row.user]), row.group,
                  row.utility.recall, row.utility.precision, row.utility.f1,
                  row.utility.hit, row.utility.ndcg);
    out << buf;
    if (std::isnan(row.delta_user)) {
      out << "\n";
    } else {
      std::snprintf(buf, sizeof(buf), "%.10g\n", row.delta_user);
      out << buf;
    }
  }
}

}  // namespace fairrec
