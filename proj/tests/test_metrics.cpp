#include "fairrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "support/oracles.hpp"

using namespace fairrec;

namespace {

ModelParams model_with_scores(std::uint32_t user, const std::vector<double>& scores) {
  // Row `user` is (1); every other row v holds scores[v] directly.
  ModelParams params;
  params.n_users = scores.size();
  params.dim = 1;
  params.values = scores;
  params.values[user] = 1.0;
  return params;
}

RecList list_of(std::vector<std::uint32_t> items) {
  RecList rec;
  rec.items = std::move(items);
  rec.scores.assign(rec.items.size(), 0.0);
  return rec;
}

}  // namespace

TEST_CASE("topk returns the highest scoring candidates") {
  auto params = model_with_scores(0, {0.0, 0.9, 0.8, 0.7, 0.1});
  auto rec = topk(params, 0, 2, {});
  CHECK(rec.items == std::vector<std::uint32_t>{1, 2});
  CHECK(rec.scores[0] == doctest::Approx(0.9));
}

TEST_CASE("topk breaks score ties by ascending id") {
  auto params = model_with_scores(0, {0.0, 0.5, 0.9, 0.9, 0.5});
  auto rec = topk(params, 0, 3, {});
  CHECK(rec.items == std::vector<std::uint32_t>{2, 3, 1});
}

TEST_CASE("topk excludes self and training positives") {
  auto params = model_with_scores(0, {0.0, 0.9, 0.8, 0.7, 0.6});
  auto rec = topk(params, 0, 2, {1});
  CHECK(rec.items == std::vector<std::uint32_t>{2, 3});
}

TEST_CASE("topk warns and shortens when the pool is exhausted") {
  auto params = model_with_scores(0, {0.0, 0.9, 0.8});
  int warnings = 0;
  set_warning_handler([&](const std::string&) { ++warnings; });
  auto rec = topk(params, 0, 5, {1, 2});
  set_warning_handler(nullptr);
  CHECK(warnings == 1);
  CHECK(rec.items.empty());
}

TEST_CASE("utility metrics direct formulas") {
  // 2 of 4 test positives inside a top-20 list.
  std::vector<std::uint32_t> items(20);
  for (std::uint32_t i = 0; i < 20; ++i) items[i] = 100 + i;
  items[3] = 1;
  items[8] = 2;
  auto v = utility_metrics(list_of(items), {1, 2, 3, 4}, 20);
  CHECK(v.recall == doctest::Approx(0.5));
  CHECK(v.precision == doctest::Approx(0.1));
  CHECK(v.hit == 1.0);

  auto ideal = utility_metrics(list_of({7, 9}), {7}, 2);
  CHECK(ideal.ndcg == doctest::Approx(1.0));

  auto second = utility_metrics(list_of({9, 7}), {7}, 2);
  CHECK(second.ndcg == doctest::Approx(1.0 / std::log2(3.0)));
  CHECK(second.ndcg == doctest::Approx(0.6309).epsilon(1e-4));

  CHECK_THROWS_AS(utility_metrics(list_of({1}), {}, 1), std::invalid_argument);
}

TEST_CASE("utility metrics match the oracle on every small instance") {
  // Exhaustive: every arrangement of <=6 candidates against every test set of
  // size <=3.
  for (int n = 1; n <= 6; ++n) {
    std::vector<std::uint32_t> universe(n);
    for (int i = 0; i < n; ++i) universe[i] = static_cast<std::uint32_t>(i);

    std::vector<std::vector<std::uint32_t>> test_sets;
    for (int mask = 1; mask < (1 << n); ++mask) {
      if (__builtin_popcount(mask) > 3) continue;
      std::vector<std::uint32_t> t;
      for (int i = 0; i < n; ++i) {
        if (mask & (1 << i)) t.push_back(universe[i]);
      }
      test_sets.push_back(t);
    }

    std::vector<std::uint32_t> arrangement(universe);
    std::sort(arrangement.begin(), arrangement.end());
    do {
      for (int len = 1; len <= n; ++len) {
        std::vector<std::uint32_t> list(arrangement.begin(),
                                        arrangement.begin() + len);
        for (const auto& test : test_sets) {
          for (int k : {len, len + 1}) {
            auto got = utility_metrics(list_of(list), test, k);
            auto want = oracles::utility_metrics(list, test, k);
            CHECK(got.recall == want.recall);
            CHECK(got.precision == want.precision);
            CHECK(got.f1 == want.f1);
            CHECK(got.hit == want.hit);
            CHECK(got.ndcg == want.ndcg);
            CHECK(got.hit == (got.recall > 0.0 ? 1.0 : 0.0));
            for (int m = 0; m < kNumUtilityMetrics; ++m) {
              CHECK(got[m] >= 0.0);
              CHECK(got[m] <= 1.0);
            }
          }
        }
      }
    } while (std::next_permutation(arrangement.begin(), arrangement.end()));
  }
}

TEST_CASE("group_mean averages evaluated users per group") {
  std::vector<int> groups = {0, 0, 1, 2};
  auto means = group_mean({0.2, 0.4, 0.9}, {0, 1, 2}, groups, 3);
  CHECK(means[0] == doctest::Approx(0.3));
  CHECK(means[1] == doctest::Approx(0.9));  // singleton
  CHECK(std::isnan(means[2]));              // no evaluated users
}

TEST_CASE("unfairness of equal group means is zero") {
  CHECK(unfairness({0.2, 0.2, 0.2}) == 0.0);
}

TEST_CASE("unfairness hand case and scale invariance") {
  double delta = unfairness({0.1, 0.2, 0.3});
  CHECK(delta == doctest::Approx(0.6667).epsilon(1e-3));
  CHECK(delta == doctest::Approx((0.1 + 0.2 + 0.1) / 3.0 / 0.2));

  for (double c : {0.5, 2.0, 17.0}) {
    CHECK(unfairness({c * 0.1, c * 0.2, c * 0.3}) == doctest::Approx(delta));
  }
}

TEST_CASE("unfairness for two groups reduces to the normalized gap") {
  double q1 = 0.4, q2 = 0.1;
  CHECK(unfairness({q1, q2}) == doctest::Approx((q1 - q2) / ((q1 + q2) / 2.0)));
}

TEST_CASE("unfairness skips value-less groups and flags a zero mean") {
  double nan = std::numeric_limits<double>::quiet_NaN();
  int warnings = 0;
  set_warning_handler([&](const std::string&) { ++warnings; });
  CHECK(unfairness({0.1, nan, 0.3}) ==
        doctest::Approx(0.2 / 0.2));
  CHECK(std::isnan(unfairness({0.0, 0.0})));
  set_warning_handler(nullptr);
  CHECK(warnings == 2);
  CHECK_THROWS_AS(unfairness({0.5}), std::invalid_argument);
}

TEST_CASE("calibration_user is the absolute female-ratio gap") {
  // Genders: even ids F, odd ids M.
  std::vector<Gender> genders(64);
  for (std::size_t v = 0; v < genders.size(); ++v) {
    genders[v] = v % 2 == 0 ? Gender::F : Gender::M;
  }
  auto females = [&](int n, int start = 0) {
    std::vector<std::uint32_t> out;
    for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint32_t>(start + 2 * i));
    return out;
  };
  auto males = [&](int n, int start = 1) {
    std::vector<std::uint32_t> out;
    for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint32_t>(start + 2 * i));
    return out;
  };

  // T^F = 0.6; 12 females in a 20-item list.
  std::vector<std::uint32_t> history = females(3);
  auto m2 = males(2);
  history.insert(history.end(), m2.begin(), m2.end());
  std::vector<std::uint32_t> list = females(12);
  auto m8 = males(8);
  list.insert(list.end(), m8.begin(), m8.end());
  CHECK(calibration_user(list_of(list), genders, history) == doctest::Approx(0.0));

  // T^F = 1.0 against an all-male list.
  CHECK(calibration_user(list_of(males(20)), genders, females(4)) ==
        doctest::Approx(1.0));

  // T^F = 0.5 against 15/20 females.
  std::vector<std::uint32_t> half = females(2);
  auto m2b = males(2);
  half.insert(half.end(), m2b.begin(), m2b.end());
  std::vector<std::uint32_t> skew = females(15);
  auto m5 = males(5);
  skew.insert(skew.end(), m5.begin(), m5.end());
  CHECK(calibration_user(list_of(skew), genders, half) == doctest::Approx(0.25));

  CHECK_THROWS_AS(calibration_user(list_of({}), genders, females(2)),
                  std::invalid_argument);
}

TEST_CASE("overall mean is the count-weighted mean of the group means") {
  // Three evaluated users in group 0, one in group 1, with distinct hit
  // patterns over two test positives each.
  std::vector<RecList> lists = {list_of({4, 5}), list_of({4, 9}),
                                list_of({8, 9}), list_of({4, 5})};
  for (std::uint32_t u = 0; u < 4; ++u) lists[u].user = u;
  std::vector<std::vector<std::uint32_t>> eval_pos = {
      {4, 5}, {4, 5}, {4, 5}, {4, 5}, {}, {}, {}, {}, {}, {}};
  std::vector<std::vector<std::uint32_t>> train_pos(10);
  std::vector<int> groups = {0, 0, 0, 1, -1, -1, -1, -1, -1, -1};
  std::vector<Gender> genders(10, Gender::F);
  set_warning_handler([](const std::string&) {});  // no calibration history
  auto result = evaluate_lists(lists, eval_pos, train_pos, groups, 2, genders, 2);
  set_warning_handler(nullptr);

  std::int64_t count[2] = {0, 0};
  for (const auto& row : result.per_user) count[row.group] += 1;
  CHECK(count[0] == 3);
  CHECK(count[1] == 1);
  for (int m = 0; m < kNumUtilityMetrics; ++m) {
    double weighted = (count[0] * result.metrics.group_means[0][m] +
                       count[1] * result.metrics.group_means[1][m]) /
                      static_cast<double>(count[0] + count[1]);
    CHECK(result.metrics.overall[m] == doctest::Approx(weighted).epsilon(1e-12));
  }
}

TEST_CASE("evaluation with a single group reports undefined unfairness") {
  // Two users, both in group 0; lists hit one of two test positives.
  std::vector<RecList> lists = {list_of({2, 3}), list_of({3, 2})};
  lists[0].user = 0;
  lists[1].user = 1;
  std::vector<std::vector<std::uint32_t>> eval_pos = {{2}, {3}, {}, {}};
  std::vector<std::vector<std::uint32_t>> train_pos = {{3}, {2}, {}, {}};
  std::vector<int> groups = {0, 0, 0, 0};
  std::vector<Gender> genders = {Gender::F, Gender::M, Gender::F, Gender::M};
  int warnings = 0;
  set_warning_handler([&](const std::string&) { ++warnings; });
  auto result = evaluate_lists(lists, eval_pos, train_pos, groups, 1, genders, 2);
  set_warning_handler(nullptr);
  CHECK(result.metrics.evaluated_users == 2);
  CHECK(std::isnan(result.metrics.delta[0]));
  CHECK(std::isnan(result.metrics.avg_fairness));
  CHECK(warnings > 0);
  CHECK(result.metrics.overall.recall == 1.0);
}

TEST_CASE("calibration_group aggregates per group") {
  std::vector<int> groups = {0, 0, 1};
  auto mean = calibration_group({0.2, 0.4, 0.5}, {0, 1, 2}, groups, 2);
  CHECK(mean[0] == doctest::Approx(0.3));
  CHECK(mean[1] == doctest::Approx(0.5));  // single-user group

  auto zero = calibration_group({0.0, 0.0}, {0, 1}, groups, 2);
  CHECK(zero[0] == 0.0);

  auto sum = calibration_group({0.2, 0.4, 0.5}, {0, 1, 2}, groups, 2, true);
  CHECK(sum[0] == doctest::Approx(0.6));
}
