#include "fairrec/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <random>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "fairrec/grouping.hpp"

namespace fairrec {

namespace {

using json = nlohmann::ordered_json;

std::int64_t parse_int_field(std::string_view field, const std::string& path,
                             std::size_t line_no) {
  std::int64_t value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) +
                             ": malformed integer field '" + std::string(field) + "'");
  }
  return value;
}

// Splits a csv line into exactly `n` fields, trimming surrounding whitespace.
std::vector<std::string_view> split_fields(std::string_view line, std::size_t n,
                                           const std::string& path,
                                           std::size_t line_no) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    std::string_view field = comma == std::string_view::npos
                                 ? line.substr(start)
                                 : line.substr(start, comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
      field.remove_prefix(1);
    }
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' ||
                              field.back() == '\r')) {
      field.remove_suffix(1);
    }
    fields.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (fields.size() != n) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) +
                             ": expected " + std::to_string(n) + " fields, got " +
                             std::to_string(fields.size()));
  }
  return fields;
}

}  // namespace

namespace {

std::vector<Interaction> parse_interactions(const std::string& path,
                                            bool allow_empty);

}  // namespace

std::vector<Interaction> load_interactions(const std::string& path) {
  return parse_interactions(path, /*allow_empty=*/false);
}

namespace {

std::vector<Interaction> parse_interactions(const std::string& path,
                                            bool allow_empty) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open ratings file: " + path);
  }

  // Keyed by (rater, ratee) so duplicates collapse to the max rating.
  struct PairHash {
    std::size_t operator()(const std::pair<UserId, UserId>& p) const {
      return std::hash<UserId>()(p.first) * 1000003u ^ std::hash<UserId>()(p.second);
    }
  };
  std::unordered_map<std::pair<UserId, UserId>, std::size_t, PairHash> seen;

  std::vector<Interaction> out;
  std::string line;
  std::size_t line_no = 0;
  std::size_t self_edges = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_fields(line, 3, path, line_no);
    Interaction edge;
    edge.rater = parse_int_field(fields[0], path, line_no);
    edge.ratee = parse_int_field(fields[1], path, line_no);
    edge.rating = static_cast<int>(parse_int_field(fields[2], path, line_no));
    if (edge.rating < kRatingScaleMin || edge.rating > kRatingScaleMax) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": rating " + std::to_string(edge.rating) +
                               " outside scale [" + std::to_string(kRatingScaleMin) +
                               ", " + std::to_string(kRatingScaleMax) + "]");
    }
    if (edge.rater == edge.ratee) {
      ++self_edges;
      continue;
    }
    auto key = std::make_pair(edge.rater, edge.ratee);
    auto it = seen.find(key);
    if (it == seen.end()) {
      seen.emplace(key, out.size());
      out.push_back(edge);
    } else if (edge.rating > out[it->second].rating) {
      out[it->second].rating = edge.rating;
    }
  }
  if (self_edges > 0) {
    warn("dropped " + std::to_string(self_edges) + " self-rating(s) in " + path);
  }
  if (out.empty() && !allow_empty) {
    throw std::runtime_error("empty dataset: no interactions in " + path);
  }
  return out;
}

}  // namespace

GenderTable load_genders(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open gender file: " + path);
  }
  GenderTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_fields(line, 2, path, line_no);
    UserId user = parse_int_field(fields[0], path, line_no);
    if (fields[1].size() != 1 ||
        (fields[1][0] != 'F' && fields[1][0] != 'M' && fields[1][0] != 'U')) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": gender must be F, M or U");
    }
    if (fields[1][0] == 'U') continue;
    Gender g = fields[1][0] == 'F' ? Gender::F : Gender::M;
    if (table.contains(user) && table.at(user) != g) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": conflicting gender for user " + std::to_string(user));
    }
    table.set(user, g);
  }
  return table;
}

std::vector<Interaction> drop_ungendered(std::vector<Interaction> interactions,
                                         const GenderTable& genders) {
  std::erase_if(interactions, [&](const Interaction& e) {
    return !genders.contains(e.rater) || !genders.contains(e.ratee);
  });
  return interactions;
}

std::vector<Interaction> filter_low_ratings(std::vector<Interaction> interactions,
                                            int threshold) {
  if (threshold < kRatingScaleMin || threshold > kRatingScaleMax) {
    throw std::invalid_argument("filter_low_ratings: threshold outside the scale");
  }
  std::erase_if(interactions,
                [&](const Interaction& e) { return e.rating < threshold; });
  return interactions;
}

std::vector<Interaction> kcore(std::vector<Interaction> interactions, int k) {
  if (k < 1) {
    throw std::invalid_argument("kcore: k must be >= 1");
  }
  // Peel users with combined degree < k until a fixed point. Each directed
  // edge contributes one to both endpoints.
  std::unordered_map<UserId, std::vector<std::size_t>> incident;
  for (std::size_t i = 0; i < interactions.size(); ++i) {
    incident[interactions[i].rater].push_back(i);
    incident[interactions[i].ratee].push_back(i);
  }
  std::unordered_map<UserId, std::int64_t> degree;
  degree.reserve(incident.size());
  for (const auto& [user, edges] : incident) {
    degree[user] = static_cast<std::int64_t>(edges.size());
  }

  std::vector<char> alive(interactions.size(), 1);
  std::unordered_set<UserId> removed;
  std::queue<UserId> pending;
  for (const auto& [user, deg] : degree) {
    if (deg < k) pending.push(user);
  }
  while (!pending.empty()) {
    UserId u = pending.front();
    pending.pop();
    if (removed.count(u)) continue;
    removed.insert(u);
    for (std::size_t idx : incident[u]) {
      if (!alive[idx]) continue;
      alive[idx] = 0;
      const Interaction& e = interactions[idx];
      UserId other = e.rater == u ? e.ratee : e.rater;
      if (other == u) continue;
      if (--degree[other] < k && !removed.count(other)) {
        pending.push(other);
      }
    }
  }

  std::vector<Interaction> out;
  out.reserve(interactions.size());
  for (std::size_t i = 0; i < interactions.size(); ++i) {
    if (alive[i]) out.push_back(interactions[i]);
  }
  if (out.empty() && !interactions.empty()) {
    warn("kcore with k=" + std::to_string(k) + " removed every edge");
  }
  return out;
}

SplitDataset stratified_split(const std::vector<Interaction>& interactions,
                              const GenderTable& genders, SplitRatios ratios,
                              std::uint64_t seed) {
  double sum = ratios.train + ratios.validation + ratios.test;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("split ratios must sum to 1");
  }
  std::vector<Interaction> by_gender[2];
  for (const Interaction& e : interactions) {
    if (!genders.contains(e.rater)) {
      throw std::runtime_error("stratified_split: rater " +
                               std::to_string(e.rater) + " has no gender label");
    }
    by_gender[genders.at(e.rater) == Gender::F ? 0 : 1].push_back(e);
  }

  SplitDataset split;
  split.seed = seed;
  std::mt19937_64 rng(seed);
  for (auto& edges : by_gender) {
    std::shuffle(edges.begin(), edges.end(), rng);
    auto n = static_cast<std::int64_t>(edges.size());
    std::int64_t n_train = std::llround(ratios.train * static_cast<double>(n));
    std::int64_t n_train_val =
        std::llround((ratios.train + ratios.validation) * static_cast<double>(n));
    n_train = std::clamp<std::int64_t>(n_train, 0, n);
    n_train_val = std::clamp<std::int64_t>(n_train_val, n_train, n);
    split.train.insert(split.train.end(), edges.begin(), edges.begin() + n_train);
    split.validation.insert(split.validation.end(), edges.begin() + n_train,
                            edges.begin() + n_train_val);
    split.test.insert(split.test.end(), edges.begin() + n_train_val, edges.end());
  }
  return split;
}

DatasetStats dataset_stats(const std::vector<Interaction>& interactions,
                           const GenderTable& genders, int n_bins) {
  if (interactions.empty()) {
    throw std::runtime_error("empty dataset: no interactions to summarize");
  }
  if (n_bins < 1) {
    throw std::invalid_argument("dataset_stats: n_bins must be >= 1");
  }

  DatasetStats stats;
  stats.n_bins = n_bins;
  stats.ogir_hist_female.assign(n_bins, 0);
  stats.ogir_hist_male.assign(n_bins, 0);
  stats.bin_user_count.assign(n_bins, 0);
  stats.bin_mean_degree.assign(n_bins, 0.0);

  std::unordered_map<UserId, std::int64_t> degree;
  std::unordered_set<UserId> users;
  std::int64_t rating_sum[2][2] = {{0, 0}, {0, 0}};
  std::int64_t rating_count[2][2] = {{0, 0}, {0, 0}};
  for (const Interaction& e : interactions) {
    int a = genders.at(e.rater) == Gender::F ? 0 : 1;
    int b = genders.at(e.ratee) == Gender::F ? 0 : 1;
    rating_sum[a][b] += e.rating;
    rating_count[a][b] += 1;
    ++degree[e.rater];
    ++degree[e.ratee];
    users.insert(e.rater);
    users.insert(e.ratee);
  }
  for (UserId u : users) {
    (genders.at(u) == Gender::F ? stats.female_users : stats.male_users) += 1;
  }
  auto fill = [&](InteractionTypeStats& t, int a, int b) {
    t.count = rating_count[a][b];
    t.mean_rating = t.count == 0 ? 0.0
                                 : static_cast<double>(rating_sum[a][b]) /
                                       static_cast<double>(t.count);
  };
  fill(stats.ff, 0, 0);
  fill(stats.fm, 0, 1);
  fill(stats.mf, 1, 0);
  fill(stats.mm, 1, 1);

  std::vector<double> boundaries(n_bins + 1);
  for (int i = 0; i <= n_bins; ++i) {
    boundaries[i] = static_cast<double>(i) / n_bins;
  }
  OgirTable ogir = compute_ogir(interactions, genders);
  std::vector<std::int64_t> bin_degree_sum(n_bins, 0);
  for (const auto& [user, entry] : ogir) {
    int bin = bin_of(entry.ogir, boundaries);
    (genders.at(user) == Gender::F ? stats.ogir_hist_female
                                   : stats.ogir_hist_male)[bin] += 1;
    stats.bin_user_count[bin] += 1;
    bin_degree_sum[bin] += degree[user];
  }
  for (int i = 0; i < n_bins; ++i) {
    stats.bin_mean_degree[i] =
        stats.bin_user_count[i] == 0
            ? 0.0
            : static_cast<double>(bin_degree_sum[i]) /
                  static_cast<double>(stats.bin_user_count[i]);
  }
  return stats;
}

std::string stats_to_json(const DatasetStats& stats) {
  auto type_json = [](const InteractionTypeStats& t) {
    return json{{"count", t.count}, {"mean_rating", t.mean_rating}};
  };
  json j;
  j["users"] = {{"female", stats.female_users}, {"male", stats.male_users}};
  j["interaction_types"] = {{"FF", type_json(stats.ff)},
                            {"FM", type_json(stats.fm)},
                            {"MF", type_json(stats.mf)},
                            {"MM", type_json(stats.mm)}};
  j["ogir"] = {{"n_bins", stats.n_bins},
               {"hist_female", stats.ogir_hist_female},
               {"hist_male", stats.ogir_hist_male},
               {"bin_user_count", stats.bin_user_count},
               {"bin_mean_degree", stats.bin_mean_degree}};
  return j.dump(2);
}

void write_interactions_csv(const std::string& path,
                            const std::vector<Interaction>& interactions) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  for (const Interaction& e : interactions) {
    out << e.rater << ',' << e.ratee << ',' << e.rating << '\n';
  }
}

// Artifact reader: a split file may legitimately be empty.
std::vector<Interaction> read_interactions_csv(const std::string& path) {
  return parse_interactions(path, /*allow_empty=*/true);
}

}  // namespace fairrec
