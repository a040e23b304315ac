#include "fairrec/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fairrec {

OgirTable compute_ogir(const std::vector<Interaction>& interactions,
                       const GenderTable& genders) {
  OgirTable table;
  for (const Interaction& e : interactions) {
    Gender rater_gender = genders.at(e.rater);  // throws when a label is missing
    Gender ratee_gender = genders.at(e.ratee);
    OgirEntry& entry = table[e.rater];
    entry.n_total += 1;
    if (rater_gender != ratee_gender) entry.n_opposite += 1;
  }
  for (auto& [user, entry] : table) {
    entry.ogir = static_cast<double>(entry.n_opposite) /
                 static_cast<double>(entry.n_total);
  }
  return table;
}

int bin_of(double x, const std::vector<double>& boundaries) {
  auto it = std::upper_bound(boundaries.begin(), boundaries.end(), x);
  auto idx = static_cast<int>(it - boundaries.begin()) - 1;
  int n = static_cast<int>(boundaries.size()) - 2;
  return std::clamp(idx, 0, n);
}

namespace {

GroupPartition partition_with_boundaries(const OgirTable& table,
                                         std::vector<double> boundaries) {
  GroupPartition partition;
  partition.boundaries = std::move(boundaries);
  partition.sizes.assign(partition.boundaries.size() - 1, 0);
  for (const auto& [user, entry] : table) {
    int g = bin_of(entry.ogir, partition.boundaries);
    partition.assignment.emplace(user, g);
    partition.sizes[g] += 1;
  }
  return partition;
}

}  // namespace

GroupPartition partition_equal_width(const OgirTable& table, int n_groups) {
  if (n_groups < 2) {
    throw std::invalid_argument("partition_equal_width: n_groups must be >= 2");
  }
  std::vector<double> boundaries(n_groups + 1);
  for (int i = 0; i <= n_groups; ++i) {
    boundaries[i] = static_cast<double>(i) / n_groups;
  }
  return partition_with_boundaries(table, std::move(boundaries));
}

GroupPartition partition_fixed_thresholds(const OgirTable& table,
                                          const std::vector<double>& thresholds) {
  double prev = 0.0;
  for (double t : thresholds) {
    if (t <= prev || t >= 1.0) {
      throw std::invalid_argument(
          "partition_fixed_thresholds: thresholds must be strictly increasing "
          "within (0, 1)");
    }
    prev = t;
  }
  std::vector<double> boundaries;
  boundaries.reserve(thresholds.size() + 2);
  boundaries.push_back(0.0);
  boundaries.insert(boundaries.end(), thresholds.begin(), thresholds.end());
  boundaries.push_back(1.0);
  return partition_with_boundaries(table, std::move(boundaries));
}

std::map<int, double> group_weights(const GroupPartition& partition, double p) {
  if (p < 0.0) {
    throw std::invalid_argument("group_weights: p must be >= 0");
  }
  std::map<int, double> weights;
  for (int g = 0; g < partition.n_groups(); ++g) {
    if (partition.sizes[g] < 1) {
      warn("group " + std::to_string(g) + " is empty; no weight assigned");
      continue;
    }
    weights[g] = std::pow(static_cast<double>(partition.sizes[g]), -p);
  }
  return weights;
}

std::string partition_to_json(const GroupPartition& partition) {
  nlohmann::ordered_json j;
  j["boundaries"] = partition.boundaries;
  j["sizes"] = partition.sizes;
  nlohmann::ordered_json assignment = nlohmann::ordered_json::object();
  std::vector<UserId> users;
  users.reserve(partition.assignment.size());
  for (const auto& [user, group] : partition.assignment) users.push_back(user);
  std::sort(users.begin(), users.end());
  for (UserId u : users) {
    assignment[std::to_string(u)] = partition.assignment.at(u);
  }
  j["assignment"] = std::move(assignment);
  return j.dump(2);
}

GroupPartition partition_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  GroupPartition partition;
  partition.boundaries = j.at("boundaries").get<std::vector<double>>();
  partition.sizes = j.at("sizes").get<std::vector<std::int64_t>>();
  for (const auto& [key, value] : j.at("assignment").items()) {
    partition.assignment.emplace(std::stoll(key), value.get<int>());
  }
  return partition;
}

}  // namespace fairrec
