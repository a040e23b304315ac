#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "fairrec/types.hpp"

namespace fairrec {

// Per-user opposite-gender interaction counts. ogir = n_opposite / n_total.
struct OgirEntry {
  double ogir = 0.0;
  std::int64_t n_total = 0;
  std::int64_t n_opposite = 0;
};

// Ordered by user id so exports and group sizes are deterministic.
using OgirTable = std::map<UserId, OgirEntry>;

// One entry per distinct rater in `interactions`. Users that never rate are
// absent. Every rater and ratee must carry a gender label.
OgirTable compute_ogir(const std::vector<Interaction>& interactions,
                       const GenderTable& genders);

// Users binned over [0, 1] by their opposite-gender ratio. Bin i covers
// [boundaries[i], boundaries[i+1]); the last bin is closed at 1.
struct GroupPartition {
  std::vector<double> boundaries;  // strictly increasing, first 0, last 1
  std::unordered_map<UserId, int> assignment;  // user -> 0-based group index
  std::vector<std::int64_t> sizes;

  int n_groups() const { return static_cast<int>(sizes.size()); }

  // -1 when the user has no ratio (no rating history).
  int group_of(UserId u) const {
    auto it = assignment.find(u);
    return it == assignment.end() ? -1 : it->second;
  }
};

// Index of the half-open bin containing x; the last bin is closed at 1.
int bin_of(double x, const std::vector<double>& boundaries);

GroupPartition partition_equal_width(const OgirTable& table, int n_groups = 3);

// Bins formed from {0} + thresholds + {1}. Thresholds must be strictly
// increasing within (0, 1); an empty list yields a single group.
GroupPartition partition_fixed_thresholds(const OgirTable& table,
                                          const std::vector<double>& thresholds);

// weight_G = N_G^(-p). Empty groups are excluded with a warning.
std::map<int, double> group_weights(const GroupPartition& partition, double p);

std::string partition_to_json(const GroupPartition& partition);
GroupPartition partition_from_json(const std::string& text);

}  // namespace fairrec
