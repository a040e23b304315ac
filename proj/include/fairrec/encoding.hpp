#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "fairrec/grouping.hpp"
#include "fairrec/types.hpp"

namespace fairrec {

// Dense 0..n-1 index space over the users of a preprocessed edge set.
// Indices are assigned in ascending raw-id order, so the encoding is a pure
// function of the user set.
struct UserEncoder {
  std::vector<UserId> raw_ids;                       // index -> raw id
  std::unordered_map<UserId, std::uint32_t> index;   // raw id -> index
  std::vector<Gender> genders;                       // by index

  std::size_t size() const { return raw_ids.size(); }

  std::uint32_t at(UserId raw) const {
    auto it = index.find(raw);
    if (it == index.end()) {
      throw std::out_of_range("user " + std::to_string(raw) + " not encoded");
    }
    return it->second;
  }
};

UserEncoder encode_users(const std::vector<Interaction>& interactions,
                         const GenderTable& genders);

// Dense edge list plus sorted per-user positive lists (for membership tests).
struct EdgeSet {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::vector<std::vector<std::uint32_t>> positives;  // by rater, sorted

  static EdgeSet build(const std::vector<Interaction>& interactions,
                       const UserEncoder& encoder);
};

// Partition assignment compiled to dense indices; -1 marks users without a
// group (no training history).
std::vector<int> compile_groups(const GroupPartition& partition,
                                const UserEncoder& encoder);

}  // namespace fairrec
