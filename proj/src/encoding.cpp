#include "fairrec/encoding.hpp"

#include <algorithm>
#include <set>

namespace fairrec {

UserEncoder encode_users(const std::vector<Interaction>& interactions,
                         const GenderTable& genders) {
  std::set<UserId> users;
  for (const Interaction& e : interactions) {
    users.insert(e.rater);
    users.insert(e.ratee);
  }
  UserEncoder encoder;
  encoder.raw_ids.assign(users.begin(), users.end());
  encoder.index.reserve(encoder.raw_ids.size());
  encoder.genders.reserve(encoder.raw_ids.size());
  for (std::size_t i = 0; i < encoder.raw_ids.size(); ++i) {
    encoder.index.emplace(encoder.raw_ids[i], static_cast<std::uint32_t>(i));
    encoder.genders.push_back(genders.at(encoder.raw_ids[i]));
  }
  return encoder;
}

EdgeSet EdgeSet::build(const std::vector<Interaction>& interactions,
                       const UserEncoder& encoder) {
  EdgeSet set;
  set.edges.reserve(interactions.size());
  set.positives.assign(encoder.size(), {});
  for (const Interaction& e : interactions) {
    std::uint32_t u = encoder.at(e.rater);
    std::uint32_t v = encoder.at(e.ratee);
    set.edges.emplace_back(u, v);
    set.positives[u].push_back(v);
  }
  for (auto& pos : set.positives) {
    std::sort(pos.begin(), pos.end());
  }
  return set;
}

std::vector<int> compile_groups(const GroupPartition& partition,
                                const UserEncoder& encoder) {
  std::vector<int> groups(encoder.size(), -1);
  for (std::size_t i = 0; i < encoder.size(); ++i) {
    groups[i] = partition.group_of(encoder.raw_ids[i]);
  }
  return groups;
}

}  // namespace fairrec
