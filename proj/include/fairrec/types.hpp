#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace fairrec {

using UserId = std::int64_t;

enum class Gender : std::uint8_t { F, M };

inline char gender_char(Gender g) { return g == Gender::F ? 'F' : 'M'; }

inline Gender opposite(Gender g) { return g == Gender::F ? Gender::M : Gender::F; }

// One observed rating event. Invariant: rater != ratee, rating within the
// platform scale; duplicate (rater, ratee) pairs collapse to the maximum
// rating at load time.
struct Interaction {
  UserId rater = 0;
  UserId ratee = 0;
  int rating = 0;

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

// user -> binary gender label. Users without a label never enter the table.
class GenderTable {
 public:
  void set(UserId u, Gender g) { table_[u] = g; }

  bool contains(UserId u) const { return table_.find(u) != table_.end(); }

  Gender at(UserId u) const {
    auto it = table_.find(u);
    if (it == table_.end()) {
      throw std::out_of_range("no gender label for user " + std::to_string(u));
    }
    return it->second;
  }

  std::size_t size() const { return table_.size(); }

  const std::unordered_map<UserId, Gender>& entries() const { return table_; }

 private:
  std::unordered_map<UserId, Gender> table_;
};

// Recoverable conditions (empty k-core result, skipped negative samples,
// short candidate pools, ...) are reported here instead of throwing.
// The default handler writes to stderr; tests may install their own.
void warn(const std::string& message);
void set_warning_handler(std::function<void(const std::string&)> handler);

}  // namespace fairrec
