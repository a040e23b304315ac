#include "fairrec/rerank.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "parallel_for.hpp"

namespace fairrec {

namespace {

// Shared candidate order: raw score descending, then ascending id.
std::vector<int> sorted_order(const CandidateSet& set) {
  std::vector<int> order(set.candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const Candidate& ca = set.candidates[a];
    const Candidate& cb = set.candidates[b];
    return ca.raw_score != cb.raw_score ? ca.raw_score > cb.raw_score
                                        : ca.id < cb.id;
  });
  return order;
}

// True when `a` wins the greedy tie-break against `b`.
bool beats(double obj_a, const Candidate& a, double obj_b, const Candidate& b) {
  if (obj_a != obj_b) return obj_a > obj_b;
  if (a.raw_score != b.raw_score) return a.raw_score > b.raw_score;
  return a.id < b.id;
}

RecList finish_list(const CandidateSet& set, const std::vector<int>& picked) {
  RecList rec;
  rec.user = set.user;
  rec.items.reserve(picked.size());
  rec.scores.reserve(picked.size());
  for (int idx : picked) {
    rec.items.push_back(set.candidates[idx].id);
    rec.scores.push_back(set.candidates[idx].raw_score);
  }
  return rec;
}

int effective_k(const CandidateSet& set, int k) {
  auto n = static_cast<int>(set.candidates.size());
  if (n < k) {
    warn("re-rank: user " + std::to_string(set.user) + " has only " +
         std::to_string(n) + " candidates for k=" + std::to_string(k));
    return n;
  }
  return k;
}

}  // namespace

void rescale_relevance(CandidateSet& set) {
  if (set.candidates.empty()) {
    throw std::invalid_argument("rescale_relevance: empty candidate set");
  }
  double lo = set.candidates.front().raw_score;
  double hi = lo;
  for (const Candidate& c : set.candidates) {
    lo = std::min(lo, c.raw_score);
    hi = std::max(hi, c.raw_score);
  }
  if (hi == lo) {
    for (Candidate& c : set.candidates) c.score = 1.0;
    return;
  }
  for (Candidate& c : set.candidates) {
    c.score = (c.raw_score - lo) / (hi - lo);
  }
}

double selection_objective(double score_sum, int n_female, int size,
                           double lambda, double train_female_ratio) {
  double female_fraction =
      size > 0 ? static_cast<double>(n_female) / static_cast<double>(size) : 0.0;
  return (1.0 - lambda) * score_sum -
         lambda * std::abs(train_female_ratio - female_fraction);
}

double objective(const CandidateSet& set, const std::vector<int>& picked,
                 double lambda, double train_female_ratio) {
  double sum = 0.0;
  int n_female = 0;
  for (int idx : picked) {
    const Candidate& c = set.candidates[idx];
    sum += c.score;
    if (c.gender == Gender::F) ++n_female;
  }
  return selection_objective(sum, n_female, static_cast<int>(picked.size()),
                             lambda, train_female_ratio);
}

double objective(const CandidateSet& set, const RecList& list, double lambda,
                 double train_female_ratio) {
  double sum = 0.0;
  int n_female = 0;
  for (std::uint32_t id : list.items) {
    auto it = std::find_if(set.candidates.begin(), set.candidates.end(),
                           [&](const Candidate& c) { return c.id == id; });
    if (it == set.candidates.end()) {
      throw std::invalid_argument("objective: list item not in candidate set");
    }
    sum += it->score;
    if (it->gender == Gender::F) ++n_female;
  }
  return selection_objective(sum, n_female, static_cast<int>(list.items.size()),
                             lambda, train_female_ratio);
}

RecList greedy_rerank(const CandidateSet& set, const RerankConfig& config,
                      double train_female_ratio) {
  const int k = effective_k(set, config.k);
  std::vector<int> order = sorted_order(set);
  std::vector<int> queue[2];  // per-gender candidate indices, best first
  for (int idx : order) {
    queue[set.candidates[idx].gender == Gender::F ? 0 : 1].push_back(idx);
  }
  std::size_t head[2] = {0, 0};

  std::vector<int> picked;
  picked.reserve(k);
  double sum = 0.0;
  int n_female = 0;
  for (int step = 0; step < k; ++step) {
    int chosen = -1;
    double chosen_obj = 0.0;
    for (int g = 0; g < 2; ++g) {
      if (head[g] >= queue[g].size()) continue;
      int idx = queue[g][head[g]];
      const Candidate& c = set.candidates[idx];
      double obj =
          selection_objective(sum + c.score, n_female + (g == 0 ? 1 : 0),
                              static_cast<int>(picked.size()) + 1,
                              config.lambda, train_female_ratio);
      if (chosen < 0 ||
          beats(obj, c, chosen_obj, set.candidates[chosen])) {
        chosen = idx;
        chosen_obj = obj;
      }
    }
    const Candidate& c = set.candidates[chosen];
    head[c.gender == Gender::F ? 0 : 1] += 1;
    sum += c.score;
    if (c.gender == Gender::F) ++n_female;
    picked.push_back(chosen);
  }
  return finish_list(set, picked);
}

RecList greedy_rerank_naive(const CandidateSet& set, const RerankConfig& config,
                            double train_female_ratio) {
  const int k = effective_k(set, config.k);
  std::vector<int> order = sorted_order(set);
  std::vector<char> used(set.candidates.size(), 0);

  std::vector<int> picked;
  picked.reserve(k);
  double sum = 0.0;
  int n_female = 0;
  for (int step = 0; step < k; ++step) {
    int chosen = -1;
    double chosen_obj = 0.0;
    for (int idx : order) {
      if (used[idx]) continue;
      const Candidate& c = set.candidates[idx];
      double obj = selection_objective(
          sum + c.score, n_female + (c.gender == Gender::F ? 1 : 0),
          static_cast<int>(picked.size()) + 1, config.lambda,
          train_female_ratio);
      if (chosen < 0 ||
          beats(obj, c, chosen_obj, set.candidates[chosen])) {
        chosen = idx;
        chosen_obj = obj;
      }
    }
    const Candidate& c = set.candidates[chosen];
    used[chosen] = 1;
    sum += c.score;
    if (c.gender == Gender::F) ++n_female;
    picked.push_back(chosen);
  }
  return finish_list(set, picked);
}

BruteForceResult brute_force_rerank(const CandidateSet& set,
                                    const RerankConfig& config,
                                    double train_female_ratio) {
  const int n = static_cast<int>(set.candidates.size());
  const int k = std::min(config.k, n);
  if (k < config.k) {
    warn("brute-force re-rank: pool smaller than k");
  }
  double combos = 1.0;
  for (int i = 0; i < k; ++i) {
    combos = combos * (n - i) / (i + 1);
    if (combos > 1e6) {
      throw std::invalid_argument("brute_force_rerank: more than 10^6 subsets");
    }
  }
  std::vector<int> order = sorted_order(set);

  // Enumerate k-subsets of positions in `order`; selections stay sorted by
  // raw score because positions are ascending.
  std::vector<int> positions(k);
  std::iota(positions.begin(), positions.end(), 0);
  BruteForceResult best;
  bool first = true;
  while (true) {
    double sum = 0.0;
    int n_female = 0;
    for (int pos : positions) {
      const Candidate& c = set.candidates[order[pos]];
      sum += c.score;
      if (c.gender == Gender::F) ++n_female;
    }
    double obj =
        selection_objective(sum, n_female, k, config.lambda, train_female_ratio);
    if (first || obj > best.objective) {
      first = false;
      best.objective = obj;
      best.items.clear();
      for (int pos : positions) {
        best.items.push_back(set.candidates[order[pos]].id);
      }
    }
    // next combination
    int slot = k - 1;
    while (slot >= 0 && positions[slot] == n - k + slot) --slot;
    if (slot < 0) break;
    positions[slot] += 1;
    for (int s = slot + 1; s < k; ++s) {
      positions[s] = positions[s - 1] + 1;
    }
  }
  return best;
}

std::vector<CandidateSet> build_candidate_sets(
    const ModelParams& params,
    const std::vector<std::vector<std::uint32_t>>& train_positives,
    const std::vector<Gender>& genders, int k_prime) {
  std::vector<CandidateSet> sets(params.n_users);
  detail::parallel_for(params.n_users, [&](std::size_t u) {
    RecList base =
        topk(params, static_cast<std::uint32_t>(u), k_prime, train_positives[u]);
    CandidateSet& set = sets[u];
    set.user = static_cast<std::uint32_t>(u);
    set.candidates.reserve(base.items.size());
    for (std::size_t i = 0; i < base.items.size(); ++i) {
      Candidate c;
      c.id = base.items[i];
      c.gender = genders[base.items[i]];
      c.raw_score = base.scores[i];
      c.score = base.scores[i];
      set.candidates.push_back(c);
    }
    if (!set.candidates.empty()) {
      rescale_relevance(set);
    }
  });
  return sets;
}

void write_reclists_csv(const std::string& path,
                        const std::vector<RecList>& lists,
                        const std::vector<UserId>& raw_ids) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out << "user_id,rank,candidate_id,raw_score\n";
  char buf[96];
  for (const RecList& rec : lists) {
    for (std::size_t i = 0; i < rec.items.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%lld,%zu,%lld,%.10g\n",
                    static_cast<long long>(raw_ids[rec.user]), i + 1,
                    static_cast<long long>(raw_ids[rec.items[i]]),
                    rec.scores[i]);
      out << buf;
    }
  }
}

}  // namespace fairrec
