#pragma once

#include <cstdint>
#include <vector>

#include "fairrec/metrics.hpp"
#include "fairrec/model.hpp"
#include "fairrec/types.hpp"

namespace fairrec {

struct Candidate {
  std::uint32_t id = 0;
  Gender gender = Gender::F;
  double raw_score = 0.0;  // model relevance, untouched by rescaling
  double score = 0.0;      // relevance used by the objective
};

// Top-K' candidates for one user, sorted by raw score descending (ties by
// ascending id).
struct CandidateSet {
  std::uint32_t user = 0;
  std::vector<Candidate> candidates;
};

struct RerankConfig {
  double lambda = 0.0;  // trade-off in [0, 1]
  int k = 20;           // output length
  int k_prime = 100;    // candidate pool size
};

// Min-max normalization of candidate scores to [0, 1]; a constant set maps
// to all ones.
void rescale_relevance(CandidateSet& set);

// (1 - lambda) * score_sum - lambda * |tf - n_female/size|. The empty set has
// score_sum 0 and female fraction 0.
double selection_objective(double score_sum, int n_female, int size,
                           double lambda, double train_female_ratio);

// Objective of an explicit selection (indices into set.candidates).
double objective(const CandidateSet& set, const std::vector<int>& picked,
                 double lambda, double train_female_ratio);

// Objective of a re-ranked list, matched back to the candidate set by id.
double objective(const CandidateSet& set, const RecList& list, double lambda,
                 double train_female_ratio);

// Greedy list construction: each step appends the candidate maximizing the
// objective of the extended list, with ties broken by higher raw score then
// ascending id. Output order is insertion order. Expects scores already
// rescaled when lambda > 0. Returns all candidates (with a warning) when the
// pool is smaller than K.
//
// The default implementation exploits that, within one gender, the objective
// is monotone in the candidate score: each step only compares the best
// remaining candidate of each gender. `greedy_rerank_naive` is the reference
// argmax over every remaining candidate; both produce identical lists.
RecList greedy_rerank(const CandidateSet& set, const RerankConfig& config,
                      double train_female_ratio);
RecList greedy_rerank_naive(const CandidateSet& set, const RerankConfig& config,
                            double train_female_ratio);

struct BruteForceResult {
  std::vector<std::uint32_t> items;  // ordered by raw score desc
  double objective = 0.0;
};

// Exhaustive maximum over all K-subsets. Refuses instances with more than
// 10^6 subsets.
BruteForceResult brute_force_rerank(const CandidateSet& set,
                                    const RerankConfig& config,
                                    double train_female_ratio);

// Top-K' model candidates (excluding self and train positives) for every
// user, with rescaled relevance.
std::vector<CandidateSet> build_candidate_sets(
    const ModelParams& params,
    const std::vector<std::vector<std::uint32_t>>& train_positives,
    const std::vector<Gender>& genders, int k_prime);

// CSV: user_id,rank,candidate_id,raw_score (raw user ids).
void write_reclists_csv(const std::string& path,
                        const std::vector<RecList>& lists,
                        const std::vector<UserId>& raw_ids);

}  // namespace fairrec
