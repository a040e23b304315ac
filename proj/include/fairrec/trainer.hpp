#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "fairrec/encoding.hpp"
#include "fairrec/model.hpp"

namespace fairrec {

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t dim = 64;
  int epochs = 200;
  bool reweight = false;           // off: uniform weights, groups ignored
  double reweight_exponent = 0.0;  // p in weight_G = N_G^(-p)
  // On: group weights are rescaled so the mean per-user weight is 1, which
  // keeps the learning rate meaningful across p (scaling all weights by c is
  // equivalent to scaling the learning rate by c).
  bool normalize_weights = true;
  int negatives_per_positive = 1;
  std::uint64_t seed = 0;
  bool gender_feature = false;
  double lambda_theta = 1e-4;
  std::size_t batch_size = 2048;
  int eval_every = 1;  // validation metrics every n-th epoch (and the last)
  int eval_k = 20;
};

// (user, positive, negative): (u, i) is a train edge, (u, j) is not.
struct Triplet {
  std::uint32_t user = 0;
  std::uint32_t pos = 0;
  std::uint32_t neg = 0;
};

// One epoch worth of triplets: each train edge once per negative slot, with
// negatives rejection-sampled until (u, j) is unobserved and j != u. A user
// connected to everyone would never terminate, so sampling gives up after
// 1000 attempts and skips the slot with a warning.
std::vector<Triplet> sample_triplets(const EdgeSet& train, std::size_t n_users,
                                     int negatives_per_positive,
                                     std::mt19937_64& rng);

// Weighted batch loss: sum over triplets of
//   w_u * (-log sigmoid(y_ui - y_uj) + lambda * (|u|^2 + |i|^2 + |j|^2)).
// The L2 term covers exactly the rows the triplet touches, so a zero-weight
// triplet contributes nothing at all.
double bpr_batch_loss(const ModelParams& params, std::span<const Triplet> batch,
                      const std::vector<double>& weight_by_user, double lambda_theta);

// Analytic gradient of bpr_batch_loss, accumulated as (row, d/d row) pairs.
std::map<std::uint32_t, std::vector<double>> bpr_batch_gradient(
    const ModelParams& params, std::span<const Triplet> batch,
    const std::vector<double>& weight_by_user, double lambda_theta);

// One SGD step over the batch. Returns the batch loss before the update.
// Throws when the loss goes non-finite (learning rate too high).
double bpr_step(ModelParams& params, std::span<const Triplet> batch,
                const std::vector<double>& weight_by_user, double learning_rate,
                double lambda_theta);

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;  // mean per-triplet weighted loss
  // NaN on epochs without a validation pass.
  double val_avg_utility = 0.0;
  double val_avg_fairness = 0.0;
};

enum class SelectionRule { avg_utility, utility_minus_fairness };

struct TrainResult {
  ModelParams final_params;
  ModelParams best_params;  // snapshot at the selected epoch
  int best_epoch = -1;
  std::vector<EpochRecord> curve;
};

struct TrainInputs {
  const EdgeSet* train = nullptr;
  // Validation positives by rater index (empty vectors for absent users).
  const std::vector<std::vector<std::uint32_t>>* validation = nullptr;
  std::size_t n_users = 0;
  const std::vector<Gender>* genders = nullptr;
  const std::vector<int>* group_by_user = nullptr;       // -1 = ungrouped
  const std::map<int, double>* weight_by_group = nullptr;  // from group_weights
};

// Full training loop: per-epoch negative sampling, shuffled mini-batches,
// SGD updates, periodic validation metrics, and best-epoch tracking under
// `rule` (ties keep the earlier epoch). Deterministic for a given seed.
TrainResult train(const TrainInputs& inputs, const TrainConfig& config,
                  SelectionRule rule = SelectionRule::avg_utility,
                  const std::function<void(int, const ModelParams&)>& on_epoch = {});

void write_curve_csv(const std::string& path, const std::vector<EpochRecord>& curve);

}  // namespace fairrec
