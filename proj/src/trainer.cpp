#include "fairrec/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "fairrec/metrics.hpp"

namespace fairrec {

namespace {

constexpr int kMaxNegativeAttempts = 1000;

// -log sigmoid(x), stable for large |x|.
double softplus_neg(double x) {
  return x > 0.0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

// sigmoid(-x), stable for large |x|.
double sigmoid_neg(double x) {
  if (x > 0.0) {
    double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

double squared_norm(const double* v, std::size_t dim) {
  double s = 0.0;
  for (std::size_t d = 0; d < dim; ++d) s += v[d] * v[d];
  return s;
}

}  // namespace

std::vector<Triplet> sample_triplets(const EdgeSet& train, std::size_t n_users,
                                     int negatives_per_positive,
                                     std::mt19937_64& rng) {
  if (train.edges.empty()) {
    throw std::invalid_argument("sample_triplets: empty training set");
  }
  std::uniform_int_distribution<std::uint32_t> uniform(
      0, static_cast<std::uint32_t>(n_users - 1));
  std::vector<Triplet> triplets;
  triplets.reserve(train.edges.size() * negatives_per_positive);
  std::size_t skipped = 0;
  for (const auto& [u, i] : train.edges) {
    const auto& positives = train.positives[u];
    for (int slot = 0; slot < negatives_per_positive; ++slot) {
      bool found = false;
      for (int attempt = 0; attempt < kMaxNegativeAttempts; ++attempt) {
        std::uint32_t j = uniform(rng);
        if (j == u) continue;
        if (std::binary_search(positives.begin(), positives.end(), j)) continue;
        triplets.push_back({u, i, j});
        found = true;
        break;
      }
      if (!found) ++skipped;
    }
  }
  if (skipped > 0) {
    warn("negative sampling skipped " + std::to_string(skipped) +
         " slot(s): no unobserved candidate found");
  }
  return triplets;
}

double bpr_batch_loss(const ModelParams& params, std::span<const Triplet> batch,
                      const std::vector<double>& weight_by_user,
                      double lambda_theta) {
  const std::size_t dim = params.dim;
  double loss = 0.0;
  for (const Triplet& t : batch) {
    double w = weight_by_user[t.user];
    if (w == 0.0) continue;
    const double* pu = params.row(t.user);
    const double* pi = params.row(t.pos);
    const double* pj = params.row(t.neg);
    double x = 0.0;
    for (std::size_t d = 0; d < dim; ++d) x += pu[d] * (pi[d] - pj[d]);
    double reg = squared_norm(pu, dim) + squared_norm(pi, dim) + squared_norm(pj, dim);
    loss += w * (softplus_neg(x) + lambda_theta * reg);
  }
  return loss;
}

std::map<std::uint32_t, std::vector<double>> bpr_batch_gradient(
    const ModelParams& params, std::span<const Triplet> batch,
    const std::vector<double>& weight_by_user, double lambda_theta) {
  const std::size_t dim = params.dim;
  std::map<std::uint32_t, std::vector<double>> grads;
  auto row_grad = [&](std::uint32_t r) -> std::vector<double>& {
    auto it = grads.find(r);
    if (it == grads.end()) {
      it = grads.emplace(r, std::vector<double>(dim, 0.0)).first;
    }
    return it->second;
  };
  for (const Triplet& t : batch) {
    double w = weight_by_user[t.user];
    if (w == 0.0) continue;
    const double* pu = params.row(t.user);
    const double* pi = params.row(t.pos);
    const double* pj = params.row(t.neg);
    double x = 0.0;
    for (std::size_t d = 0; d < dim; ++d) x += pu[d] * (pi[d] - pj[d]);
    // d/dx of -log sigmoid(x) is -sigmoid(-x).
    double slope = -sigmoid_neg(x);
    std::vector<double>& gu = row_grad(t.user);
    std::vector<double>& gi = row_grad(t.pos);
    std::vector<double>& gj = row_grad(t.neg);
    for (std::size_t d = 0; d < dim; ++d) {
      gu[d] += w * (slope * (pi[d] - pj[d]) + 2.0 * lambda_theta * pu[d]);
      gi[d] += w * (slope * pu[d] + 2.0 * lambda_theta * pi[d]);
      gj[d] += w * (-slope * pu[d] + 2.0 * lambda_theta * pj[d]);
    }
  }
  return grads;
}

double bpr_step(ModelParams& params, std::span<const Triplet> batch,
                const std::vector<double>& weight_by_user, double learning_rate,
                double lambda_theta) {
  double loss = bpr_batch_loss(params, batch, weight_by_user, lambda_theta);
  if (!std::isfinite(loss)) {
    throw std::runtime_error(
        "non-finite BPR loss; the learning rate is likely too high");
  }
  auto grads = bpr_batch_gradient(params, batch, weight_by_user, lambda_theta);
  const std::size_t dim = params.dim;
  for (const auto& [r, g] : grads) {
    double* row = params.row(r);
    for (std::size_t d = 0; d < dim; ++d) {
      row[d] -= learning_rate * g[d];
    }
  }
  return loss;
}

TrainResult train(const TrainInputs& inputs, const TrainConfig& config,
                  SelectionRule rule,
                  const std::function<void(int, const ModelParams&)>& on_epoch) {
  if (inputs.train == nullptr || inputs.train->edges.empty()) {
    throw std::invalid_argument("train: empty training set");
  }
  if (config.epochs < 1 || config.learning_rate <= 0.0 ||
      config.reweight_exponent < 0.0) {
    throw std::invalid_argument("train: invalid config");
  }
  const std::size_t n_users = inputs.n_users;

  // Per-user loss weights. Unweighted training never consults the partition.
  std::vector<double> weight_by_user(n_users, 1.0);
  if (config.reweight) {
    if (inputs.group_by_user == nullptr || inputs.weight_by_group == nullptr) {
      throw std::invalid_argument("train: reweighting needs groups and weights");
    }
    double scale = 1.0;
    if (config.normalize_weights) {
      double total = 0.0;
      std::int64_t counted = 0;
      for (std::size_t u = 0; u < n_users; ++u) {
        int g = (*inputs.group_by_user)[u];
        if (g < 0) continue;
        auto it = inputs.weight_by_group->find(g);
        if (it == inputs.weight_by_group->end()) continue;
        total += it->second;
        ++counted;
      }
      if (counted > 0 && total > 0.0) {
        scale = static_cast<double>(counted) / total;
      }
    }
    for (const auto& [u, i] : inputs.train->edges) {
      int g = (*inputs.group_by_user)[u];
      if (g < 0) {
        throw std::runtime_error("train: rater " + std::to_string(u) +
                                 " has no group");
      }
      auto it = inputs.weight_by_group->find(g);
      if (it == inputs.weight_by_group->end()) {
        throw std::runtime_error("train: no weight for group " + std::to_string(g));
      }
      weight_by_user[u] = it->second * scale;
    }
  }

  TrainResult result;
  result.final_params =
      init_params(n_users, config.dim, config.seed, config.gender_feature,
                  inputs.genders ? *inputs.genders : std::vector<Gender>(),
                  config.lambda_theta);
  ModelParams& params = result.final_params;

  std::mt19937_64 sampler_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  double best_score = -std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<Triplet> triplets = sample_triplets(
        *inputs.train, n_users, config.negatives_per_positive, sampler_rng);
    std::shuffle(triplets.begin(), triplets.end(), sampler_rng);

    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < triplets.size();
         begin += config.batch_size) {
      std::size_t end = std::min(begin + config.batch_size, triplets.size());
      loss_sum += bpr_step(
          params,
          std::span<const Triplet>(triplets.data() + begin, end - begin),
          weight_by_user, config.learning_rate, config.lambda_theta);
    }

    EpochRecord record;
    record.epoch = epoch;
    record.loss = loss_sum / static_cast<double>(triplets.size());
    record.val_avg_utility = std::numeric_limits<double>::quiet_NaN();
    record.val_avg_fairness = std::numeric_limits<double>::quiet_NaN();

    bool eval_now = inputs.validation != nullptr && inputs.group_by_user != nullptr &&
                    (epoch % std::max(1, config.eval_every) == 0 ||
                     epoch == config.epochs);
    if (eval_now) {
      int n_groups = 0;
      for (int g : *inputs.group_by_user) n_groups = std::max(n_groups, g + 1);
      EvaluationResult eval = evaluate_model(
          params, *inputs.validation, inputs.train->positives,
          *inputs.group_by_user, n_groups, *inputs.genders, config.eval_k);
      record.val_avg_utility = eval.metrics.avg_utility;
      record.val_avg_fairness = eval.metrics.avg_fairness;

      double selection_score = rule == SelectionRule::avg_utility
                                   ? eval.metrics.avg_utility
                                   : eval.metrics.avg_utility -
                                         eval.metrics.avg_fairness;
      if (selection_score > best_score) {  // ties keep the earlier epoch
        best_score = selection_score;
        result.best_params = params;
        result.best_epoch = epoch;
      }
    }
    result.curve.push_back(record);
    if (on_epoch) on_epoch(epoch, params);
  }

  if (result.best_epoch < 0) {
    result.best_params = params;
    result.best_epoch = config.epochs;
  }
  return result;
}

void write_curve_csv(const std::string& path,
                     const std::vector<EpochRecord>& curve) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out << "epoch,loss,val_avg_utility,val_avg_fairness\n";
  char buf[128];
  for (const EpochRecord& r : curve) {
    std::snprintf(buf, sizeof(buf), "%d,%.10g,", r.epoch, r.loss);
    out << buf;
    if (std::isnan(r.val_avg_utility)) {
      out << ',';
    } else {
      std::snprintf(buf, sizeof(buf), "%.10g,", r.val_avg_utility);
      out << buf;
    }
    if (std::isnan(r.val_avg_fairness)) {
      out << '\n';
    } else {
      std::snprintf(buf, sizeof(buf), "%.10g\n", r.val_avg_fairness);
      out << buf;
    }
  }
}

}  // namespace fairrec
