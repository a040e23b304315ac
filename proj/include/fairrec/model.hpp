#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairrec/types.hpp"

namespace fairrec {

// Per-user embeddings scored by inner product. Row-major, one row per user.
struct ModelParams {
  std::size_t n_users = 0;
  std::size_t dim = 0;
  std::vector<double> values;
  double lambda_theta = 1e-4;

  double* row(std::size_t u) { return values.data() + u * dim; }
  const double* row(std::size_t u) const { return values.data() + u * dim; }
};

// Entries drawn from N(0, 0.1^2). With gender_feature on (requires dim >= 2),
// the last two dimensions start as the one-hot gender encoding: (1, 0) for
// female users, (0, 1) for male users. All dimensions stay trainable.
ModelParams init_params(std::size_t n_users, std::size_t dim, std::uint64_t seed,
                        bool gender_feature, const std::vector<Gender>& genders,
                        double lambda_theta);

// Inner product of embedding rows u and v.
double score(const ModelParams& params, std::size_t u, std::size_t v);

// Text dump with a `n_users dim seed config_hash` header; values round-trip
// exactly via max-precision formatting.
void save_model(const ModelParams& params, const std::string& path,
                std::uint64_t seed, const std::string& config_hash);

struct LoadedModel {
  ModelParams params;
  std::uint64_t seed = 0;
  std::string config_hash;
};

LoadedModel load_model(const std::string& path);

}  // namespace fairrec
