#include "fairrec/model.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fairrec {

ModelParams init_params(std::size_t n_users, std::size_t dim, std::uint64_t seed,
                        bool gender_feature, const std::vector<Gender>& genders,
                        double lambda_theta) {
  if (dim < 1) {
    throw std::invalid_argument("embedding dimension must be >= 1");
  }
  if (gender_feature && dim < 2) {
    throw std::invalid_argument("gender feature needs dim >= 2");
  }
  if (gender_feature && genders.size() != n_users) {
    throw std::invalid_argument("gender vector size does not match n_users");
  }
  ModelParams params;
  params.n_users = n_users;
  params.dim = dim;
  params.lambda_theta = lambda_theta;
  params.values.resize(n_users * dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.1);
  for (double& v : params.values) {
    v = normal(rng);
  }
  if (gender_feature) {
    for (std::size_t u = 0; u < n_users; ++u) {
      double* r = params.row(u);
      bool female = genders[u] == Gender::F;
      r[dim - 2] = female ? 1.0 : 0.0;
      r[dim - 1] = female ? 0.0 : 1.0;
    }
  }
  return params;
}

double score(const ModelParams& params, std::size_t u, std::size_t v) {
  const double* a = params.row(u);
  const double* b = params.row(v);
  double s = 0.0;
  for (std::size_t d = 0; d < params.dim; ++d) {
    s += a[d] * b[d];
  }
  return s;
}

void save_model(const ModelParams& params, const std::string& path,
                std::uint64_t seed, const std::string& config_hash) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write model file " + path);
  }
  out << params.n_users << ' ' << params.dim << ' ' << seed << ' '
      << (config_hash.empty() ? "-" : config_hash) << '\n';
  char buf[32];
  for (std::size_t u = 0; u < params.n_users; ++u) {
    const double* r = params.row(u);
    for (std::size_t d = 0; d < params.dim; ++d) {
      std::snprintf(buf, sizeof(buf), "%.17g", r[d]);
      out << buf << (d + 1 == params.dim ? '\n' : ' ');
    }
  }
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open model file " + path);
  }
  LoadedModel loaded;
  in >> loaded.params.n_users >> loaded.params.dim >> loaded.seed >>
      loaded.config_hash;
  if (!in) {
    throw std::runtime_error("malformed model header in " + path);
  }
  if (loaded.config_hash == "-") loaded.config_hash.clear();
  loaded.params.values.resize(loaded.params.n_users * loaded.params.dim);
  for (double& v : loaded.params.values) {
    if (!(in >> v)) {
      throw std::runtime_error("truncated model matrix in " + path);
    }
  }
  return loaded;
}

}  // namespace fairrec
