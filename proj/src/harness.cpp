#include "fairrec/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fairrec {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return json::parse(in);
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

double json_double(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

std::string selection_name(SelectionRule rule) {
  return rule == SelectionRule::avg_utility ? "avg_utility"
                                            : "utility_minus_fairness";
}

SelectionRule selection_from_name(const std::string& name) {
  if (name == "avg_utility") return SelectionRule::avg_utility;
  if (name == "utility_minus_fairness") return SelectionRule::utility_minus_fairness;
  throw std::invalid_argument("unknown selection rule: " + name);
}

fs::path model_dir(const ExperimentConfig& config, std::uint64_t seed, double p) {
  return run_dir(config) / "models" /
         ("seed" + std::to_string(seed) + "_p" + fmt_g(p));
}

fs::path eval_dir(const ExperimentConfig& config, double p, std::uint64_t seed) {
  return run_dir(config) / "eval" / ("p" + fmt_g(p)) /
         ("seed" + std::to_string(seed));
}

fs::path rerank_dir(const ExperimentConfig& config, const std::string& which,
                    std::uint64_t seed, double lambda) {
  return run_dir(config) / "rerank" / which / ("seed" + std::to_string(seed)) /
         ("lambda" + fmt_g(lambda));
}

void persist_evaluation(const fs::path& dir, const EvaluationResult& eval,
                        const std::vector<UserId>& raw_ids) {
  fs::create_directories(dir);
  write_text_file(dir / "metrics.json", metric_report_to_json(eval.metrics));
  write_text_file(dir / "calibration.json",
                  calibration_report_to_json(eval.calibration, raw_ids));
  write_per_user_csv((dir / "per_user.csv").string(), eval.per_user, raw_ids);
}

// Aggregates seed-level evaluation directories into one summary.
std::optional<VariantSummary> summarize_dirs(const std::string& variant,
                                             std::optional<double> lambda,
                                             double p,
                                             const std::vector<fs::path>& dirs) {
  VariantSummary summary;
  summary.variant = variant;
  summary.lambda = lambda;
  summary.p = p;

  std::vector<double> overall[kNumUtilityMetrics];
  std::vector<double> delta[kNumUtilityMetrics];
  std::vector<double> avg_utilities;
  std::vector<double> avg_fairnesses;
  std::vector<double> avg_group_deltas;
  std::vector<std::vector<double>> group_delta_by_seed;
  std::vector<std::vector<std::array<double, kNumUtilityMetrics>>> group_means_by_seed;

  for (const fs::path& dir : dirs) {
    if (!fs::exists(dir / "metrics.json")) continue;
    json m = read_json_file(dir / "metrics.json");
    json c = read_json_file(dir / "calibration.json");
    for (int i = 0; i < kNumUtilityMetrics; ++i) {
      overall[i].push_back(json_double(m["overall"][kUtilityMetricNames[i]]));
      delta[i].push_back(json_double(m["unfairness"][kUtilityMetricNames[i]]));
    }
    avg_utilities.push_back(json_double(m["avg_utility"]));
    avg_fairnesses.push_back(json_double(m["avg_fairness"]));
    avg_group_deltas.push_back(json_double(c["avg_group_delta"]));
    std::vector<double> gd;
    for (const auto& v : c["group_delta"]) gd.push_back(json_double(v));
    group_delta_by_seed.push_back(std::move(gd));
    std::vector<std::array<double, kNumUtilityMetrics>> gm;
    for (const auto& g : m["group_means"]) {
      std::array<double, kNumUtilityMetrics> row{};
      for (int i = 0; i < kNumUtilityMetrics; ++i) {
        row[i] = json_double(g[kUtilityMetricNames[i]]);
      }
      gm.push_back(row);
    }
    group_means_by_seed.push_back(std::move(gm));
  }
  if (avg_utilities.empty()) return std::nullopt;
  summary.n_seeds = static_cast<int>(avg_utilities.size());

  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    int n = 0;
    for (double x : v) {
      if (!std::isnan(x)) {
        s += x;
        ++n;
      }
    }
    return n > 0 ? s / n : kNaN;
  };
  auto std_of = [&](const std::vector<double>& v) {
    double m = mean_of(v);
    if (std::isnan(m)) return kNaN;
    double s = 0.0;
    int n = 0;
    for (double x : v) {
      if (!std::isnan(x)) {
        s += (x - m) * (x - m);
        ++n;
      }
    }
    return n > 1 ? std::sqrt(s / (n - 1)) : 0.0;
  };

  double o[kNumUtilityMetrics];
  for (int i = 0; i < kNumUtilityMetrics; ++i) {
    o[i] = mean_of(overall[i]);
    summary.delta[i] = mean_of(delta[i]);
    summary.utility_std[i] = std_of(overall[i]);
    summary.fairness_std[i] = std_of(delta[i]);
  }
  summary.overall = UtilityValues{o[0], o[1], o[2], o[3], o[4]};
  summary.avg_utility = mean_of(avg_utilities);
  summary.avg_fairness = mean_of(avg_fairnesses);
  summary.utility_std[kNumUtilityMetrics] = std_of(avg_utilities);
  summary.fairness_std[kNumUtilityMetrics] = std_of(avg_fairnesses);
  summary.avg_group_delta = mean_of(avg_group_deltas);

  std::size_t n_groups = 0;
  for (const auto& gd : group_delta_by_seed) n_groups = std::max(n_groups, gd.size());
  for (std::size_t g = 0; g < n_groups; ++g) {
    std::vector<double> values;
    for (const auto& gd : group_delta_by_seed) {
      if (g < gd.size()) values.push_back(gd[g]);
    }
    summary.group_delta.push_back(mean_of(values));
  }
  for (std::size_t g = 0; g < n_groups; ++g) {
    std::array<double, kNumUtilityMetrics> row{};
    for (int i = 0; i < kNumUtilityMetrics; ++i) {
      std::vector<double> values;
      for (const auto& gm : group_means_by_seed) {
        if (g < gm.size()) values.push_back(gm[g][i]);
      }
      row[i] = mean_of(values);
    }
    summary.group_means.push_back(row);
  }
  return summary;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& config) {
  json j;
  j["ratings"] = config.ratings_path;
  j["genders"] = config.genders_path;
  j["out_dir"] = config.out_dir;
  j["rating_threshold"] = config.rating_threshold;
  j["kcore_k"] = config.kcore_k;
  j["split_ratios"] = {config.split_ratios.train, config.split_ratios.validation,
                       config.split_ratios.test};
  j["split_seed"] = config.split_seed;
  j["n_groups"] = config.n_groups;
  j["group_thresholds"] = config.group_thresholds;
  j["stats_bins"] = config.stats_bins;
  j["train"] = {{"learning_rate", config.train.learning_rate},
                {"dim", config.train.dim},
                {"epochs", config.train.epochs},
                {"normalize_weights", config.train.normalize_weights},
                {"negatives_per_positive", config.train.negatives_per_positive},
                {"gender_feature", config.train.gender_feature},
                {"lambda_theta", config.train.lambda_theta},
                {"batch_size", config.train.batch_size},
                {"eval_every", config.train.eval_every},
                {"eval_k", config.train.eval_k}};
  j["rerank"] = {{"lambda", config.rerank.lambda},
                 {"k", config.rerank.k},
                 {"k_prime", config.rerank.k_prime}};
  j["p_grid"] = config.p_grid;
  j["lambda_grid"] = config.lambda_grid;
  j["seeds"] = config.seeds;
  j["selection"] = selection_name(config.selection);
  j["p_select_tolerance"] = config.p_select_tolerance;
  j["calibration_sum"] = config.calibration_sum;
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
  json j = json::parse(text);
  ExperimentConfig config;
  config.ratings_path = j.value("ratings", config.ratings_path);
  config.genders_path = j.value("genders", config.genders_path);
  config.out_dir = j.value("out_dir", config.out_dir);
  config.rating_threshold = j.value("rating_threshold", config.rating_threshold);
  config.kcore_k = j.value("kcore_k", config.kcore_k);
  if (j.contains("split_ratios")) {
    auto r = j["split_ratios"];
    config.split_ratios = {r.at(0).get<double>(), r.at(1).get<double>(),
                           r.at(2).get<double>()};
  }
  config.split_seed = j.value("split_seed", config.split_seed);
  config.n_groups = j.value("n_groups", config.n_groups);
  if (j.contains("group_thresholds")) {
    config.group_thresholds = j["group_thresholds"].get<std::vector<double>>();
  }
  config.stats_bins = j.value("stats_bins", config.stats_bins);
  if (j.contains("train")) {
    const json& t = j["train"];
    config.train.learning_rate = t.value("learning_rate", config.train.learning_rate);
    config.train.dim = t.value("dim", config.train.dim);
    config.train.epochs = t.value("epochs", config.train.epochs);
    config.train.normalize_weights =
        t.value("normalize_weights", config.train.normalize_weights);
    config.train.negatives_per_positive =
        t.value("negatives_per_positive", config.train.negatives_per_positive);
    config.train.gender_feature =
        t.value("gender_feature", config.train.gender_feature);
    config.train.lambda_theta = t.value("lambda_theta", config.train.lambda_theta);
    config.train.batch_size = t.value("batch_size", config.train.batch_size);
    config.train.eval_every = t.value("eval_every", config.train.eval_every);
    config.train.eval_k = t.value("eval_k", config.train.eval_k);
  }
  if (j.contains("rerank")) {
    const json& r = j["rerank"];
    config.rerank.lambda = r.value("lambda", config.rerank.lambda);
    config.rerank.k = r.value("k", config.rerank.k);
    config.rerank.k_prime = r.value("k_prime", config.rerank.k_prime);
  }
  if (j.contains("p_grid")) config.p_grid = j["p_grid"].get<std::vector<double>>();
  if (j.contains("lambda_grid")) {
    config.lambda_grid = j["lambda_grid"].get<std::vector<double>>();
  }
  if (j.contains("seeds")) {
    config.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  }
  if (j.contains("selection")) {
    config.selection = selection_from_name(j["selection"].get<std::string>());
  }
  config.p_select_tolerance =
      j.value("p_select_tolerance", config.p_select_tolerance);
  config.calibration_sum = j.value("calibration_sum", config.calibration_sum);
  if (config.p_grid.empty() || config.lambda_grid.empty() || config.seeds.empty()) {
    throw std::invalid_argument("grids and seeds must be nonempty");
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string config_hash(const ExperimentConfig& config) {
  // The output location is not semantic: it must not change the hash.
  ExperimentConfig canonical = config;
  canonical.out_dir.clear();
  std::string text = config_to_json(canonical);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

fs::path run_dir(const ExperimentConfig& config) {
  return fs::path(config.out_dir) / config_hash(config);
}

std::filesystem::path cmd_stats(const ExperimentConfig& config) {
  auto interactions = load_interactions(config.ratings_path);
  auto genders = load_genders(config.genders_path);
  interactions = drop_ungendered(std::move(interactions), genders);
  DatasetStats stats = dataset_stats(interactions, genders, config.stats_bins);
  fs::path dir = run_dir(config);
  fs::create_directories(dir);
  fs::path out = dir / "stats.json";
  write_text_file(out, stats_to_json(stats));
  return out;
}

std::filesystem::path cmd_preprocess(const ExperimentConfig& config) {
  auto interactions = load_interactions(config.ratings_path);
  auto genders = load_genders(config.genders_path);
  interactions = drop_ungendered(std::move(interactions), genders);
  interactions = filter_low_ratings(std::move(interactions), config.rating_threshold);
  interactions = kcore(std::move(interactions), config.kcore_k);
  if (interactions.empty()) {
    throw std::runtime_error(
        "preprocess: no interactions survive the k-core filter (k=" +
        std::to_string(config.kcore_k) + ")");
  }
  SplitDataset split =
      stratified_split(interactions, genders, config.split_ratios, config.split_seed);
  UserEncoder encoder = encode_users(interactions, genders);
  OgirTable train_ogir = compute_ogir(split.train, genders);
  GroupPartition partition =
      config.group_thresholds.empty()
          ? partition_equal_width(train_ogir, config.n_groups)
          : partition_fixed_thresholds(train_ogir, config.group_thresholds);

  fs::path dir = run_dir(config);
  fs::path pre = dir / "preprocessed";
  fs::create_directories(pre);
  write_text_file(dir / "meta.json",
                  json{{"hash", config_hash(config)},
                       {"split_seed", config.split_seed},
                       {"config", json::parse(config_to_json(config))}}
                      .dump(2));
  write_interactions_csv((pre / "train.csv").string(), split.train);
  write_interactions_csv((pre / "validation.csv").string(), split.validation);
  write_interactions_csv((pre / "test.csv").string(), split.test);
  {
    std::ofstream out(pre / "users.csv", std::ios::trunc);
    out << "index,user_id,gender\n";
    for (std::size_t i = 0; i < encoder.size(); ++i) {
      out << i << ',' << encoder.raw_ids[i] << ','
          << gender_char(encoder.genders[i]) << '\n';
    }
  }
  write_text_file(pre / "partition.json", partition_to_json(partition));
  return dir;
}

Workspace load_workspace(const std::filesystem::path& dir) {
  fs::path pre = dir / "preprocessed";
  Workspace ws;
  {
    std::ifstream in(pre / "users.csv");
    if (!in) {
      throw std::runtime_error("missing preprocessed artifacts in " + dir.string());
    }
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::size_t c1 = line.find(',');
      std::size_t c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
      if (c2 == std::string::npos || c2 + 1 >= line.size()) {
        throw std::runtime_error("malformed users.csv row: " + line);
      }
      UserId raw = std::stoll(line.substr(c1 + 1, c2 - c1 - 1));
      char g = line[c2 + 1];
      ws.encoder.index.emplace(raw,
                               static_cast<std::uint32_t>(ws.encoder.raw_ids.size()));
      ws.encoder.raw_ids.push_back(raw);
      ws.encoder.genders.push_back(g == 'F' ? Gender::F : Gender::M);
    }
  }
  auto train_edges = read_interactions_csv((pre / "train.csv").string());
  ws.train = EdgeSet::build(train_edges, ws.encoder);
  auto fill_positives = [&](const std::string& name,
                            std::vector<std::vector<std::uint32_t>>& out) {
    out.assign(ws.encoder.size(), {});
    for (const Interaction& e :
         read_interactions_csv((pre / name).string())) {
      out[ws.encoder.at(e.rater)].push_back(ws.encoder.at(e.ratee));
    }
    for (auto& v : out) std::sort(v.begin(), v.end());
  };
  fill_positives("validation.csv", ws.validation_positives);
  fill_positives("test.csv", ws.test_positives);
  {
    std::ifstream in(pre / "partition.json");
    std::stringstream ss;
    ss << in.rdbuf();
    ws.partition = partition_from_json(ss.str());
  }
  ws.group_by_user = compile_groups(ws.partition, ws.encoder);
  return ws;
}

std::vector<TrainedCell> cmd_train(const ExperimentConfig& config) {
  Workspace ws = load_workspace(run_dir(config));
  std::vector<TrainedCell> cells;
  for (std::uint64_t seed : config.seeds) {
    for (double p : config.p_grid) {
      TrainedCell cell;
      cell.seed = seed;
      cell.p = p;

      TrainConfig tc = config.train;
      tc.seed = seed;
      tc.reweight = p != 0.0;
      tc.reweight_exponent = p;

      TrainInputs inputs;
      inputs.train = &ws.train;
      inputs.validation = &ws.validation_positives;
      inputs.n_users = ws.encoder.size();
      inputs.genders = &ws.encoder.genders;
      inputs.group_by_user = &ws.group_by_user;
      std::map<int, double> weights = group_weights(ws.partition, p);
      inputs.weight_by_group = &weights;

      fs::path dir = model_dir(config, seed, p);
      fs::create_directories(dir);
      json record;
      record["seed"] = seed;
      record["p"] = p;
      record["config_hash"] = config_hash(config);
      try {
        TrainResult result = train(inputs, tc, config.selection);
        save_model(result.best_params, (dir / "model_best.txt").string(), seed,
                   config_hash(config));
        save_model(result.final_params, (dir / "model_final.txt").string(), seed,
                   config_hash(config));
        write_curve_csv((dir / "curve.csv").string(), result.curve);
        cell.best_epoch = result.best_epoch;
        for (const EpochRecord& r : result.curve) {
          if (r.epoch == result.best_epoch) {
            cell.val_avg_utility = r.val_avg_utility;
            cell.val_avg_fairness = r.val_avg_fairness;
          }
        }
        record["status"] = "ok";
        record["best_epoch"] = cell.best_epoch;
        record["val_avg_utility"] = cell.val_avg_utility;
        record["val_avg_fairness"] = cell.val_avg_fairness;
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
        record["status"] = "failed";
        record["error"] = cell.error;
        warn("training cell seed=" + std::to_string(seed) + " p=" + fmt_g(p) +
             " failed: " + cell.error);
      }
      write_text_file(dir / "run.json", record.dump(2));
      cells.push_back(cell);
    }
  }
  return cells;
}

int select_epoch(const std::vector<EpochRecord>& curve, SelectionRule rule) {
  if (curve.empty()) {
    throw std::invalid_argument("select_epoch: empty curve");
  }
  int best_epoch = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const EpochRecord& r : curve) {
    if (std::isnan(r.val_avg_utility)) continue;
    double s = rule == SelectionRule::avg_utility
                   ? r.val_avg_utility
                   : r.val_avg_utility - r.val_avg_fairness;
    if (s > best_score) {
      best_score = s;
      best_epoch = r.epoch;
    }
  }
  if (best_epoch < 0) {
    throw std::invalid_argument("select_epoch: no epoch has validation values");
  }
  return best_epoch;
}

double select_p(const ExperimentConfig& config) {
  std::map<double, std::vector<double>> utilities;
  for (std::uint64_t seed : config.seeds) {
    for (double p : config.p_grid) {
      fs::path file = model_dir(config, seed, p) / "run.json";
      if (!fs::exists(file)) continue;
      json record = read_json_file(file);
      if (record.value("status", "") != "ok") continue;
      if (!record["val_avg_utility"].is_number()) continue;  // degenerate run
      utilities[p].push_back(record["val_avg_utility"].get<double>());
    }
  }
  auto it = utilities.find(0.0);
  if (it == utilities.end() || it->second.empty()) {
    throw std::runtime_error("select_p: no successful p=0 run found");
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  double base = mean(it->second);
  double selected = 0.0;
  for (const auto& [p, values] : utilities) {
    if (values.size() != it->second.size()) continue;  // incomplete cell
    if (mean(values) >= (1.0 - config.p_select_tolerance) * base) {
      selected = std::max(selected, p);
    }
  }
  return selected;
}

void cmd_evaluate(const ExperimentConfig& config, double p) {
  Workspace ws = load_workspace(run_dir(config));
  int n_groups = ws.partition.n_groups();
  for (std::uint64_t seed : config.seeds) {
    fs::path src = model_dir(config, seed, p) / "model_best.txt";
    if (!fs::exists(src)) {
      throw std::runtime_error("missing checkpoint " + src.string());
    }
    LoadedModel loaded = load_model(src.string());
    EvaluationResult eval = evaluate_model(
        loaded.params, ws.test_positives, ws.train.positives, ws.group_by_user,
        n_groups, ws.encoder.genders, config.rerank.k);
    persist_evaluation(eval_dir(config, p, seed), eval, ws.encoder.raw_ids);
  }
}

void cmd_rerank(const ExperimentConfig& config, const std::string& which) {
  if (which != "base" && which != "rw") {
    throw std::invalid_argument("cmd_rerank: which must be 'base' or 'rw'");
  }
  double p = which == "base" ? 0.0 : select_p(config);
  Workspace ws = load_workspace(run_dir(config));
  int n_groups = ws.partition.n_groups();

  for (std::uint64_t seed : config.seeds) {
    fs::path src = model_dir(config, seed, p) / "model_best.txt";
    if (!fs::exists(src)) {
      throw std::runtime_error("missing checkpoint " + src.string());
    }
    LoadedModel loaded = load_model(src.string());
    std::vector<CandidateSet> candidates = build_candidate_sets(
        loaded.params, ws.train.positives, ws.encoder.genders,
        config.rerank.k_prime);

    // T^F per user from training history.
    std::vector<double> train_female_ratio(ws.encoder.size(), kNaN);
    for (std::size_t u = 0; u < ws.encoder.size(); ++u) {
      const auto& positives = ws.train.positives[u];
      if (positives.empty()) continue;
      std::int64_t f = 0;
      for (std::uint32_t v : positives) {
        if (ws.encoder.genders[v] == Gender::F) ++f;
      }
      train_female_ratio[u] =
          static_cast<double>(f) / static_cast<double>(positives.size());
    }

    for (double lambda : config.lambda_grid) {
      RerankConfig rc = config.rerank;
      rc.lambda = lambda;
      std::vector<RecList> lists;
      lists.reserve(candidates.size());
      for (const CandidateSet& set : candidates) {
        if (set.candidates.empty()) continue;
        double tf = train_female_ratio[set.user];
        if (std::isnan(tf)) continue;  // no training history, nothing to calibrate
        lists.push_back(greedy_rerank(set, rc, tf));
      }
      EvaluationResult eval = evaluate_lists(
          lists, ws.test_positives, ws.train.positives, ws.group_by_user,
          n_groups, ws.encoder.genders, rc.k, config.calibration_sum);
      fs::path dir = rerank_dir(config, which, seed, lambda);
      fs::create_directories(dir);
      write_reclists_csv((dir / "lists.csv").string(), lists, ws.encoder.raw_ids);
      persist_evaluation(dir, eval, ws.encoder.raw_ids);
      write_text_file(dir / "sidecar.json",
                      json{{"variant", which == "base" ? "rr" : "rwrr"},
                           {"lambda", lambda},
                           {"p", p},
                           {"seed", seed},
                           {"k", rc.k},
                           {"k_prime", rc.k_prime},
                           {"config_hash", config_hash(config)}}
                          .dump(2));
    }
  }
}

std::optional<VariantSummary> summarize_variant(const ExperimentConfig& config,
                                                const std::string& variant,
                                                std::optional<double> lambda) {
  std::vector<fs::path> dirs;
  double p = 0.0;
  if (variant == "base" || variant == "rw") {
    p = variant == "base" ? 0.0 : select_p(config);
    for (std::uint64_t seed : config.seeds) {
      dirs.push_back(eval_dir(config, p, seed));
    }
  } else if (variant == "rr" || variant == "rwrr") {
    if (!lambda.has_value()) {
      throw std::invalid_argument("summarize_variant: " + variant +
                                  " needs a lambda");
    }
    p = variant == "rr" ? 0.0 : select_p(config);
    for (std::uint64_t seed : config.seeds) {
      dirs.push_back(rerank_dir(config, variant == "rr" ? "base" : "rw", seed,
                                *lambda));
    }
  } else {
    throw std::invalid_argument("unknown variant: " + variant);
  }
  return summarize_dirs(variant, lambda, p, dirs);
}

void cmd_report(const ExperimentConfig& config) {
  fs::path dir = run_dir(config) / "reports";
  fs::create_directories(dir);

  std::vector<VariantSummary> summaries;
  auto add = [&](const std::string& variant, std::optional<double> lambda) {
    auto summary = summarize_variant(config, variant, lambda);
    if (summary.has_value()) summaries.push_back(*summary);
  };
  add("base", std::nullopt);
  add("rw", std::nullopt);
  for (double lambda : config.lambda_grid) add("rr", lambda);
  for (double lambda : config.lambda_grid) add("rwrr", lambda);
  if (summaries.empty()) {
    throw std::runtime_error("cmd_report: no records found; run train/evaluate first");
  }
  const VariantSummary* base = nullptr;
  for (const VariantSummary& s : summaries) {
    if (s.variant == "base") base = &s;
  }

  auto label = [](const VariantSummary& s) {
    std::string name = s.variant;
    if (s.lambda.has_value()) name += "@lambda=" + fmt_g(*s.lambda);
    return name;
  };

  {
    std::ofstream out(dir / "table1.csv", std::ios::trunc);
    out << "variant,lambda,p,n_seeds,R,P,F1,H,N,avg_utility,avg_utility_std,"
           "delta_R,delta_P,delta_F1,delta_H,delta_N,avg_fairness,"
           "avg_fairness_std,utility_delta_pct,fairness_improvement_pct\n";
    for (const VariantSummary& s : summaries) {
      out << label(s) << ',' << (s.lambda ? fmt_g(*s.lambda) : "") << ','
          << fmt_g(s.p) << ',' << s.n_seeds;
      for (int i = 0; i < kNumUtilityMetrics; ++i) out << ',' << fmt_g(s.overall[i]);
      out << ',' << fmt_g(s.avg_utility) << ','
          << fmt_g(s.utility_std[kNumUtilityMetrics]);
      for (int i = 0; i < kNumUtilityMetrics; ++i) out << ',' << fmt_g(s.delta[i]);
      out << ',' << fmt_g(s.avg_fairness) << ','
          << fmt_g(s.fairness_std[kNumUtilityMetrics]);
      // Improvement conventions: utility (new-old)/old, fairness (old-new)/old.
      if (base != nullptr && &s != base) {
        out << ','
            << fmt_g((s.avg_utility - base->avg_utility) / base->avg_utility * 100.0)
            << ','
            << fmt_g((base->avg_fairness - s.avg_fairness) / base->avg_fairness *
                     100.0);
      } else {
        out << ",,";
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "group_bars.csv", std::ios::trunc);
    out << "variant,lambda,group,metric,value\n";
    for (const VariantSummary& s : summaries) {
      for (std::size_t g = 0; g < s.group_means.size(); ++g) {
        for (int m = 0; m < kNumUtilityMetrics; ++m) {
          out << label(s) << ',' << (s.lambda ? fmt_g(*s.lambda) : "") << ','
              << "G" << (g + 1) << ',' << kUtilityMetricNames[m] << ','
              << fmt_g(s.group_means[g][m]) << '\n';
        }
      }
    }
  }
  {
    std::ofstream out(dir / "lambda_sweep.csv", std::ios::trunc);
    out << "variant,lambda,avg_utility,avg_fairness,avg_group_delta\n";
    for (const VariantSummary& s : summaries) {
      out << s.variant << ',' << (s.lambda ? fmt_g(*s.lambda) : "") << ','
          << fmt_g(s.avg_utility) << ',' << fmt_g(s.avg_fairness) << ','
          << fmt_g(s.avg_group_delta) << '\n';
    }
  }
  {
    std::ofstream out(dir / "calibration_variants.csv", std::ios::trunc);
    out << "variant,lambda,group,delta_group\n";
    for (const VariantSummary& s : summaries) {
      bool reference_lambda =
          !s.lambda.has_value() || *s.lambda == config.rerank.lambda;
      if (!reference_lambda) continue;
      for (std::size_t g = 0; g < s.group_delta.size(); ++g) {
        out << s.variant << ',' << (s.lambda ? fmt_g(*s.lambda) : "") << ','
            << "G" << (g + 1) << ',' << fmt_g(s.group_delta[g]) << '\n';
      }
    }
  }
}

}  // namespace fairrec
