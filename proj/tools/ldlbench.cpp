// ldlbench: benchmark harness for the LDL-LIFT-SAP library. Runs seeded
// repeated trials, ablations over the fusion variants, fusion-weight grid
// searches, and Friedman/Nemenyi statistics over result tables.
#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ldl/dataset.hpp"
#include "ldl/metrics.hpp"
#include "ldl/parallel.hpp"
#include "ldl/pipeline.hpp"
#include "ldl/stats.hpp"
#include "ldl/text_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kAlgorithmName = "LDL-LIFT-SAP";

struct Options {
  std::vector<std::string> datasets;
  int trials = 10;
  double split_fraction = 0.5;
  std::uint64_t seed = 0;
  double sigma = 0.1;
  double alpha = 0.5;
  double pos_frac = 0.55;
  double neg_frac = 0.35;
  int block_size = 4;
  std::string weights = "grid";  // "grid" or "l,m,e"
  double grid_step = 0.05;
  std::string variant = "D";
  std::string out_dir = "out";
  int workers = 1;
  bool renormalize = false;
  std::string format = "auto";  // auto | canonical | csv
  double tr_fraction = 0.5;
  int max_iterations = 200;
  double gradient_tolerance = 1e-6;
  double l2_penalty = 1e-6;
  bool save_models = false;
};

json options_to_json(const Options& o) {
  return json{{"datasets", o.datasets},
              {"trials", o.trials},
              {"split_fraction", o.split_fraction},
              {"seed", o.seed},
              {"sigma", o.sigma},
              {"alpha", o.alpha},
              {"pos_frac", o.pos_frac},
              {"neg_frac", o.neg_frac},
              {"block_size", o.block_size},
              {"weights", o.weights},
              {"grid_step", o.grid_step},
              {"variant", o.variant},
              {"out", o.out_dir},
              {"workers", o.workers},
              {"renormalize", o.renormalize},
              {"format", o.format},
              {"tr_fraction", o.tr_fraction},
              {"max_iterations", o.max_iterations},
              {"gradient_tolerance", o.gradient_tolerance},
              {"l2_penalty", o.l2_penalty},
              {"save_models", o.save_models}};
}

std::string config_fingerprint(const Options& o) {
  json j = options_to_json(o);
  // fields that cannot change the results stay out of the fingerprint
  j.erase("out");
  j.erase("workers");
  j.erase("save_models");
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(ldl::io::fnv1a(j.dump())));
  return buf;
}

void merge_config_file(const std::string& path, const CLI::App* cmd,
                       Options& o) {
  std::ifstream is(path);
  if (!is) throw CLI::ValidationError("--config", "cannot open " + path);
  json cfg = json::parse(is);
  auto overridden = [&](const std::string& flag) {
    auto* opt = cmd->get_option_no_throw("--" + flag);
    return opt != nullptr && opt->count() > 0;
  };
  auto take = [&](const char* key, auto& field) {
    if (cfg.contains(key) && !overridden(key)) cfg.at(key).get_to(field);
  };
  take("datasets", o.datasets);
  take("trials", o.trials);
  take("split_fraction", o.split_fraction);
  take("seed", o.seed);
  take("sigma", o.sigma);
  take("alpha", o.alpha);
  take("pos_frac", o.pos_frac);
  take("neg_frac", o.neg_frac);
  take("block_size", o.block_size);
  take("weights", o.weights);
  take("grid_step", o.grid_step);
  take("variant", o.variant);
  take("out", o.out_dir);
  take("workers", o.workers);
  take("renormalize", o.renormalize);
  take("format", o.format);
  take("tr_fraction", o.tr_fraction);
  take("max_iterations", o.max_iterations);
  take("gradient_tolerance", o.gradient_tolerance);
  take("l2_penalty", o.l2_penalty);
  take("save_models", o.save_models);
}

void add_common_flags(CLI::App* cmd, Options& o, std::string& config_path) {
  cmd->add_option("--config", config_path, "JSON config file (flags override)");
  cmd->add_option("--dataset,--datasets", o.datasets, "dataset file(s)");
  cmd->add_option("--seed", o.seed, "base seed");
  cmd->add_option("--sigma", o.sigma, "cluster-count ratio");
  cmd->add_option("--alpha", o.alpha, "uncertain-set discount");
  cmd->add_option("--pos-frac", o.pos_frac, "positive percentile");
  cmd->add_option("--neg-frac", o.neg_frac, "negative percentile");
  cmd->add_option("--block-size", o.block_size,
                  "centers per block (0 disables blocks)");
  cmd->add_option("--weights", o.weights, "'grid' or 'lambda,mu,epsilon'");
  cmd->add_option("--grid-step", o.grid_step, "grid step for weight search");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--workers", o.workers, "worker threads");
  cmd->add_flag("--renormalize", o.renormalize,
                "renormalize noisy distribution rows on load");
  cmd->add_option("--format", o.format, "dataset format: auto|canonical|csv");
  cmd->add_option("--tr-fraction", o.tr_fraction, "Tr share of the train split");
  cmd->add_option("--max-iterations", o.max_iterations, "BFGS iteration cap");
  cmd->add_option("--gradient-tolerance", o.gradient_tolerance,
                  "BFGS gradient tolerance");
  cmd->add_option("--l2", o.l2_penalty, "L2 penalty");
}

ldl::DatasetFormat format_for(const Options& o, const std::string& path) {
  if (o.format == "canonical") return ldl::DatasetFormat::kCanonicalText;
  if (o.format == "csv") return ldl::DatasetFormat::kCsv;
  if (o.format == "auto")
    return path.size() >= 4 && path.substr(path.size() - 4) == ".csv"
               ? ldl::DatasetFormat::kCsv
               : ldl::DatasetFormat::kCanonicalText;
  throw CLI::ValidationError("--format", "unknown format " + o.format);
}

ldl::TrainConfig train_config(const Options& o, std::uint64_t seed,
                              int workers) {
  ldl::TrainConfig cfg;
  cfg.features.sigma = o.sigma;
  cfg.features.alpha = o.alpha;
  cfg.features.pos_frac = o.pos_frac;
  cfg.features.neg_frac = o.neg_frac;
  cfg.features.target_block_size = o.block_size;
  cfg.optimizer.max_iterations = o.max_iterations;
  cfg.optimizer.gradient_tolerance = o.gradient_tolerance;
  cfg.optimizer.l2_penalty = o.l2_penalty;
  cfg.tr_fraction = o.tr_fraction;
  cfg.seed = seed;
  cfg.workers = workers;
  return cfg;
}

std::optional<ldl::FusionWeights> parse_fixed_weights(const std::string& spec) {
  if (spec == "grid") return std::nullopt;
  ldl::FusionWeights w;
  char comma1, comma2;
  std::istringstream ss(spec);
  if (!(ss >> w.lambda >> comma1 >> w.mu >> comma2 >> w.epsilon) ||
      comma1 != ',' || comma2 != ',')
    throw CLI::ValidationError("--weights",
                               "expected 'grid' or 'lambda,mu,epsilon'");
  w.validate();
  return w;
}

ldl::FusionWeights normalized(double l, double m, double e) {
  const double sum = l + m + e;
  if (sum <= 0.0) return {1.0, 0.0, 0.0};
  return {l / sum, m / sum, e / sum};
}

// Resolves the fusion weights one variant uses for one trial: fixed weights
// are projected onto the variant's support, grid mode searches within it.
ldl::FusionWeights resolve_weights(const Options& o, char variant,
                                   const ldl::LabelDistributionDataset& train,
                                   const ldl::TrainConfig& cfg) {
  auto fixed = parse_fixed_weights(o.weights);
  switch (variant) {
    case 'A':
      return {1.0, 0.0, 0.0};
    case 'B':
      if (fixed) return normalized(fixed->lambda, fixed->mu, 0.0);
      return ldl::grid_search_fusion(train, cfg, o.grid_step, nullptr, false,
                                     true);
    case 'C':
      if (fixed) return normalized(fixed->lambda, 0.0, fixed->epsilon);
      return ldl::grid_search_fusion(train, cfg, o.grid_step, nullptr, true,
                                     false);
    case 'D':
      if (fixed) return *fixed;
      return ldl::grid_search_fusion(train, cfg, o.grid_step);
  }
  throw CLI::ValidationError("--variant", "variant must be one of A,B,C,D");
}

struct TrialOutcome {
  int trial = 0;
  bool ok = false;
  std::string error;
  ldl::FusionWeights weights;
  ldl::TrialReport report;
  ldl::TrainManifest manifest;
  std::string serialized_pipeline;
};

TrialOutcome run_trial(const ldl::LabelDistributionDataset& dataset,
                       const Options& o, char variant, int trial,
                       int workers) {
  TrialOutcome outcome;
  outcome.trial = trial;
  try {
    const std::uint64_t trial_seed = o.seed + static_cast<std::uint64_t>(trial);
    auto split = ldl::split_random(dataset.instance_count(), o.split_fraction,
                                   trial_seed);
    auto train_ds = dataset.subset(split.train);
    auto test_ds = dataset.subset(split.test);

    ldl::TrainConfig cfg = train_config(o, trial_seed, workers);
    outcome.weights = resolve_weights(o, variant, train_ds, cfg);
    cfg.features.fusion = outcome.weights;

    auto pipe = ldl::train(train_ds, cfg, &outcome.manifest);
    Eigen::MatrixXd pred = pipe.predict_batch(test_ds.features);
    std::vector<ldl::MetricVector> per_instance;
    per_instance.reserve(test_ds.instance_count());
    for (int i = 0; i < test_ds.instance_count(); ++i)
      per_instance.push_back(
          ldl::evaluate(pred.row(i), test_ds.distributions.row(i)));
    outcome.report = ldl::aggregate(per_instance);
    if (o.save_models) {
      std::ostringstream ss;
      pipe.save(ss);
      outcome.serialized_pipeline = ss.str();
    }
    outcome.ok = true;
  } catch (const std::exception& e) {
    outcome.error = e.what();
  }
  return outcome;
}

std::vector<TrialOutcome> run_trials(const ldl::LabelDistributionDataset& ds,
                                     const Options& o, char variant) {
  std::vector<TrialOutcome> outcomes(o.trials);
  const int trial_workers = std::min(o.workers, o.trials);
  const int inner_workers = o.trials == 1 ? o.workers : 1;
  ldl::parallel_for(o.trials, trial_workers, [&](int t) {
    outcomes[t] = run_trial(ds, o, variant, t, inner_workers);
  });
  return outcomes;
}

// Aggregation across trials: mean of per-trial means, population std of
// per-trial means.
ldl::TrialReport across_trials(const std::vector<TrialOutcome>& outcomes) {
  std::vector<ldl::MetricVector> means;
  for (const auto& oc : outcomes)
    if (oc.ok) means.push_back(oc.report.mean);
  return ldl::aggregate(means);
}

std::string weights_str(const ldl::FusionWeights& w) {
  return ldl::io::fmt(w.lambda) + "," + ldl::io::fmt(w.mu) + "," +
         ldl::io::fmt(w.epsilon);
}

json manifest_json(const TrialOutcome& oc) {
  json labels = json::array();
  for (const auto& d : oc.manifest.label_dims)
    labels.push_back(json{{"m_j", d.m_j},
                          {"m_j_star", d.m_j_star},
                          {"sap_count", d.sap_count},
                          {"output_dim", d.output_dim}});
  char hash[20];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(oc.manifest.geometry_hash));
  return json{{"trial", oc.trial},
              {"ok", oc.ok},
              {"error", oc.error},
              {"seed", oc.manifest.seed},
              {"weights", weights_str(oc.weights)},
              {"n_train", oc.manifest.n_train},
              {"n_tr", oc.manifest.n_tr},
              {"n_val", oc.manifest.n_val},
              {"labels", labels},
              {"geometry_hash", hash},
              {"fit_seconds", oc.manifest.fit_seconds},
              {"model_seconds", oc.manifest.model_seconds}};
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << contents;
}

std::string csv_header(const Options& o) {
  return "# config=" + config_fingerprint(o) +
         " seed=" + std::to_string(o.seed) + "\n";
}

std::string long_csv(
    const Options& o,
    const std::map<std::string, std::vector<TrialOutcome>>& per_algorithm,
    const std::string& dataset_name) {
  std::string csv = csv_header(o);
  csv += "dataset,algorithm,metric,trial,value\n";
  for (const auto& [alg, outcomes] : per_algorithm)
    for (const auto& oc : outcomes) {
      if (!oc.ok) continue;
      for (int i = 0; i < ldl::MetricVector::kCount; ++i)
        csv += dataset_name + "," + alg + "," + ldl::MetricVector::names()[i] +
               "," + std::to_string(oc.trial) + "," +
               ldl::io::fmt(oc.report.mean[i]) + "\n";
    }
  return csv;
}

std::string summary_csv(const Options& o,
                        const std::map<std::string, ldl::TrialReport>& summary,
                        const std::string& dataset_name) {
  std::string csv = csv_header(o);
  csv += "dataset,algorithm,metric,mean,std\n";
  for (const auto& [alg, report] : summary)
    for (int i = 0; i < ldl::MetricVector::kCount; ++i)
      csv += dataset_name + "," + alg + "," + ldl::MetricVector::names()[i] +
             "," + ldl::io::fmt(report.mean[i]) + "," +
             ldl::io::fmt(report.stddev[i]) + "\n";
  return csv;
}

int count_failures(const std::vector<TrialOutcome>& outcomes) {
  int failures = 0;
  for (const auto& oc : outcomes)
    if (!oc.ok) {
      std::cerr << "[ldlbench] trial " << oc.trial << " failed: " << oc.error
                << "\n";
      ++failures;
    }
  return failures;
}

void validate_experiment(const Options& o) {
  if (o.trials < 1) throw CLI::ValidationError("--trials", "must be >= 1");
  if (o.variant.size() != 1 || o.variant.find_first_of("ABCD") != 0)
    throw CLI::ValidationError("--variant", "must be one of A,B,C,D");
}

int cmd_run(const Options& o) {
  validate_experiment(o);
  // Ablated variants get a distinguishable algorithm name so cross-variant
  // score tables can go straight into `stats`.
  const std::string algorithm =
      o.variant == "D" ? kAlgorithmName
                       : std::string(kAlgorithmName) + "-" + o.variant;
  int exit_code = 0;
  for (const auto& path : o.datasets) {
    auto ds = ldl::load_dataset(path, format_for(o, path), o.renormalize);
    std::cout << "dataset " << ds.name << ": n=" << ds.instance_count()
              << " m=" << ds.feature_count() << " p=" << ds.label_count()
              << "\n";
    auto outcomes = run_trials(ds, o, o.variant[0]);
    if (count_failures(outcomes) == o.trials) {
      exit_code = 1;
      continue;
    }

    fs::path dir = fs::path(o.out_dir) / ds.name;
    fs::create_directories(dir);
    std::map<std::string, std::vector<TrialOutcome>> by_alg{
        {algorithm, outcomes}};
    write_file(dir / "trials.csv", long_csv(o, by_alg, ds.name));

    std::map<std::string, ldl::TrialReport> summary{
        {algorithm, across_trials(outcomes)}};
    write_file(dir / "summary.csv", summary_csv(o, summary, ds.name));

    json sj{{"dataset", ds.name},
            {"config", config_fingerprint(o)},
            {"seed", o.seed},
            {"algorithm", algorithm},
            {"metrics", json::object()}};
    const auto& rep = summary.at(algorithm);
    for (int i = 0; i < ldl::MetricVector::kCount; ++i) {
      sj["metrics"][ldl::MetricVector::names()[i]] = {
          {"mean", rep.mean[i]}, {"std", rep.stddev[i]}};
      std::cout << "  " << ldl::MetricVector::names()[i] << ": " << rep.mean[i]
                << " +/- " << rep.stddev[i] << "\n";
    }
    write_file(dir / "summary.json", sj.dump(2) + "\n");

    json mj{{"command", "run"},
            {"config", options_to_json(o)},
            {"config_hash", config_fingerprint(o)},
            {"dataset", ds.name},
            {"trials", json::array()}};
    for (const auto& oc : outcomes) mj["trials"].push_back(manifest_json(oc));
    write_file(dir / "manifest.json", mj.dump(2) + "\n");

    if (o.save_models)
      for (const auto& oc : outcomes)
        if (oc.ok)
          write_file(
              dir / ("pipeline_trial" + std::to_string(oc.trial) + ".txt"),
              oc.serialized_pipeline);
  }
  return exit_code;
}

int cmd_ablate(const Options& o) {
  validate_experiment(o);
  const std::string variants = "ABCD";
  int exit_code = 0;
  for (const auto& path : o.datasets) {
    auto ds = ldl::load_dataset(path, format_for(o, path), o.renormalize);
    std::cout << "ablation on " << ds.name << "\n";

    std::map<std::string, std::vector<TrialOutcome>> by_variant;
    std::map<std::string, ldl::TrialReport> summary;
    for (char v : variants) {
      auto outcomes = run_trials(ds, o, v);
      if (count_failures(outcomes) == o.trials) exit_code = 1;
      by_variant[std::string(1, v)] = std::move(outcomes);
    }

    // shared-geometry contract: same seed means same clustering artifacts
    for (int t = 0; t < o.trials; ++t) {
      const auto& ref = by_variant.at("A")[t];
      for (char v : variants) {
        const auto& oc = by_variant.at(std::string(1, v))[t];
        if (ref.ok && oc.ok &&
            oc.manifest.geometry_hash != ref.manifest.geometry_hash)
          throw std::runtime_error("variant geometry diverged on trial " +
                                   std::to_string(t));
      }
    }

    fs::path dir = fs::path(o.out_dir) / ds.name;
    fs::create_directories(dir);
    write_file(dir / "ablation.csv", long_csv(o, by_variant, ds.name));

    for (auto& [v, outcomes] : by_variant) summary[v] = across_trials(outcomes);
    write_file(dir / "summary.csv", summary_csv(o, summary, ds.name));
    std::string comparison = csv_header(o);
    comparison += "dataset,metric,A,B,C,D\n";
    for (int i = 0; i < ldl::MetricVector::kCount; ++i) {
      comparison += ds.name + "," + ldl::MetricVector::names()[i];
      for (char v : variants)
        comparison += "," + ldl::io::fmt(summary.at(std::string(1, v)).mean[i]);
      comparison += "\n";
    }
    write_file(dir / "ablation_comparison.csv", comparison);

    json mj{{"command", "ablate"},
            {"config", options_to_json(o)},
            {"config_hash", config_fingerprint(o)},
            {"dataset", ds.name},
            {"variants", json::object()}};
    for (char v : variants) {
      json arr = json::array();
      for (const auto& oc : by_variant.at(std::string(1, v)))
        arr.push_back(manifest_json(oc));
      mj["variants"][std::string(1, v)] = arr;
    }
    write_file(dir / "manifest.json", mj.dump(2) + "\n");

    for (int i = 0; i < ldl::MetricVector::kCount; ++i) {
      std::cout << "  " << ldl::MetricVector::names()[i] << ":";
      for (char v : variants)
        std::cout << " " << v << "=" << summary.at(std::string(1, v)).mean[i];
      std::cout << "\n";
    }
  }
  return exit_code;
}

int cmd_gridsearch(const Options& o) {
  for (const auto& path : o.datasets) {
    auto ds = ldl::load_dataset(path, format_for(o, path), o.renormalize);
    auto split =
        ldl::split_random(ds.instance_count(), o.split_fraction, o.seed);
    auto train_ds = ds.subset(split.train);

    ldl::TrainConfig cfg = train_config(o, o.seed, o.workers);
    ldl::GridSearchReport report;
    ldl::FusionWeights best =
        ldl::grid_search_fusion(train_ds, cfg, o.grid_step, &report);

    fs::path dir = fs::path(o.out_dir) / ds.name;
    fs::create_directories(dir);
    std::string csv = csv_header(o);
    csv += "lambda,mu,epsilon,val_kl\n";
    for (const auto& pt : report.points)
      csv += ldl::io::fmt(pt.weights.lambda) + "," +
             ldl::io::fmt(pt.weights.mu) + "," +
             ldl::io::fmt(pt.weights.epsilon) + "," + ldl::io::fmt(pt.val_kl) +
             "\n";
    write_file(dir / "grid.csv", csv);

    json wj{{"dataset", ds.name},
            {"config", config_fingerprint(o)},
            {"seed", o.seed},
            {"lambda", best.lambda},
            {"mu", best.mu},
            {"epsilon", best.epsilon}};
    write_file(dir / "weights.json", wj.dump(2) + "\n");
    std::cout << ds.name << ": best weights " << weights_str(best) << "\n";
  }
  return 0;
}

bool metric_higher_is_better(const std::string& metric,
                             const std::vector<std::string>& higher,
                             const std::vector<std::string>& lower) {
  if (std::find(higher.begin(), higher.end(), metric) != higher.end())
    return true;
  if (std::find(lower.begin(), lower.end(), metric) != lower.end())
    return false;
  if (metric == "cosine" || metric == "intersection") return true;
  if (metric == "chebyshev" || metric == "clark" || metric == "canberra" ||
      metric == "kl")
    return false;
  throw std::runtime_error("unknown metric direction for '" + metric +
                           "'; pass --higher or --lower");
}

struct ScoreCell {
  std::string dataset, algorithm, metric;
  double mean;
};

std::vector<ScoreCell> read_summary_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::vector<ScoreCell> cells;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("dataset,", 0) == 0) continue;  // header
    std::istringstream ss(line);
    ScoreCell cell;
    std::string mean_str;
    if (!std::getline(ss, cell.dataset, ',') ||
        !std::getline(ss, cell.algorithm, ',') ||
        !std::getline(ss, cell.metric, ',') || !std::getline(ss, mean_str, ','))
      throw std::runtime_error(path + ": malformed row: " + line);
    cell.mean = std::stod(mean_str);
    cells.push_back(cell);
  }
  return cells;
}

int cmd_stats(const std::vector<std::string>& inputs, const std::string& out,
              double cv, double q_alpha, const std::vector<std::string>& higher,
              const std::vector<std::string>& lower) {
  std::vector<ScoreCell> cells;
  std::string fingerprint_src;
  for (const auto& path : inputs) {
    auto batch = read_summary_csv(path);
    cells.insert(cells.end(), batch.begin(), batch.end());
    std::ifstream raw(path);
    std::stringstream ss;
    ss << raw.rdbuf();
    fingerprint_src += ss.str();
  }
  if (cells.empty()) throw std::runtime_error("no score rows found");
  char input_hash[20];
  std::snprintf(input_hash, sizeof(input_hash), "%016llx",
                static_cast<unsigned long long>(
                    ldl::io::fnv1a(fingerprint_src)));

  std::set<std::string> metric_set, dataset_set, algorithm_set;
  for (const auto& c : cells) {
    metric_set.insert(c.metric);
    dataset_set.insert(c.dataset);
    algorithm_set.insert(c.algorithm);
  }
  std::vector<std::string> datasets(dataset_set.begin(), dataset_set.end());
  std::vector<std::string> algorithms(algorithm_set.begin(),
                                      algorithm_set.end());
  const int N = static_cast<int>(datasets.size());
  const int s = static_cast<int>(algorithms.size());

  json out_json{{"inputs_hash", input_hash}};
  std::string csv = std::string("# inputs=") + input_hash + "\n" +
                    "metric,algorithm,avg_rank\n";
  for (const auto& metric : metric_set) {
    Eigen::MatrixXd scores(N, s);
    scores.setConstant(std::numeric_limits<double>::quiet_NaN());
    for (const auto& c : cells) {
      if (c.metric != metric) continue;
      auto di = std::find(datasets.begin(), datasets.end(), c.dataset);
      auto ai = std::find(algorithms.begin(), algorithms.end(), c.algorithm);
      scores(di - datasets.begin(), ai - algorithms.begin()) = c.mean;
    }
    if (!scores.allFinite())
      throw std::runtime_error("metric '" + metric +
                               "': incomplete score table (missing cells)");

    bool higher_better = metric_higher_is_better(metric, higher, lower);
    auto table = ldl::rank(scores, higher_better);
    auto fr = ldl::friedman(table);
    double q = q_alpha > 0.0 ? q_alpha : ldl::nemenyi_q_alpha_05(s);
    double cd = ldl::nemenyi_cd(s, N, q);
    auto diagram = ldl::cd_diagram_data(table, cd);

    json groups = json::array();
    for (const auto& g : diagram.groups) {
      json names = json::array();
      for (int idx : g) names.push_back(algorithms[idx]);
      groups.push_back(names);
    }
    json ranks = json::object();
    for (int a = 0; a < s; ++a) ranks[algorithms[a]] = table.avg_ranks[a];
    json entry{{"avg_ranks", ranks}, {"chi_sq", fr.chi_sq},
               {"saturated", fr.saturated}, {"cd", cd},
               {"q_alpha", q},           {"groups", groups},
               {"s", s},                 {"N", N}};
    if (!fr.saturated) entry["f_f"] = fr.f_f;
    if (cv > 0.0) {
      entry["critical_value"] = cv;
      if (!fr.saturated) entry["rejects_null"] = fr.f_f > cv;
    }
    out_json[metric] = entry;

    for (int a = 0; a < s; ++a)
      csv += metric + "," + algorithms[a] + "," +
             ldl::io::fmt(table.avg_ranks[a]) + "\n";

    std::cout << metric << ": ";
    if (fr.saturated)
      std::cout << "F_F saturated (perfect consistency)";
    else
      std::cout << "F_F=" << fr.f_f;
    std::cout << " CD=" << cd << "\n";
  }

  fs::create_directories(out);
  write_file(fs::path(out) / "stats.json", out_json.dump(2) + "\n");
  write_file(fs::path(out) / "stats.csv", csv);
  return 0;
}

int cmd_convert(const std::string& in, const std::string& in_format,
                const std::string& out, const std::string& out_format,
                bool renorm, const std::string& name) {
  auto parse = [](const std::string& f) {
    if (f == "canonical") return ldl::DatasetFormat::kCanonicalText;
    if (f == "csv") return ldl::DatasetFormat::kCsv;
    throw CLI::ValidationError("format", "expected canonical|csv");
  };
  auto ds = ldl::load_dataset(in, parse(in_format), renorm);
  if (!name.empty()) ds.name = name;
  ldl::save_dataset(ds, out, parse(out_format));
  std::cout << "wrote " << out << " (n=" << ds.instance_count()
            << " m=" << ds.feature_count() << " p=" << ds.label_count()
            << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LDL-LIFT-SAP benchmark harness"};
  app.require_subcommand(1);

  Options run_opts, ablate_opts, grid_opts;
  std::string run_config, ablate_config, grid_config;

  auto* run = app.add_subcommand("run", "repeated train/test trials");
  add_common_flags(run, run_opts, run_config);
  run->add_option("--trials", run_opts.trials, "trial count");
  run->add_option("--split-fraction", run_opts.split_fraction,
                  "training share per trial");
  run->add_option("--variant", run_opts.variant, "fusion variant A|B|C|D");
  run->add_flag("--save-models", run_opts.save_models,
                "persist serialized pipelines per trial");

  auto* ablate = app.add_subcommand("ablate", "variants A-D, shared seeds");
  add_common_flags(ablate, ablate_opts, ablate_config);
  ablate->add_option("--trials", ablate_opts.trials, "trial count");
  ablate->add_option("--split-fraction", ablate_opts.split_fraction,
                     "training share per trial");

  auto* grid = app.add_subcommand("gridsearch", "fusion-weight grid search");
  add_common_flags(grid, grid_opts, grid_config);
  grid->add_option("--split-fraction", grid_opts.split_fraction,
                   "training share");

  auto* stats = app.add_subcommand("stats", "Friedman test and CD diagram");
  std::vector<std::string> stats_inputs, stats_higher, stats_lower;
  std::string stats_out = "out/stats";
  double stats_cv = 0.0, stats_q = 0.0;
  stats->add_option("--scores", stats_inputs, "summary.csv files")->required();
  stats->add_option("--out", stats_out, "output directory");
  stats->add_option("--cv", stats_cv, "Friedman critical value to compare");
  stats->add_option("--q", stats_q,
                    "Nemenyi q_alpha (default: built-in 0.05 table)");
  stats->add_option("--higher", stats_higher, "metrics where higher is better");
  stats->add_option("--lower", stats_lower, "metrics where lower is better");

  auto* convert = app.add_subcommand("convert", "dataset format conversion");
  std::string conv_in, conv_out, conv_name;
  std::string conv_in_format = "canonical", conv_out_format = "csv";
  bool conv_renorm = false;
  convert->add_option("--in", conv_in)->required();
  convert->add_option("--in-format", conv_in_format, "canonical|csv");
  convert->add_option("--out", conv_out)->required();
  convert->add_option("--out-format", conv_out_format, "canonical|csv");
  convert->add_flag("--renormalize", conv_renorm);
  convert->add_option("--name", conv_name, "dataset name override");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (!run_config.empty()) merge_config_file(run_config, run, run_opts);
      if (run_opts.datasets.empty())
        throw CLI::ValidationError("--dataset", "no datasets given");
      return cmd_run(run_opts);
    }
    if (ablate->parsed()) {
      if (!ablate_config.empty())
        merge_config_file(ablate_config, ablate, ablate_opts);
      if (ablate_opts.datasets.empty())
        throw CLI::ValidationError("--dataset", "no datasets given");
      return cmd_ablate(ablate_opts);
    }
    if (grid->parsed()) {
      if (!grid_config.empty()) merge_config_file(grid_config, grid, grid_opts);
      if (grid_opts.datasets.empty())
        throw CLI::ValidationError("--dataset", "no datasets given");
      return cmd_gridsearch(grid_opts);
    }
    if (stats->parsed())
      return cmd_stats(stats_inputs, stats_out, stats_cv, stats_q, stats_higher,
                       stats_lower);
    if (convert->parsed())
      return cmd_convert(conv_in, conv_in_format, conv_out, conv_out_format,
                         conv_renorm, conv_name);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "[ldlbench] error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
