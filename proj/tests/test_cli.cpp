// Integration tests driving the ldlbench binary end to end.
#include <doctest.h>

#include <json.hpp>

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "ldl/dataset.hpp"
#include "ldl/rng.hpp"
#include "synthetic.hpp"

namespace {

std::string bench() { return LDLBENCH_PATH; }

int run_cmd(const std::string& args) {
  const std::string cmd = bench() + " " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str());
}

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  REQUIRE(is.good());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct Workspace {
  std::string dir;
  explicit Workspace(const std::string& name) {
    dir = "/tmp/ldlbench_test_" + name + "_" + std::to_string(::getpid());
    if (std::system(("rm -rf " + dir + " && mkdir -p " + dir).c_str()) != 0)
      FAIL("cannot create workspace ", dir);
  }
  ~Workspace() {
    if (std::system(("rm -rf " + dir).c_str()) != 0)
      std::cerr << "workspace cleanup failed: " << dir << "\n";
  }
  std::string path(const std::string& rel) const { return dir + "/" + rel; }
};

std::string make_dataset(const Workspace& ws, int n, int seed) {
  ldl::rng::Engine eng(seed);
  auto ds = synthetic::linear_softmax(n, 3, 3, eng);
  std::string path = ws.path("data.txt");
  ldl::save_dataset(ds, path, ldl::DatasetFormat::kCanonicalText);
  return path;
}

}  // namespace

TEST_CASE("run produces the full report set on a small dataset") {
  Workspace ws("run");
  std::string data = make_dataset(ws, 50, 1);
  int rc = run_cmd("run --dataset " + data +
                   " --trials 1 --seed 5 --weights "
                   "0.5,0.25,0.25 --out " +
                   ws.path("out"));
  REQUIRE(rc == 0);

  std::string summary = slurp(ws.path("out/data/summary.csv"));
  for (const char* metric :
       {"chebyshev", "clark", "canberra", "kl", "cosine", "intersection"})
    CHECK(summary.find(metric) != std::string::npos);
  CHECK(summary.find("# config=") == 0);

  std::string trials = slurp(ws.path("out/data/trials.csv"));
  CHECK(trials.find("dataset,algorithm,metric,trial,value") !=
        std::string::npos);

  auto manifest =
      nlohmann::json::parse(slurp(ws.path("out/data/manifest.json")));
  CHECK(manifest["trials"].size() == 1);
  CHECK(manifest["trials"][0]["ok"] == true);
  CHECK(manifest["config_hash"].is_string());
}

TEST_CASE("identical config and seed reproduce outputs byte for byte") {
  Workspace ws("determinism");
  std::string data = make_dataset(ws, 60, 2);
  std::string common = "run --dataset " + data +
                       " --trials 2 --seed 9 --weights 0.4,0.3,0.3 ";
  REQUIRE(run_cmd(common + "--workers 1 --out " + ws.path("a")) == 0);
  REQUIRE(run_cmd(common + "--workers 1 --out " + ws.path("b")) == 0);
  CHECK(slurp(ws.path("a/data/trials.csv")) ==
        slurp(ws.path("b/data/trials.csv")));
  CHECK(slurp(ws.path("a/data/summary.csv")) ==
        slurp(ws.path("b/data/summary.csv")));

  // worker count must not leak into results
  REQUIRE(run_cmd(common + "--workers 4 --out " + ws.path("c")) == 0);
  CHECK(slurp(ws.path("a/data/trials.csv")) ==
        slurp(ws.path("c/data/trials.csv")));
}

TEST_CASE("summary aggregates trial means with population deviation") {
  Workspace ws("aggregate");
  std::string data = make_dataset(ws, 60, 7);
  REQUIRE(run_cmd("run --dataset " + data +
                  " --trials 3 --seed 4 --weights 0.4,0.3,0.3 --out " +
                  ws.path("out")) == 0);

  // recompute the across-trial mean/std for one metric from trials.csv
  std::istringstream trials(slurp(ws.path("out/data/trials.csv")));
  std::vector<double> kl_values;
  std::string line;
  while (std::getline(trials, line)) {
    if (line.find(",kl,") == std::string::npos) continue;
    kl_values.push_back(std::stod(line.substr(line.rfind(',') + 1)));
  }
  REQUIRE(kl_values.size() == 3);
  double mean = 0.0, sq = 0.0;
  for (double v : kl_values) {
    mean += v / 3.0;
    sq += v * v / 3.0;
  }
  double stddev = std::sqrt(std::max(0.0, sq - mean * mean));

  std::istringstream summary(slurp(ws.path("out/data/summary.csv")));
  bool found = false;
  while (std::getline(summary, line)) {
    if (line.find(",kl,") == std::string::npos) continue;
    auto second_last = line.rfind(',', line.rfind(',') - 1);
    double csv_mean = std::stod(line.substr(second_last + 1));
    double csv_std = std::stod(line.substr(line.rfind(',') + 1));
    CHECK(csv_mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(csv_std == doctest::Approx(stddev).epsilon(1e-12));
    found = true;
  }
  CHECK(found);
}

TEST_CASE("ablation variants share clustering geometry per trial") {
  Workspace ws("ablate");
  std::string data = make_dataset(ws, 140, 3);
  int rc = run_cmd("ablate --dataset " + data +
                   " --trials 2 --seed 11 --grid-step 0.5 --workers 4 --out " +
                   ws.path("out"));
  REQUIRE(rc == 0);

  auto manifest =
      nlohmann::json::parse(slurp(ws.path("out/data/manifest.json")));
  for (int t = 0; t < 2; ++t) {
    std::string ref = manifest["variants"]["A"][t]["geometry_hash"];
    for (const char* v : {"B", "C", "D"})
      CHECK(manifest["variants"][v][t]["geometry_hash"] == ref);
  }
  // variant A is pure LIFT weights
  CHECK(manifest["variants"]["A"][0]["weights"] == "1,0,0");

  std::string comparison = slurp(ws.path("out/data/ablation_comparison.csv"));
  CHECK(comparison.find("dataset,metric,A,B,C,D") != std::string::npos);
  int lines = 0;
  for (char c : comparison)
    if (c == '\n') ++lines;
  CHECK(lines == 2 + 6);  // comment + header + six metrics
}

TEST_CASE("gridsearch emits the lattice and chosen weights") {
  Workspace ws("grid");
  std::string data = make_dataset(ws, 60, 4);
  REQUIRE(run_cmd("gridsearch --dataset " + data +
                  " --seed 3 --grid-step 0.5 --workers 2 --out " +
                  ws.path("out")) == 0);
  std::string grid = slurp(ws.path("out/data/grid.csv"));
  int rows = 0;
  for (char c : grid)
    if (c == '\n') ++rows;
  CHECK(rows == 2 + 6);  // comment + header + C(4,2) lattice points
  auto weights = nlohmann::json::parse(slurp(ws.path("out/data/weights.json")));
  double sum = weights["lambda"].get<double>() + weights["mu"].get<double>() +
               weights["epsilon"].get<double>();
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("stats reproduces the toy Friedman table through the CLI") {
  Workspace ws("stats");
  std::ofstream scores(ws.path("scores.csv"));
  scores << "dataset,algorithm,metric,mean,std\n";
  const double table[3][3] = {
      {0.1, 0.2, 0.3}, {0.2, 0.1, 0.3}, {0.1, 0.2, 0.3}};
  for (int d = 0; d < 3; ++d)
    for (int a = 0; a < 3; ++a)
      scores << "d" << d << ",alg" << a << ",kl," << table[d][a] << ",0\n";
  scores.close();

  REQUIRE(run_cmd("stats --scores " + ws.path("scores.csv") +
                  " --cv 2.1 --out " + ws.path("out")) == 0);
  auto stats = nlohmann::json::parse(slurp(ws.path("out/stats.json")));
  CHECK(stats["kl"]["f_f"].get<double>() == doctest::Approx(7.0).epsilon(1e-4));
  CHECK(stats["kl"]["chi_sq"].get<double>() ==
        doctest::Approx(4.6667).epsilon(1e-4));
  CHECK(stats["kl"]["rejects_null"] == true);

  // incomplete tables are an error
  std::ofstream bad(ws.path("bad.csv"));
  bad << "dataset,algorithm,metric,mean,std\nd0,alg0,kl,0.1,0\n"
      << "d1,alg1,kl,0.2,0\n";
  bad.close();
  CHECK(run_cmd("stats --scores " + ws.path("bad.csv") + " --out " +
                ws.path("out2")) != 0);
}

TEST_CASE("ablation summaries feed the stats command end to end") {
  Workspace ws("journey");
  ldl::rng::Engine eng(71);
  for (int d = 0; d < 2; ++d) {
    auto ds = synthetic::linear_softmax(120, 3, 3, eng);
    ds.name = "set" + std::to_string(d);
    ldl::save_dataset(ds, ws.path(ds.name + ".txt"),
                      ldl::DatasetFormat::kCanonicalText);
    REQUIRE(run_cmd("ablate --dataset " + ws.path(ds.name + ".txt") +
                    " --trials 1 --seed 3 --grid-step 0.5 --workers 2 --out " +
                    ws.path("out")) == 0);
  }
  REQUIRE(run_cmd("stats --scores " + ws.path("out/set0/summary.csv") + " " +
                  ws.path("out/set1/summary.csv") + " --out " +
                  ws.path("stats")) == 0);
  auto stats = nlohmann::json::parse(slurp(ws.path("stats/stats.json")));
  for (const char* metric : {"chebyshev", "clark", "canberra", "kl", "cosine",
                             "intersection"}) {
    REQUIRE(stats.contains(metric));
    CHECK(stats[metric]["s"] == 4);  // the four variants
    CHECK(stats[metric]["N"] == 2);
  }
}

TEST_CASE("convert round-trips between the two formats") {
  Workspace ws("convert");
  std::string data = make_dataset(ws, 20, 5);
  REQUIRE(run_cmd("convert --in " + data + " --in-format canonical --out " +
                  ws.path("d.csv") + " --out-format csv") == 0);
  REQUIRE(run_cmd("convert --in " + ws.path("d.csv") +
                  " --in-format csv --out " + ws.path("d2.txt") +
                  " --out-format canonical") == 0);
  auto a = ldl::load_dataset(data, ldl::DatasetFormat::kCanonicalText);
  auto b =
      ldl::load_dataset(ws.path("d2.txt"), ldl::DatasetFormat::kCanonicalText);
  CHECK(a.features == b.features);
  CHECK(a.distributions == b.distributions);
}

TEST_CASE("config file supplies defaults and flags override it") {
  Workspace ws("config");
  std::string data = make_dataset(ws, 50, 6);
  std::ofstream cfg(ws.path("cfg.json"));
  cfg << nlohmann::json{{"datasets", {data}},
                        {"trials", 1},
                        {"seed", 21},
                        {"weights", "0.5,0.5,0"},
                        {"out", ws.path("out")}}
             .dump();
  cfg.close();

  REQUIRE(run_cmd("run --config " + ws.path("cfg.json")) == 0);
  auto manifest =
      nlohmann::json::parse(slurp(ws.path("out/data/manifest.json")));
  CHECK(manifest["config"]["seed"] == 21);
  CHECK(manifest["trials"].size() == 1);

  // flag beats file
  REQUIRE(run_cmd("run --config " + ws.path("cfg.json") + " --seed 99 --out " +
                  ws.path("out2")) == 0);
  auto manifest2 =
      nlohmann::json::parse(slurp(ws.path("out2/data/manifest.json")));
  CHECK(manifest2["config"]["seed"] == 99);
}

TEST_CASE("a failing dataset aborts with a nonzero exit") {
  Workspace ws("fail");
  CHECK(run_cmd("run --dataset " + ws.path("missing.txt") + " --trials 1") !=
        0);
}
