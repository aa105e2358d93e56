#include "defectmc/run.hpp"
#include "test_support.hpp"

#include <json.hpp>
#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

namespace defectmc {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

int run_text(const fs::path& dir, const std::string& text, const RunOverrides& overrides = {}) {
  const auto path = dir / "run.json";
  std::ofstream(path) << text;
  std::ostringstream log;
  std::ostringstream err;
  return run_config_file(path.string(), overrides, log, err);
}

TEST(Run, ExhaustiveGrapheneClosesToOne) {
  testing::TempDir dir("defectmc-run");
  const auto out = dir.path() / "out";
  ASSERT_EQ(run_text(dir.path(), R"({"mode": "exhaustive", "p_vac": 0.5, "exhaustive": {"n": 1, "q": 8},
                                     "energy_grid": {"points": 512}, "output": ")" + out.string() + "\"}"),
            kExitOk);
  const auto rows = read_csv(out / "idos.csv");
  ASSERT_EQ(rows.size(), 513u);
  EXPECT_EQ(slurp(out / "idos.csv").substr(0, 38), "energy_eV,idos_mean,idos_variance,dos\n");
  EXPECT_NEAR(std::stod(rows.back()[1]), 1.0, 1e-12);
  EXPECT_EQ(std::stod(rows[1][1]), 0.0);

  std::ifstream levels(out / "levels.jsonl");
  std::string line;
  ASSERT_TRUE(std::getline(levels, line));
  const auto record = json::parse(line);
  for (const char* key : {"level", "n", "q", "nsamples", "mean_level_variance", "wall_time_s", "cache_hits"})
    EXPECT_TRUE(record.contains(key)) << key;
  EXPECT_EQ(record["nsamples"], 4);

  const auto summary = json::parse(slurp(out / "summary.json"));
  EXPECT_EQ(summary["mode"], "exhaustive");
  EXPECT_EQ(summary["config"]["p_vac"], 0.5);
  EXPECT_TRUE(summary.contains("total_wall_time_s"));
  EXPECT_TRUE(summary.contains("master_seed"));
  EXPECT_TRUE(fs::exists(out / "unperturbed.csv"));
}

TEST(Run, BandsReproduceTwoBandDispersion) {
  testing::TempDir dir("defectmc-run");
  const auto out = dir.path() / "bands";
  ASSERT_EQ(run_text(dir.path(), R"({"mode": "bands", "bands": {"n": 1, "q": 6}, "output": ")" + out.string() + "\"}"),
            kExitOk);
  const auto rows = read_csv(out / "bands.csv");
  ASSERT_EQ(rows.size(), 1u + 36u * 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"kx", "ky", "band", "energy"}));
  const GrapheneNNModel params;
  const auto lattice = LatticeSpec::honeycomb();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const Vec2 k(std::stod(rows[r][0]), std::stod(rows[r][1]));
    const auto [lo, hi] = testing::two_band(params, lattice, k);
    EXPECT_NEAR(std::stod(rows[r][3]), rows[r][2] == "0" ? lo : hi, 1e-10);
  }
}

TEST(Run, MlmcWithComparisonAndAllocation) {
  testing::TempDir dir("defectmc-run");
  const auto out = dir.path() / "mlmc";
  ASSERT_EQ(run_text(dir.path(), R"({"mode": "mlmc", "p_vac": 0.1, "levels": {"count": 2, "nq": 8, "samples": [8, 4]},
      "energy_grid": {"points": 600}, "slmc_samples": 4, "energy_window": [-6, 4], "dos_step": 0.05,
      "allocation": {"tol": 0.01, "theta": 0.5}, "complexity": {"W": 1.5, "S": 2, "D": 3, "C": 4},
      "output": ")" + out.string() + "\"}"),
            kExitOk);
  std::ifstream levels(out / "levels.jsonl");
  int count = 0;
  for (std::string line; std::getline(levels, line);) ++count;
  EXPECT_EQ(count, 2);
  const auto summary = json::parse(slurp(out / "summary.json"));
  EXPECT_EQ(summary["complexity"]["fixed_samples"], 4.0);
  EXPECT_NEAR(summary["theta"].get<double>(), 3.0 / 7.0, 1e-15);
  EXPECT_EQ(summary["allocation"]["samples"].size(), 2u);
  EXPECT_GT(summary["slmc_comparison"]["work_ratio"].get<double>(), 0.0);
  // the grid step divides the DoS stencil exactly
  const double step = summary["energy_grid"]["step"];
  EXPECT_NEAR(0.05 / step, std::round(0.05 / step), 1e-9);
  const auto rows = read_csv(out / "variance.csv");
  EXPECT_EQ(rows[0], (std::vector<std::string>{"energy_eV", "mlmc_variance", "slmc_variance", "slmc_rescaled"}));
}

TEST(Run, RatesMode) {
  testing::TempDir dir("defectmc-run");
  const auto out = dir.path() / "rates";
  ASSERT_EQ(run_text(dir.path(), R"({"mode": "rates", "p_vac": 0.1, "rates": {"sizes": [1, 2, 4], "nq": 8, "samples": 20},
      "energy_grid": {"points": 400}, "smoothing": {"delta": 0.1}, "output": ")" + out.string() + "\"}"),
            kExitOk);
  const auto summary = json::parse(slurp(out / "summary.json"));
  EXPECT_TRUE(summary["rates"]["S"]["value"].is_number());
  EXPECT_TRUE(summary["rates"]["D"]["value"].is_number());
  EXPECT_TRUE(summary["rates"]["C"]["value"].is_number());
  EXPECT_EQ(summary["rates"]["D"]["points"], 2);
}

TEST(Run, WorkerCountDoesNotChangeIdos) {
  testing::TempDir dir("defectmc-run");
  std::vector<std::string> files;
  for (int workers : {1, 4, 8}) {
    const auto out = dir.path() / ("w" + std::to_string(workers));
    RunOverrides o;
    o.workers = workers;
    o.output = out.string();
    ASSERT_EQ(run_text(dir.path(), R"({"mode": "mlmc", "p_vac": 0.1, "seed": 5,
        "levels": {"count": 2, "nq": 8, "samples": [20, 10]}, "energy_grid": {"points": 300}})",
                       o),
              kExitOk);
    files.push_back(slurp(out / "idos.csv"));
  }
  EXPECT_EQ(files[0], files[1]);
  EXPECT_EQ(files[0], files[2]);
}

TEST(Run, SeedOverrideChangesResult) {
  testing::TempDir dir("defectmc-run");
  const std::string text = R"({"mode": "mc", "p_vac": 0.2, "mc": {"n": 2, "q": 2, "samples": 10},
                               "energy_grid": {"points": 100}})";
  RunOverrides a;
  a.output = (dir.path() / "a").string();
  a.seed = 1;
  RunOverrides b = a;
  b.output = (dir.path() / "b").string();
  b.seed = 2;
  ASSERT_EQ(run_text(dir.path(), text, a), kExitOk);
  ASSERT_EQ(run_text(dir.path(), text, b), kExitOk);
  EXPECT_NE(slurp(dir.path() / "a" / "idos.csv"), slurp(dir.path() / "b" / "idos.csv"));
  EXPECT_EQ(json::parse(slurp(dir.path() / "b" / "summary.json"))["master_seed"], 2);
}

TEST(Run, ConfigErrorRecord) {
  testing::TempDir dir("defectmc-run");
  const auto path = dir.path() / "bad.json";
  std::ofstream(path) << R"({"p_vac": 0.1, "bogus": 1})";
  std::ostringstream log;
  std::ostringstream err;
  RunOverrides o;
  o.output = (dir.path() / "out").string();
  EXPECT_EQ(run_config_file(path.string(), o, log, err), kExitConfig);
  const auto record = json::parse(err.str());
  EXPECT_EQ(record["status"], "error");
  EXPECT_EQ(record["kind"], "config");
  EXPECT_NE(record["message"].get<std::string>().find("bogus"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir.path() / "out" / "error.json"));
}

TEST(Run, NumericalErrorRecord) {
  testing::TempDir dir("defectmc-run");
  // One orbital per site with an overlap that is indefinite at Gamma.
  std::ofstream(dir.path() / "bad.tb") << "defectmc-couplings 1\norbitals A s\norbitals B s\nremovable A B\n"
                                          "hopping\n0 0 A s B s -1 0\n0 0 B s A s -1 0\n"
                                          "overlap\n0 0 A s B s 2 0\n0 0 B s A s 2 0\n";
  std::ostringstream log;
  std::ostringstream err;
  const auto path = dir.path() / "run.json";
  std::ofstream(path) << R"({"mode": "mc", "material": {"kind": "multi_orbital", "couplings": "bad.tb"},
      "energy_grid": {"points": 50, "min": -5, "max": 5}, "mc": {"n": 1, "q": 1, "samples": 2}})";
  RunOverrides o;
  o.output = (dir.path() / "out").string();
  EXPECT_EQ(run_config_file(path.string(), o, log, err), kExitNumerical);
  const auto record = json::parse(err.str());
  EXPECT_EQ(record["kind"], "numerical");
  EXPECT_EQ(record["task"], "(level 1, replicate 0)");
  EXPECT_NE(record["message"].get<std::string>().find("positive definite"), std::string::npos);
}


} // namespace
} // namespace defectmc
