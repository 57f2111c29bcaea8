#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fnc/calibration.hpp"
#include "fnc/io.hpp"

namespace {

namespace fs = std::filesystem;

const fs::path kScratch = fs::temp_directory_path() / "fnc_cli_scratch";

int run_cli(const std::string& args) {
  const std::string command = std::string(FNC_CLI_PATH) + " " + args + " > " +
                              (kScratch / "stdout.txt").string() + " 2> " +
                              (kScratch / "stderr.txt").string();
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void write(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

struct ScratchDir {
  ScratchDir() {
    fs::remove_all(kScratch);
    fs::create_directories(kScratch);
  }
};

}  // namespace

TEST_CASE("screen worked example selects two variables") {
  ScratchDir scratch;
  const fs::path input = kScratch / "stats.csv";
  write(input, "id,p\na,0.001\nb,0.01\nc,0.2\nd,0.5\ne,0.9\n");
  const fs::path out = kScratch / "selection.csv";
  const int code =
      run_cli("screen " + input.string() + " --out " + out.string() + " --beta 0.5 --s 2");
  CHECK(code == 0);

  const auto summary = nlohmann::json::parse(slurp(out.string() + ".summary.json"));
  CHECK(summary.at("k") == 2);
  CHECK(summary.at("s_used") == 2);

  const std::string csv = slurp(out);
  CHECK(csv.find("id,rank,p,selected,fnp_hat_at_rank") == 0);
  CHECK(csv.find("a,1,0.001,1,") != std::string::npos);
  CHECK(csv.find("b,2,0.01,1,") != std::string::npos);
  CHECK(csv.find("c,3,0.2,0,") != std::string::npos);

  // manifest exists and records the command
  const auto manifest = nlohmann::json::parse(slurp(out.string() + ".manifest.json"));
  CHECK(manifest.at("command") == "screen");
  CHECK(manifest.at("inputs").size() == 1);
}

TEST_CASE("screen rejects an out-of-range beta") {
  ScratchDir scratch;
  const fs::path input = kScratch / "stats.csv";
  write(input, "id,p\na,0.001\nb,0.01\n");
  const int code = run_cli("screen " + input.string() + " --out " +
                           (kScratch / "x.csv").string() + " --beta 1.5 --s 1");
  CHECK(code == 1);
  CHECK(slurp(kScratch / "stderr.txt").find("(0, 1)") != std::string::npos);
}

TEST_CASE("screen refuses undetectable input with exit code 2") {
  ScratchDir scratch;
  const std::size_t m = 400;
  std::ostringstream stats;
  stats << "id,p\n";
  for (std::size_t j = 1; j <= m; ++j) {
    stats << "v" << j << "," << static_cast<double>(j) / (m + 1) << "\n";
  }
  const fs::path input = kScratch / "uniform.csv";
  write(input, stats.str());

  // matching uniform null ensemble
  const auto ensemble =
      fnc::simulate_null_ensemble(fnc::CovarianceModel{m, fnc::ArModel{0.0}}, 200, 5);
  const fs::path ensemble_path = kScratch / "ensemble.csv";
  write(ensemble_path, fnc::ensemble_csv(ensemble));

  const int code = run_cli("screen " + input.string() + " --out " +
                           (kScratch / "sel.csv").string() + " --beta 0.1 --s estimate" +
                           " --null-ensemble " + ensemble_path.string());
  CHECK(code == 2);
  const auto summary =
      nlohmann::json::parse(slurp((kScratch / "sel.csv").string() + ".summary.json"));
  CHECK(summary.at("refused") == true);
  CHECK(summary.at("pi_hat") == 0.0);
}

TEST_CASE("screen estimate with manual bounding constants") {
  ScratchDir scratch;
  const fs::path input = kScratch / "stats.csv";
  std::ostringstream stats;
  stats << "id,p\n";
  for (int j = 0; j < 30; ++j) stats << "s" << j << "," << 1e-8 * (j + 1) << "\n";
  for (int j = 0; j < 170; ++j) stats << "n" << j << "," << 0.005 * (j + 1) << "\n";
  write(input, stats.str());
  const int code = run_cli("screen " + input.string() + " --out " +
                           (kScratch / "sel.csv").string() +
                           " --beta 0.2 --s estimate --c-half 0.1 --c-one 1.0");
  CHECK(code == 0);
  const auto summary =
      nlohmann::json::parse(slurp((kScratch / "sel.csv").string() + ".summary.json"));
  CHECK(summary.at("s_hat").get<int>() > 10);
}

TEST_CASE("screen exits 1 on malformed input naming the line") {
  ScratchDir scratch;
  const fs::path input = kScratch / "broken.csv";
  write(input, "id,p\na,0.01\nb,zero point two\n");
  const int code = run_cli("screen " + input.string() + " --out " +
                           (kScratch / "x.csv").string() + " --beta 0.1 --s 1");
  CHECK(code == 1);
  CHECK(slurp(kScratch / "stderr.txt").find("line 3") != std::string::npos);
}

TEST_CASE("calibrate from a model is deterministic per seed") {
  ScratchDir scratch;
  const std::string args = "calibrate --model ar:0.2 --m 300 --n-sets 60 --seed 7 --out ";
  CHECK(run_cli(args + (kScratch / "c1.json").string()) == 0);
  CHECK(run_cli(args + (kScratch / "c2.json").string()) == 0);
  CHECK(slurp(kScratch / "c1.json") == slurp(kScratch / "c2.json"));

  const auto bounds = nlohmann::json::parse(slurp(kScratch / "c1.json"));
  CHECK(bounds.at("m") == 300);
  CHECK(bounds.at("n_sets") == 60);
  CHECK(bounds.at("seed") == 7);
  const double level = bounds.at("quantile_level").get<double>();
  CHECK(level == doctest::Approx(1.0 - 1.0 / std::sqrt(std::log(300.0))).epsilon(1e-12));
}

TEST_CASE("calibrate from an ensemble of identical rows returns that row's V") {
  ScratchDir scratch;
  fnc::NullEnsemble ensemble;
  ensemble.pvalue_sets.assign(5, {0.12, 0.34, 0.56, 0.78, 0.9});
  const fs::path path = kScratch / "ens.csv";
  write(path, fnc::ensemble_csv(ensemble));
  CHECK(run_cli("calibrate --ensemble " + path.string() + " --out " +
                (kScratch / "c.json").string()) == 0);
  const auto bounds = nlohmann::json::parse(slurp(kScratch / "c.json"));
  const auto v = fnc::v_statistics(ensemble.pvalue_sets.front());
  CHECK(bounds.at("c_half").get<double>() == v.v_half);
  CHECK(bounds.at("c_one").get<double>() == v.v_one);
}

TEST_CASE("calibrate wants exactly one source") {
  ScratchDir scratch;
  CHECK(run_cli("calibrate --out " + (kScratch / "c.json").string()) == 1);
  CHECK(run_cli("calibrate --model ar:0.2 --m 100 --ensemble nowhere.csv --out " +
                (kScratch / "c.json").string()) == 1);
}

TEST_CASE("reproduce phase figure and selector validation") {
  ScratchDir scratch;
  CHECK(run_cli("reproduce --figure phase --out-dir " + kScratch.string()) == 0);
  const std::string csv = slurp(kScratch / "figure_phase.csv");
  CHECK(csv.find("eta,gamma,r") == 0);
  // eta = 1 row at gamma = 0.7: r = min(0.7, 0.4)
  CHECK(csv.find("1,0.7,0.4") != std::string::npos);

  CHECK(run_cli("reproduce --table 9 --out-dir " + kScratch.string()) == 1);
  CHECK(slurp(kScratch / "stderr.txt").find("1..5") != std::string::npos);
  CHECK(run_cli("reproduce --figure venn --out-dir " + kScratch.string()) == 1);
  CHECK(run_cli("reproduce --out-dir " + kScratch.string()) == 1);
}

TEST_CASE("reproduce table 1 is fast and matches the calibration table") {
  ScratchDir scratch;
  CHECK(run_cli("reproduce --table 1 --seed 11 --out-dir " + kScratch.string()) == 0);
  const std::string csv = slurp(kScratch / "table1.csv");
  CHECK(csv.find("m,model,eta,mu1,mu2,mu_min") == 0);
  CHECK(csv.find("2000,autoregressive,0.9466") != std::string::npos);
  CHECK(csv.find("2000,block,0.6026") != std::string::npos);
}

TEST_CASE("reproduce table 2 tracks the benchmark screening errors") {
  ScratchDir scratch;
  CHECK(run_cli("reproduce --table 2 --seed 29 --out-dir " + kScratch.string()) == 0);
  const std::string csv = slurp(kScratch / "table2.csv");
  REQUIRE(csv.find("m,A,model,method,level") == 0);
  // parse mean_fnp for the beta = 0.2 screening rows
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);  // header
  struct Target {
    std::string prefix;
    double fnp;
  };
  const std::vector<Target> targets = {{"2000,2,autoregressive,fnc,0.2,", 0.201},
                                       {"2000,2,block,fnc,0.2,", 0.193},
                                       {"2000,3,autoregressive,fnc,0.2,", 0.198},
                                       {"2000,3,block,fnc,0.2,", 0.170}};
  std::size_t matched = 0;
  while (std::getline(lines, line)) {
    for (const auto& target : targets) {
      if (line.rfind(target.prefix, 0) == 0) {
        const std::string rest = line.substr(target.prefix.size());
        const double mean_fnp = std::stod(rest.substr(0, rest.find(',')));
        CHECK(std::fabs(mean_fnp - target.fnp) < 0.05);
        ++matched;
      }
    }
  }
  CHECK(matched == targets.size());
}

TEST_CASE("experiment command runs a config file end to end") {
  ScratchDir scratch;
  nlohmann::json config = {
      {"m", 150},
      {"model", {{"kind", "ar"}, {"lambda", 0.2}}},
      {"sparsity", {{"gamma", 0.3}, {"intensity", 3.0}}},
      {"methods", nlohmann::json::array(
                      {{{"method", "fnc"}, {"level", 0.2}, {"s_source", "known"}},
                       {{"method", "bh"}, {"level", 0.05}}})},
      {"n_reps", 20},
      {"seed", 3}};
  const fs::path path = kScratch / "config.json";
  write(path, config.dump());
  CHECK(run_cli("experiment --config " + path.string() + " --out-dir " +
                kScratch.string()) == 0);
  CHECK(fs::exists(kScratch / "experiment_summary.csv"));
  CHECK(fs::exists(kScratch / "experiment_detail.json"));
  CHECK(fs::exists(kScratch / "experiment_manifest.json"));
  const auto detail =
      nlohmann::json::parse(slurp(kScratch / "experiment_detail.json"));
  CHECK(detail.at("replications").size() == 20);
}

TEST_CASE("experiment command maps decomposition failures to exit 3") {
  ScratchDir scratch;
  nlohmann::json config = {
      {"m", 3},
      {"model",
       {{"kind", "explicit"},
        {"matrix", {1.0, 0.9, 0.9, 0.9, 1.0, -0.9, 0.9, -0.9, 1.0}}}},
      {"sparsity", {{"gamma", 0.3}, {"intensity", 3.0}}},
      {"methods",
       nlohmann::json::array({{{"method", "fnc"}, {"level", 0.2}, {"s_source", "known"}}})},
      {"n_reps", 5},
      {"seed", 3}};
  const fs::path path = kScratch / "config.json";
  write(path, config.dump());
  CHECK(run_cli("experiment --config " + path.string() + " --out-dir " +
                kScratch.string()) == 3);
}

TEST_CASE("twostage command emits summary, detail and histogram") {
  ScratchDir scratch;
  nlohmann::json config = {{"m", 120},
                           {"signal_indices", {0, 10, 20, 30, 40, 50, 60, 70}},
                           {"intensity", 3.5},
                           {"alpha", 0.05},
                           {"beta", 0.1},
                           {"n_reps", 25},
                           {"seed", 12},
                           {"s_source", "known"}};
  const fs::path path = kScratch / "two.json";
  write(path, config.dump());
  CHECK(run_cli("twostage --config " + path.string() + " --out-dir " +
                kScratch.string()) == 0);
  CHECK(fs::exists(kScratch / "twostage_summary.csv"));
  CHECK(fs::exists(kScratch / "twostage_detail.json"));
  CHECK(fs::exists(kScratch / "twostage_stage2_pvalues.csv"));
  const std::string summary = slurp(kScratch / "twostage_summary.csv");
  CHECK(summary.find("procedure,fwer,power") == 0);
  CHECK(summary.find("two_stage,") != std::string::npos);
  CHECK(summary.find("one_stage,") != std::string::npos);
}

TEST_CASE("rerunning with the manifest seed reproduces outputs bit for bit") {
  ScratchDir scratch;
  const fs::path input = kScratch / "stats.csv";
  std::ostringstream stats;
  stats << "id,z\n";
  for (int j = 0; j < 50; ++j) stats << "v" << j << "," << (j % 7) * 0.61 - 1.0 << "\n";
  write(input, stats.str());
  const std::string args = "screen " + input.string() + " --beta 0.3 --s 5 --out ";
  CHECK(run_cli(args + (kScratch / "r1.csv").string()) == 0);
  CHECK(run_cli(args + (kScratch / "r2.csv").string()) == 0);
  CHECK(slurp(kScratch / "r1.csv") == slurp(kScratch / "r2.csv"));
}
