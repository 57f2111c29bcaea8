// Command-line surface for the FNC screening toolkit.
//
// Exit codes: 0 success, 1 usage/format error, 2 no-detectable-signal
// refusal, 3 numeric failure (decomposition).

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fnc/io.hpp"
#include "fnc/normal.hpp"
#include "fnc/proportion.hpp"
#include "fnc/version.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNoSignal = 2;
constexpr int kExitNumeric = 3;

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::uint64_t entropy_seed() {
  std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

void write_manifest(const std::string& path, fnc::RunManifest manifest,
                    double wall_seconds) {
  manifest.version = fnc::kVersion;
  manifest.wall_seconds = wall_seconds;
  fnc::atomic_write_file(path, fnc::to_json(manifest).dump(2) + "\n");
}

struct ScreenOptions {
  std::string input;
  std::string out;
  double beta = 0.1;
  std::string s_spec = "estimate";
  std::string sided = "one";
  std::string scale = "auto";
  std::string ensemble_path;
  double c_half = -1.0;
  double c_one = -1.0;
};

int run_screen(const ScreenOptions& options) {
  Stopwatch watch;
  fnc::RunManifest manifest;
  manifest.command = "screen";

  const fnc::Sidedness sidedness = fnc::sidedness_from_string(options.sided);
  std::optional<fnc::Scale> scale_override;
  if (options.scale != "auto") scale_override = fnc::scale_from_string(options.scale);

  fnc::StatisticVector stats =
      fnc::read_statistics_csv(options.input, scale_override, sidedness);
  manifest.input_digests[options.input] = fnc::file_digest_hex(options.input);
  if (stats.scale == fnc::Scale::raw) {
    throw std::invalid_argument("screen: raw-scale input needs a known null CDF; supply z or p");
  }
  const fnc::StatisticVector pvalues =
      stats.scale == fnc::Scale::p ? stats : fnc::z_to_pvalue(stats);
  const std::size_t m = pvalues.size();

  // Signal count: fixed by the caller or estimated from calibrated bounds.
  std::size_t s = 0;
  fnc::SignalCountSource source = fnc::SignalCountSource::known;
  std::optional<fnc::BoundingSequences> bounds;
  fnc::ProportionEstimate estimate;
  if (options.s_spec == "estimate") {
    source = fnc::SignalCountSource::estimated;
    if (!options.ensemble_path.empty()) {
      const fnc::NullEnsemble ensemble = fnc::read_ensemble_csv(options.ensemble_path);
      manifest.input_digests[options.ensemble_path] =
          fnc::file_digest_hex(options.ensemble_path);
      if (ensemble.m() != m) {
        throw std::invalid_argument("screen: ensemble has m = " +
                                    std::to_string(ensemble.m()) + ", input has m = " +
                                    std::to_string(m));
      }
      bounds = fnc::bounding_sequences(ensemble);
    } else if (options.c_half >= 0.0 && options.c_one >= 0.0) {
      fnc::BoundingSequences manual;
      manual.m = m;
      manual.c_half = options.c_half;
      manual.c_one = options.c_one;
      manual.quantile_level = fnc::calibration_quantile_level(m);
      bounds = manual;
    } else {
      throw std::invalid_argument(
          "screen: --s estimate needs --null-ensemble or both --c-half and --c-one");
    }
    std::vector<double> sorted = pvalues.values;
    std::sort(sorted.begin(), sorted.end());
    estimate = fnc::estimate_proportion(sorted, *bounds);
    s = estimate.s_hat;
  } else {
    if (options.s_spec.empty() ||
        options.s_spec.find_first_not_of("0123456789") != std::string::npos) {
      throw std::invalid_argument("screen: --s expects a positive integer or 'estimate', got '" +
                                  options.s_spec + "'");
    }
    s = static_cast<std::size_t>(std::stoull(options.s_spec));
  }

  json summary;
  summary["m"] = m;
  summary["beta"] = options.beta;
  summary["sidedness"] = fnc::to_string(sidedness);
  if (bounds) {
    summary["c_half"] = bounds->c_half;
    summary["c_one"] = bounds->c_one;
    summary["pi_hat"] = estimate.pi_hat;
    summary["s_hat"] = estimate.s_hat;
  }
  manifest.config = {{"input", options.input},       {"out", options.out},
                     {"beta", options.beta},         {"s", options.s_spec},
                     {"sided", options.sided},       {"scale", options.scale},
                     {"ensemble", options.ensemble_path}};

  if (source == fnc::SignalCountSource::estimated && !estimate.detectable()) {
    summary["k"] = 0;
    summary["refused"] = true;
    fnc::atomic_write_file(options.out + ".summary.json", summary.dump(2) + "\n");
    write_manifest(options.out + ".manifest.json", manifest, watch.seconds());
    std::cerr << "no detectable signal: pi_hat = 0, refusing to screen\n";
    return kExitNoSignal;
  }

  const fnc::SelectionResult result = fnc::fnc_screen(pvalues, s, options.beta, source);

  // Selection CSV, one row per variable in rank order.
  const std::vector<std::size_t> order = fnc::rank_ascending(pvalues.values);
  std::ostringstream csv;
  csv << "id,rank,p,selected,fnp_hat_at_rank\n";
  csv.precision(12);
  for (std::size_t rank = 1; rank <= m; ++rank) {
    const std::size_t index = order[rank - 1];
    const std::string id =
        pvalues.ids.empty() ? "v" + std::to_string(index + 1) : pvalues.ids[index];
    csv << id << "," << rank << "," << pvalues.values[index] << ","
        << (rank <= result.k ? 1 : 0) << ","
        << fnc::fnp_hat(rank, pvalues.values[index], result.s_used, m) << "\n";
  }
  fnc::atomic_write_file(options.out, csv.str());

  summary["k"] = result.k;
  summary["s_used"] = result.s_used;
  summary["s_source"] = source == fnc::SignalCountSource::known ? "known" : "estimated";
  summary["fnp_hat_at_k"] = result.fnp_hat_at_k;
  summary["threshold_z"] = result.threshold_z;
  summary["refused"] = false;
  fnc::atomic_write_file(options.out + ".summary.json", summary.dump(2) + "\n");
  write_manifest(options.out + ".manifest.json", manifest, watch.seconds());
  std::cout << "selected " << result.k << " of " << m << " variables (s_used = "
            << result.s_used << ")\n";
  return kExitOk;
}

struct CalibrateOptions {
  std::string model_spec;
  std::string ensemble_path;
  std::size_t m = 0;
  std::size_t n_sets = 1000;
  std::optional<std::uint64_t> seed;
  std::string sided = "one";
  std::string out;
};

int run_calibrate(const CalibrateOptions& options) {
  Stopwatch watch;
  if (options.model_spec.empty() == options.ensemble_path.empty()) {
    throw std::invalid_argument("calibrate: exactly one of --model and --ensemble");
  }
  fnc::RunManifest manifest;
  manifest.command = "calibrate";

  fnc::BoundingSequences bounds;
  std::uint64_t seed = 0;
  if (!options.model_spec.empty()) {
    if (options.m < 3) {
      throw std::invalid_argument("calibrate: --model needs --m >= 3");
    }
    seed = options.seed ? *options.seed : entropy_seed();
    manifest.seed = seed;
    manifest.seed_from_entropy = !options.seed.has_value();
    const fnc::CovarianceModel model = fnc::parse_model_spec(options.model_spec, options.m);
    bounds = fnc::calibrate_model(model, options.n_sets, seed,
                                  fnc::sidedness_from_string(options.sided));
  } else {
    const fnc::NullEnsemble ensemble = fnc::read_ensemble_csv(options.ensemble_path);
    manifest.input_digests[options.ensemble_path] =
        fnc::file_digest_hex(options.ensemble_path);
    bounds = fnc::bounding_sequences(ensemble);
  }

  json out = fnc::to_json(bounds);
  out["seed"] = seed;
  fnc::atomic_write_file(options.out, out.dump(2) + "\n");
  manifest.config = {{"model", options.model_spec},
                     {"ensemble", options.ensemble_path},
                     {"m", options.m},
                     {"n_sets", options.n_sets},
                     {"sided", options.sided}};
  write_manifest(options.out + ".manifest.json", manifest, watch.seconds());
  std::cout << "c_half = " << bounds.c_half << ", c_one = " << bounds.c_one << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// reproduce: simulation tables and the phase-figure polylines
// ---------------------------------------------------------------------------

fnc::CovarianceModel table_model(const std::string& name, std::size_t m,
                                 std::uint64_t seed) {
  if (name == "autoregressive") return fnc::parse_model_spec("ar:0.2", m);
  if (name == "block") return fnc::parse_model_spec("block:40:0.5", m);
  if (name == "factor") {
    return fnc::parse_model_spec("factor:0.5:" + std::to_string(seed), m);
  }
  throw std::invalid_argument("unknown table model " + name);
}

std::string table1_csv(std::uint64_t seed) {
  std::ostringstream out;
  out << "m,model,eta,mu1,mu2,mu_min\n";
  out.precision(6);
  for (const std::size_t m : {std::size_t{2000}, std::size_t{10000}}) {
    for (const std::string name : {"autoregressive", "block", "factor"}) {
      const fnc::CovarianceModel model = table_model(name, m, seed);
      const double eta = fnc::dependence_eta(model);
      const fnc::MuBounds mu = fnc::mu_bounds(m, 0.3, eta);
      out << m << "," << name << "," << eta << "," << mu.mu1 << "," << mu.mu2 << ","
          << mu.mu_min << "\n";
    }
  }
  return out.str();
}

std::string comparison_table_csv(std::size_t m, std::size_t n_reps, std::uint64_t seed) {
  std::ostringstream out;
  out << "m,A,model,method,level,mean_fnp,sd_fnp,se_fnp,mean_fdp,sd_fdp,se_fdp,n_reps\n";
  out.precision(6);
  std::uint64_t cell = 0;
  for (const double intensity : {2.0, 3.0}) {
    for (const std::string name : {"autoregressive", "block", "factor"}) {
      fnc::ExperimentConfig config;
      config.m = m;
      config.model = table_model(name, m, seed);
      config.sparsity.gamma = 0.3;
      config.sparsity.intensity = intensity;
      config.methods = {{fnc::SelectionMethod::fnc, 0.2, fnc::SignalCountSource::known, 0},
                        {fnc::SelectionMethod::fnc, 0.1, fnc::SignalCountSource::known, 0},
                        {fnc::SelectionMethod::bh, 0.05, fnc::SignalCountSource::known, 0},
                        {fnc::SelectionMethod::bh, 0.2, fnc::SignalCountSource::known, 0}};
      config.n_reps = n_reps;
      config.seed = fnc::mix_seed(seed, ++cell);
      const fnc::ReplicationSummary summary = fnc::run_experiment(config);
      const double root_n = std::sqrt(static_cast<double>(n_reps));
      for (const fnc::MethodSummary& method : summary.methods) {
        out << m << "," << intensity << "," << name << ","
            << fnc::to_string(method.spec.method) << "," << method.spec.level << ","
            << method.mean_fnp << "," << method.sd_fnp << "," << method.sd_fnp / root_n
            << "," << method.mean_fdp << "," << method.sd_fdp << ","
            << method.sd_fdp / root_n << "," << n_reps << "\n";
      }
    }
  }
  return out.str();
}

std::string estimated_s_table_csv(bool vary_intensity, std::size_t n_reps,
                                  std::uint64_t seed) {
  std::ostringstream out;
  out << "A,gamma,method,level,mean_fnp,sd_fnp,se_fnp,mean_fdp,sd_fdp,mean_fm,sd_fm,se_fm,"
         "refusals,n_reps\n";
  out.precision(6);
  const std::size_t m = 2000;
  fnc::CovarianceModel model =
      fnc::parse_model_spec("randblocks:20:10:100:0.5:" + std::to_string(seed), m);
  const fnc::BoundingSequences bounds =
      fnc::calibrate_model(model, 1000, fnc::mix_seed(seed, 0xca1));

  struct Cell {
    double intensity;
    double gamma;
    double beta;
  };
  std::vector<Cell> cells;
  if (vary_intensity) {
    for (const double a : {3.0, 4.0, 5.0}) cells.push_back({a, 0.3, 0.1});
  } else {
    for (const double gamma : {0.3, 0.5}) {
      for (const double beta : {0.1, 0.2}) cells.push_back({5.0, gamma, beta});
    }
  }
  std::uint64_t cell_index = 0;
  for (const Cell& cell : cells) {
    fnc::ExperimentConfig config;
    config.m = m;
    config.model = model;
    config.sparsity.gamma = cell.gamma;
    config.sparsity.intensity = cell.intensity;
    config.methods = {
        {fnc::SelectionMethod::fnc, cell.beta, fnc::SignalCountSource::estimated, 0}};
    config.n_reps = n_reps;
    config.seed = fnc::mix_seed(seed, ++cell_index);
    config.bounds = bounds;
    const fnc::ReplicationSummary summary = fnc::run_experiment(config);
    const fnc::MethodSummary& method = summary.methods.front();
    const double root_n = std::sqrt(static_cast<double>(n_reps));
    out << cell.intensity << "," << cell.gamma << "," << fnc::to_string(method.spec.method)
        << "," << method.spec.level << "," << method.mean_fnp << "," << method.sd_fnp << ","
        << method.sd_fnp / root_n << "," << method.mean_fdp << "," << method.sd_fdp << ","
        << method.mean_fm << "," << method.sd_fm << "," << method.sd_fm / root_n << ","
        << method.refusals << "," << n_reps << "\n";
  }
  return out.str();
}

std::string phase_figure_csv() {
  std::ostringstream out;
  out << "eta,gamma,r\n";
  out.precision(6);
  for (const double eta : {0.2, 0.6, 1.0}) {
    for (const auto& [gamma, r] : fnc::phase_boundary_polyline(eta)) {
      out << eta << "," << gamma << "," << r << "\n";
    }
  }
  return out.str();
}

struct ReproduceOptions {
  int table = 0;
  std::string figure;
  std::string scale = "desk";
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
};

int run_reproduce(const ReproduceOptions& options) {
  Stopwatch watch;
  if ((options.table == 0) == options.figure.empty()) {
    throw std::invalid_argument(
        "reproduce: choose one of --table {1,2,3,4,5} or --figure phase");
  }
  if (options.scale != "desk" && options.scale != "full") {
    throw std::invalid_argument("reproduce: --scale must be desk or full");
  }
  const std::size_t n_reps = options.scale == "desk" ? 100 : 1000;
  const std::uint64_t seed = options.seed ? *options.seed : entropy_seed();

  std::filesystem::create_directories(options.out_dir);
  std::string name;
  std::string content;
  if (!options.figure.empty()) {
    if (options.figure != "phase") {
      throw std::invalid_argument("reproduce: unknown figure '" + options.figure +
                                  "' (valid: phase)");
    }
    name = "figure_phase.csv";
    content = phase_figure_csv();
  } else {
    switch (options.table) {
      case 1: name = "table1.csv"; content = table1_csv(seed); break;
      case 2: name = "table2.csv"; content = comparison_table_csv(2000, n_reps, seed); break;
      case 3: name = "table3.csv"; content = estimated_s_table_csv(true, n_reps, seed); break;
      case 4: name = "table4.csv"; content = estimated_s_table_csv(false, n_reps, seed); break;
      case 5: name = "table5.csv"; content = comparison_table_csv(10000, n_reps, seed); break;
      default:
        throw std::invalid_argument("reproduce: unknown table " +
                                    std::to_string(options.table) + " (valid: 1..5)");
    }
  }
  const std::string path = options.out_dir + "/" + name;
  fnc::atomic_write_file(path, content);

  fnc::RunManifest manifest;
  manifest.command = "reproduce";
  manifest.seed = seed;
  manifest.seed_from_entropy = !options.seed.has_value();
  manifest.config = {{"table", options.table},
                     {"figure", options.figure},
                     {"scale", options.scale},
                     {"out", path}};
  write_manifest(path + ".manifest.json", manifest, watch.seconds());
  std::cout << "wrote " << path << "\n";
  return kExitOk;
}

struct ConfigRunOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
};

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config '" + path + "'");
  json j;
  in >> j;
  return j;
}

int run_experiment_command(const ConfigRunOptions& options) {
  Stopwatch watch;
  json raw = load_json(options.config_path);
  if (options.seed) raw["seed"] = *options.seed;
  const fnc::ExperimentConfig config = fnc::experiment_config_from_json(raw);
  const fnc::ReplicationSummary summary = fnc::run_experiment(config);

  std::filesystem::create_directories(options.out_dir);
  fnc::atomic_write_file(options.out_dir + "/experiment_summary.csv",
                         fnc::replication_summary_csv(summary));
  fnc::atomic_write_file(options.out_dir + "/experiment_detail.json",
                         fnc::replication_summary_json(config, summary).dump(2) + "\n");

  fnc::RunManifest manifest;
  manifest.command = "experiment";
  manifest.seed = config.seed;
  manifest.config = fnc::to_json(config);
  manifest.input_digests[options.config_path] = fnc::file_digest_hex(options.config_path);
  write_manifest(options.out_dir + "/experiment_manifest.json", manifest, watch.seconds());
  std::cout << fnc::replication_summary_csv(summary);
  return kExitOk;
}

int run_twostage_command(const ConfigRunOptions& options) {
  Stopwatch watch;
  json raw = load_json(options.config_path);
  if (options.seed) raw["seed"] = *options.seed;
  const fnc::TwoStageConfig config = fnc::two_stage_config_from_json(raw);
  const fnc::TwoStageResult result = fnc::run_two_stage(config);

  std::filesystem::create_directories(options.out_dir);
  fnc::atomic_write_file(options.out_dir + "/twostage_summary.csv",
                         fnc::two_stage_summary_csv(result));
  fnc::atomic_write_file(options.out_dir + "/twostage_detail.json",
                         fnc::two_stage_detail_json(config, result).dump(2) + "\n");
  fnc::atomic_write_file(options.out_dir + "/twostage_stage2_pvalues.csv",
                         fnc::two_stage_histogram_csv(result));

  fnc::RunManifest manifest;
  manifest.command = "twostage";
  manifest.seed = config.seed;
  manifest.config = fnc::to_json(config);
  manifest.input_digests[options.config_path] = fnc::file_digest_hex(options.config_path);
  write_manifest(options.out_dir + "/twostage_manifest.json", manifest, watch.seconds());
  std::cout << fnc::two_stage_summary_csv(result);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"False negative control screening toolkit"};
  app.require_subcommand(1);

  ScreenOptions screen;
  CLI::App* screen_cmd = app.add_subcommand("screen", "FNC screening on a statistics file");
  screen_cmd->add_option("input", screen.input, "CSV of id,p or id,z")->required();
  screen_cmd->add_option("--out", screen.out, "selection CSV path")->required();
  screen_cmd->add_option("--beta", screen.beta, "target FNP level");
  screen_cmd->add_option("--s", screen.s_spec, "signal count or 'estimate'");
  screen_cmd->add_option("--sided", screen.sided, "one|two")
      ->check(CLI::IsMember({"one", "two"}));
  screen_cmd->add_option("--scale", screen.scale, "auto|p|z")
      ->check(CLI::IsMember({"auto", "p", "z"}));
  screen_cmd->add_option("--null-ensemble", screen.ensemble_path,
                         "null p-value ensemble CSV for calibration");
  screen_cmd->add_option("--c-half", screen.c_half, "bounding constant override");
  screen_cmd->add_option("--c-one", screen.c_one, "bounding constant override");

  CalibrateOptions calibrate;
  CLI::App* calibrate_cmd =
      app.add_subcommand("calibrate", "bounding sequences from a null ensemble");
  calibrate_cmd->add_option("--model", calibrate.model_spec, "model spec, e.g. ar:0.2");
  calibrate_cmd->add_option("--ensemble", calibrate.ensemble_path, "ensemble CSV path");
  calibrate_cmd->add_option("--m", calibrate.m, "dimension for --model");
  calibrate_cmd->add_option("--n-sets", calibrate.n_sets, "number of null sets");
  calibrate_cmd->add_option("--seed", calibrate.seed, "RNG seed");
  calibrate_cmd->add_option("--sided", calibrate.sided, "one|two")
      ->check(CLI::IsMember({"one", "two"}));
  calibrate_cmd->add_option("--out", calibrate.out, "output JSON path")->required();

  ReproduceOptions reproduce;
  CLI::App* reproduce_cmd =
      app.add_subcommand("reproduce", "simulation tables and figure data");
  reproduce_cmd->add_option("--table", reproduce.table, "table number 1..5");
  reproduce_cmd->add_option("--figure", reproduce.figure, "figure name (phase)");
  reproduce_cmd->add_option("--scale", reproduce.scale, "desk|full");
  reproduce_cmd->add_option("--seed", reproduce.seed, "RNG seed");
  reproduce_cmd->add_option("--out-dir", reproduce.out_dir, "output directory");

  ConfigRunOptions experiment;
  CLI::App* experiment_cmd =
      app.add_subcommand("experiment", "run a replication experiment from JSON config");
  experiment_cmd->add_option("--config", experiment.config_path, "config JSON")->required();
  experiment_cmd->add_option("--out-dir", experiment.out_dir, "output directory");
  experiment_cmd->add_option("--seed", experiment.seed, "override config seed");

  ConfigRunOptions twostage;
  CLI::App* twostage_cmd =
      app.add_subcommand("twostage", "run the two-stage pipeline from JSON config");
  twostage_cmd->add_option("--config", twostage.config_path, "config JSON")->required();
  twostage_cmd->add_option("--out-dir", twostage.out_dir, "output directory");
  twostage_cmd->add_option("--seed", twostage.seed, "override config seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (screen_cmd->parsed()) {
      if (!(screen.beta > 0.0 && screen.beta < 1.0)) {
        throw std::domain_error("screen: --beta must lie in the open interval (0, 1)");
      }
      return run_screen(screen);
    }
    if (calibrate_cmd->parsed()) return run_calibrate(calibrate);
    if (reproduce_cmd->parsed()) return run_reproduce(reproduce);
    if (experiment_cmd->parsed()) return run_experiment_command(experiment);
    if (twostage_cmd->parsed()) return run_twostage_command(twostage);
  } catch (const fnc::DecompositionError& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kExitNumeric;
  } catch (const fnc::CsvError& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
