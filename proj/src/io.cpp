#include "fnc/io.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fnc {

namespace {

bool parse_double(const std::string& text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (const char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

std::string trimmed(const std::string& text) {
  std::size_t first = text.find_first_not_of(" \t");
  std::size_t last = text.find_last_not_of(" \t");
  if (first == std::string::npos) return "";
  return text.substr(first, last - first + 1);
}

std::string format_full(double value) {
  std::ostringstream out;
  out << std::setprecision(17) << value;
  return out.str();
}

}  // namespace

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open '" + path + "'", 0);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trimmed(line).empty()) continue;
    rows.push_back(split_fields(line));
  }
  return rows;
}

StatisticVector read_statistics_csv(const std::string& path,
                                    std::optional<Scale> scale_override,
                                    Sidedness sidedness) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open '" + path + "'", 0);

  StatisticVector stats;
  stats.sidedness = sidedness;
  std::optional<Scale> header_scale;
  bool saw_header = false;
  bool has_id_column = false;
  bool first_data_row = true;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trimmed(line).empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() > 2) {
      throw CsvError("expected at most 2 columns", line_no);
    }
    const std::string value_field = trimmed(fields.back());
    double value;
    if (!parse_double(value_field, value)) {
      if (stats.values.empty() && !saw_header) {
        // header row: the value column name may pin the scale
        saw_header = true;
        const std::string name = value_field;
        if (name == "p" || name == "pvalue" || name == "p_value") {
          header_scale = Scale::p;
        } else if (name == "z" || name == "zscore" || name == "z_score") {
          header_scale = Scale::z;
        } else if (!name.empty()) {
          throw CsvError("unknown value column '" + name + "' (expected p or z)", line_no);
        }
        continue;
      }
      throw CsvError("unparseable value '" + value_field + "'", line_no);
    }
    if (first_data_row) {
      has_id_column = fields.size() == 2;
      first_data_row = false;
    } else if ((fields.size() == 2) != has_id_column) {
      throw CsvError("inconsistent column count", line_no);
    }
    if (has_id_column) stats.ids.push_back(trimmed(fields.front()));
    stats.values.push_back(value);
  }
  if (stats.values.size() < 2) {
    throw CsvError("need at least 2 statistics in '" + path + "'", line_no);
  }

  if (scale_override) {
    stats.scale = *scale_override;
  } else if (header_scale) {
    stats.scale = *header_scale;
  } else {
    const bool all_unit = std::all_of(stats.values.begin(), stats.values.end(),
                                      [](double v) { return v > 0.0 && v <= 1.0; });
    stats.scale = all_unit ? Scale::p : Scale::z;
  }
  stats.validate();
  return stats;
}

NullEnsemble read_ensemble_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open '" + path + "'", 0);
  NullEnsemble ensemble;
  ensemble.provenance = NullEnsemble::Provenance::external;
  ensemble.source = path;

  std::string line;
  std::size_t line_no = 0;
  bool checked_header = false;
  std::optional<bool> id_column;
  while (std::getline(in, line)) {
    ++line_no;
    if (trimmed(line).empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    double probe;
    if (!checked_header) {
      checked_header = true;
      if (!parse_double(trimmed(fields.front()), probe) &&
          (fields.size() < 2 || !parse_double(trimmed(fields[1]), probe))) {
        // header row; an id-like first column name means the data rows
        // carry a leading set id
        const std::string first = trimmed(fields.front());
        id_column = first == "set_id" || first == "id";
        continue;
      }
    }
    if (!id_column.has_value()) {
      id_column = !parse_double(trimmed(fields.front()), probe);
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t f = *id_column ? 1 : 0; f < fields.size(); ++f) {
      double value;
      if (!parse_double(trimmed(fields[f]), value)) {
        throw CsvError("unparseable p-value '" + fields[f] + "'", line_no);
      }
      row.push_back(value);
    }
    if (!ensemble.pvalue_sets.empty() && row.size() != ensemble.m()) {
      throw CsvError("row length " + std::to_string(row.size()) + " != m = " +
                         std::to_string(ensemble.m()),
                     line_no);
    }
    ensemble.pvalue_sets.push_back(std::move(row));
  }
  try {
    ensemble.validate();
  } catch (const std::invalid_argument& error) {
    throw CsvError(error.what(), line_no);
  }
  return ensemble;
}

std::string ensemble_csv(const NullEnsemble& ensemble) {
  std::ostringstream out;
  out << "set_id";
  for (std::size_t j = 1; j <= ensemble.m(); ++j) out << ",p_" << j;
  out << "\n";
  for (std::size_t a = 0; a < ensemble.n_sets(); ++a) {
    out << a;
    for (const double p : ensemble.pvalue_sets[a]) out << "," << format_full(p);
    out << "\n";
  }
  return out.str();
}

void atomic_write_file(const std::string& path, const std::string& content) {
  const std::string temp = path + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + temp + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("short write to '" + temp + "'");
  }
  if (std::rename(temp.c_str(), path.c_str()) != 0) {
    std::remove(temp.c_str());
    throw std::runtime_error("cannot rename '" + temp + "' to '" + path + "'");
  }
}

std::string file_digest_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for digest");
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buffer[4096];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 0x100000001b3ULL;
    }
    if (got < static_cast<std::streamsize>(sizeof(buffer))) break;
  }
  std::ostringstream out;
  out << "fnv1a64:" << std::hex << std::setfill('0') << std::setw(16) << hash;
  return out.str();
}

nlohmann::json to_json(const BoundingSequences& bounds) {
  return {{"m", bounds.m},
          {"n_sets", bounds.n_sets},
          {"quantile_level", bounds.quantile_level},
          {"c_half", bounds.c_half},
          {"c_one", bounds.c_one}};
}

BoundingSequences bounding_sequences_from_json(const nlohmann::json& j) {
  BoundingSequences bounds;
  bounds.m = j.at("m").get<std::size_t>();
  bounds.n_sets = j.value("n_sets", std::size_t{0});
  bounds.quantile_level = j.value("quantile_level", calibration_quantile_level(bounds.m));
  bounds.c_half = j.at("c_half").get<double>();
  bounds.c_one = j.at("c_one").get<double>();
  return bounds;
}

nlohmann::json to_json(const CovarianceModel& model) {
  nlohmann::json j;
  j["m"] = model.m;
  if (const auto* ar = std::get_if<ArModel>(&model.kind)) {
    j["kind"] = "ar";
    j["lambda"] = ar->lambda;
  } else if (const auto* block = std::get_if<BlockModel>(&model.kind)) {
    j["kind"] = "block";
    j["block_size"] = block->block_size;
    j["r"] = block->r;
  } else if (const auto* rb = std::get_if<RandomBlocksModel>(&model.kind)) {
    j["kind"] = "random_blocks";
    j["n_blocks"] = rb->n_blocks;
    j["size_min"] = rb->size_min;
    j["size_max"] = rb->size_max;
    j["r"] = rb->r;
    j["seed"] = rb->seed;
  } else if (const auto* factor = std::get_if<FactorModel>(&model.kind)) {
    j["kind"] = "factor";
    j["tau"] = factor->tau;
    j["h_seed"] = factor->h_seed;
  } else if (const auto* ex = std::get_if<ExplicitModel>(&model.kind)) {
    j["kind"] = "explicit";
    j["matrix"] = ex->matrix;
  }
  return j;
}

CovarianceModel covariance_model_from_json(const nlohmann::json& j) {
  CovarianceModel model;
  model.m = j.at("m").get<std::size_t>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "ar") {
    model.kind = ArModel{j.at("lambda").get<double>()};
  } else if (kind == "identity") {
    model.kind = ArModel{0.0};
  } else if (kind == "block") {
    model.kind = BlockModel{j.at("block_size").get<std::size_t>(), j.at("r").get<double>()};
  } else if (kind == "random_blocks") {
    RandomBlocksModel rb;
    rb.n_blocks = j.value("n_blocks", std::size_t{20});
    rb.size_min = j.value("size_min", std::size_t{10});
    rb.size_max = j.value("size_max", std::size_t{100});
    rb.r = j.value("r", 0.5);
    rb.seed = j.value("seed", std::uint64_t{0});
    model.kind = rb;
  } else if (kind == "factor") {
    model.kind = FactorModel{j.at("tau").get<double>(), j.value("h_seed", std::uint64_t{0})};
  } else if (kind == "explicit") {
    model.kind = ExplicitModel{j.at("matrix").get<std::vector<double>>()};
  } else {
    throw std::invalid_argument("unknown covariance kind '" + kind + "'");
  }
  model.validate();
  return model;
}

CovarianceModel parse_model_spec(const std::string& spec, std::size_t m) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(spec);
  while (std::getline(in, part, ':')) parts.push_back(part);
  if (parts.empty()) throw std::invalid_argument("empty model spec");
  auto need = [&](std::size_t count) {
    if (parts.size() - 1 < count) {
      throw std::invalid_argument("model spec '" + spec + "': missing parameters");
    }
  };
  CovarianceModel model;
  model.m = m;
  const std::string& kind = parts[0];
  if (kind == "identity") {
    model.kind = ArModel{0.0};
  } else if (kind == "ar") {
    need(1);
    model.kind = ArModel{std::stod(parts[1])};
  } else if (kind == "block") {
    need(2);
    model.kind = BlockModel{static_cast<std::size_t>(std::stoull(parts[1])),
                            std::stod(parts[2])};
  } else if (kind == "factor") {
    need(1);
    FactorModel factor;
    factor.tau = std::stod(parts[1]);
    if (parts.size() > 2) factor.h_seed = std::stoull(parts[2]);
    model.kind = factor;
  } else if (kind == "randblocks") {
    need(4);
    RandomBlocksModel rb;
    rb.n_blocks = static_cast<std::size_t>(std::stoull(parts[1]));
    rb.size_min = static_cast<std::size_t>(std::stoull(parts[2]));
    rb.size_max = static_cast<std::size_t>(std::stoull(parts[3]));
    rb.r = std::stod(parts[4]);
    if (parts.size() > 5) rb.seed = std::stoull(parts[5]);
    model.kind = rb;
  } else {
    throw std::invalid_argument("unknown model kind '" + kind + "'");
  }
  model.validate();
  return model;
}

nlohmann::json to_json(const MethodSpec& spec) {
  nlohmann::json j;
  j["method"] = to_string(spec.method);
  j["level"] = spec.level;
  if (spec.method == SelectionMethod::fnc) {
    j["s_source"] = spec.s_source == SignalCountSource::known ? "known" : "estimated";
  }
  if (spec.method == SelectionMethod::bonferroni && spec.m_eff != 0) {
    j["m_eff"] = spec.m_eff;
  }
  return j;
}

MethodSpec method_spec_from_json(const nlohmann::json& j) {
  MethodSpec spec;
  const std::string method = j.at("method").get<std::string>();
  if (method == "fnc") {
    spec.method = SelectionMethod::fnc;
  } else if (method == "bh") {
    spec.method = SelectionMethod::bh;
  } else if (method == "bonferroni") {
    spec.method = SelectionMethod::bonferroni;
  } else {
    throw std::invalid_argument("unknown method '" + method + "'");
  }
  spec.level = j.at("level").get<double>();
  const std::string source = j.value("s_source", "known");
  spec.s_source = source == "estimated" ? SignalCountSource::estimated
                                        : SignalCountSource::known;
  spec.m_eff = j.value("m_eff", std::size_t{0});
  return spec;
}

nlohmann::json to_json(const ExperimentConfig& config) {
  nlohmann::json j;
  j["m"] = config.m;
  j["model"] = to_json(config.model);
  j["sparsity"] = {{"gamma", config.sparsity.gamma},
                   {"intensity", config.sparsity.intensity}};
  if (!config.sparsity.per_signal.empty()) {
    j["sparsity"]["per_signal"] = config.sparsity.per_signal;
  }
  j["methods"] = nlohmann::json::array();
  for (const auto& spec : config.methods) j["methods"].push_back(to_json(spec));
  j["n_reps"] = config.n_reps;
  j["seed"] = config.seed;
  j["sidedness"] = to_string(config.sidedness);
  if (config.bounds) j["bounds"] = to_json(*config.bounds);
  return j;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig config;
  config.m = j.at("m").get<std::size_t>();
  nlohmann::json model = j.at("model");
  if (!model.contains("m")) model["m"] = config.m;
  config.model = covariance_model_from_json(model);
  const auto& sparsity = j.at("sparsity");
  config.sparsity.gamma = sparsity.at("gamma").get<double>();
  config.sparsity.intensity = sparsity.value("intensity", 0.0);
  if (sparsity.contains("per_signal")) {
    config.sparsity.per_signal = sparsity.at("per_signal").get<std::vector<double>>();
  }
  for (const auto& spec : j.at("methods")) {
    config.methods.push_back(method_spec_from_json(spec));
  }
  config.n_reps = j.value("n_reps", std::size_t{100});
  config.seed = j.value("seed", std::uint64_t{0});
  config.sidedness = sidedness_from_string(j.value("sidedness", "one"));
  if (j.contains("bounds")) {
    config.bounds = bounding_sequences_from_json(j.at("bounds"));
  } else if (j.value("calibrate", false) ||
             std::any_of(config.methods.begin(), config.methods.end(),
                         [](const MethodSpec& spec) {
                           return spec.method == SelectionMethod::fnc &&
                                  spec.s_source == SignalCountSource::estimated;
                         })) {
    const std::size_t n_sets = j.value("calibration_sets", std::size_t{1000});
    const std::uint64_t cal_seed = j.value("calibration_seed", config.seed ^ 0xca1ULL);
    config.bounds =
        calibrate_model(config.model, n_sets, cal_seed, config.sidedness);
  }
  return config;
}

nlohmann::json to_json(const TwoStageConfig& config) {
  nlohmann::json j;
  j["m"] = config.m;
  j["signal_indices"] = config.truth.signal_indices;
  j["effect"] = config.effect;
  j["n_total"] = config.n_total;
  j["n_ref"] = config.n_ref;
  j["split_fraction"] = config.split_fraction;
  j["alpha"] = config.alpha;
  j["beta"] = config.beta;
  j["m_eff"] = config.m_eff;
  j["n_reps"] = config.n_reps;
  j["seed"] = config.seed;
  j["sidedness"] = to_string(config.sidedness);
  j["s_source"] =
      config.s_source == SignalCountSource::known ? "known" : "estimated";
  if (config.model) j["model"] = to_json(*config.model);
  if (config.stage1_bounds) j["stage1_bounds"] = to_json(*config.stage1_bounds);
  return j;
}

TwoStageConfig two_stage_config_from_json(const nlohmann::json& j) {
  TwoStageConfig config;
  config.m = j.at("m").get<std::size_t>();
  config.truth.signal_indices = j.at("signal_indices").get<std::vector<std::size_t>>();
  if (j.contains("effect")) {
    config.effect = j.at("effect").get<std::vector<double>>();
  } else {
    // common intensity shorthand
    const double a = j.at("intensity").get<double>();
    config.effect.assign(config.m, 0.0);
    for (const std::size_t index : config.truth.signal_indices) {
      config.effect[index] = a;
    }
  }
  config.n_total = j.value("n_total", 1.0);
  config.n_ref = j.value("n_ref", 1.0);
  config.split_fraction = j.value("split_fraction", 0.3);
  config.alpha = j.value("alpha", 0.05);
  config.beta = j.value("beta", 0.1);
  config.m_eff = j.value("m_eff", std::size_t{0});
  config.n_reps = j.value("n_reps", std::size_t{100});
  config.seed = j.value("seed", std::uint64_t{0});
  config.sidedness = sidedness_from_string(j.value("sidedness", "one"));
  config.s_source = j.value("s_source", std::string("estimated")) == "known"
                        ? SignalCountSource::known
                        : SignalCountSource::estimated;
  if (j.contains("model")) {
    nlohmann::json model = j.at("model");
    if (!model.contains("m")) model["m"] = config.m;
    config.model = covariance_model_from_json(model);
  }
  if (j.contains("stage1_bounds")) {
    config.stage1_bounds = bounding_sequences_from_json(j.at("stage1_bounds"));
  } else if (config.s_source == SignalCountSource::estimated) {
    const std::size_t n_sets = j.value("calibration_sets", std::size_t{1000});
    const std::uint64_t cal_seed = j.value("calibration_seed", config.seed ^ 0xca1ULL);
    CovarianceModel null_model =
        config.model ? *config.model : CovarianceModel{config.m, ArModel{0.0}};
    config.stage1_bounds =
        calibrate_model(null_model, n_sets, cal_seed, config.sidedness);
  }
  return config;
}

std::string replication_summary_csv(const ReplicationSummary& summary) {
  std::ostringstream out;
  out << "method,level,s_source,mean_fnp,sd_fnp,se_fnp,mean_fdp,sd_fdp,se_fdp,"
         "mean_fm,sd_fm,refusals,n_reps\n";
  const double root_n = std::sqrt(static_cast<double>(summary.records.size()));
  for (const MethodSummary& method : summary.methods) {
    out << to_string(method.spec.method) << "," << method.spec.level << ","
        << (method.spec.method == SelectionMethod::fnc
                ? (method.spec.s_source == SignalCountSource::known ? "known" : "estimated")
                : "-")
        << "," << method.mean_fnp << "," << method.sd_fnp << "," << method.sd_fnp / root_n
        << "," << method.mean_fdp << "," << method.sd_fdp << "," << method.sd_fdp / root_n
        << "," << method.mean_fm << "," << method.sd_fm << "," << method.refusals << ","
        << summary.records.size() << "\n";
  }
  return out.str();
}

nlohmann::json replication_summary_json(const ExperimentConfig& config,
                                        const ReplicationSummary& summary) {
  nlohmann::json j;
  j["config"] = to_json(config);
  j["s_true"] = summary.s_true;
  j["methods"] = nlohmann::json::array();
  for (const MethodSummary& method : summary.methods) {
    j["methods"].push_back({{"spec", to_json(method.spec)},
                            {"mean_fnp", method.mean_fnp},
                            {"sd_fnp", method.sd_fnp},
                            {"mean_fdp", method.mean_fdp},
                            {"sd_fdp", method.sd_fdp},
                            {"mean_fm", method.mean_fm},
                            {"sd_fm", method.sd_fm},
                            {"refusals", method.refusals}});
  }
  j["replications"] = nlohmann::json::array();
  for (const ReplicationRecord& record : summary.records) {
    nlohmann::json rep;
    rep["rep"] = record.rep;
    rep["methods"] = nlohmann::json::array();
    for (const MethodRepRecord& method : record.per_method) {
      nlohmann::json entry = {{"fnp", method.metrics.fnp},
                              {"fdp", method.metrics.fdp},
                              {"fm", method.metrics.fm_index},
                              {"k", method.k}};
      if (method.pi_hat >= 0.0) {
        entry["pi_hat"] = method.pi_hat;
        entry["s_hat"] = method.s_used;
        entry["refused"] = method.refused;
      }
      rep["methods"].push_back(std::move(entry));
    }
    j["replications"].push_back(std::move(rep));
  }
  return j;
}

std::string two_stage_summary_csv(const TwoStageResult& result) {
  std::ostringstream out;
  out << "procedure,fwer,power,mean_stage1,mean_stage2,refusals,n_reps\n";
  out << "two_stage," << result.fwer_two_stage << "," << result.power_two_stage << ","
      << result.mean_stage1_count << "," << result.mean_stage2_count << ","
      << result.refusals << "," << result.records.size() << "\n";
  out << "one_stage," << result.fwer_one_stage << "," << result.power_one_stage << ",-,-,-,"
      << result.records.size() << "\n";
  return out.str();
}

nlohmann::json two_stage_detail_json(const TwoStageConfig& config,
                                     const TwoStageResult& result) {
  nlohmann::json j;
  j["config"] = to_json(config);
  j["fwer_two_stage"] = result.fwer_two_stage;
  j["fwer_one_stage"] = result.fwer_one_stage;
  j["power_two_stage"] = result.power_two_stage;
  j["power_one_stage"] = result.power_one_stage;
  j["mean_stage1_count"] = result.mean_stage1_count;
  j["mean_stage2_count"] = result.mean_stage2_count;
  j["refusals"] = result.refusals;
  j["replications"] = nlohmann::json::array();
  for (const TwoStageRepRecord& record : result.records) {
    j["replications"].push_back({{"rep", record.rep},
                                 {"stage1_selected", record.stage1_selected},
                                 {"stage2_significant", record.stage2_significant},
                                 {"one_stage_significant", record.one_stage_significant},
                                 {"pi_hat", record.pi_hat},
                                 {"s_hat", record.s_hat},
                                 {"refused", record.refused}});
  }
  return j;
}

std::string two_stage_histogram_csv(const TwoStageResult& result) {
  std::ostringstream out;
  out << "rep,stage2_p\n";
  for (const TwoStageRepRecord& record : result.records) {
    for (const double p : record.stage2_pvalues) {
      out << record.rep << "," << format_full(p) << "\n";
    }
  }
  return out.str();
}

nlohmann::json to_json(const RunManifest& manifest) {
  nlohmann::json j;
  j["command"] = manifest.command;
  j["config"] = manifest.config;
  j["seed"] = manifest.seed;
  j["seed_from_entropy"] = manifest.seed_from_entropy;
  j["version"] = manifest.version;
  j["inputs"] = manifest.input_digests;
  j["wall_seconds"] = manifest.wall_seconds;
  return j;
}

}  // namespace fnc
