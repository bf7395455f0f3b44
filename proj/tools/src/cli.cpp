#include "hcm/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <optional>

#include "hcm/calibrate.hpp"
#include "hcm/config.hpp"
#include "hcm/data.hpp"
#include "hcm/error.hpp"
#include "hcm/experiments.hpp"
#include "hcm/format.hpp"
#include "hcm/head.hpp"
#include "hcm/metrics.hpp"
#include "hcm/train.hpp"

namespace hcm::cli {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  bool verbose = false;
  std::string params_path;
  std::string data_path;
  std::string scores_path;
  std::string calibration_path;
  std::string experiment;
};

class Reporter {
 public:
  Reporter(const Options& o, std::ostream& out) : opts_(o), out_(out) {}
  void info(const std::string& line) const {
    if (!opts_.quiet) out_ << line << '\n';
  }
  void detail(const std::string& line) const {
    if (opts_.verbose && !opts_.quiet) out_ << line << '\n';
  }

 private:
  const Options& opts_;
  std::ostream& out_;
};

// Loads the run config (defaults of `experiment` when no file is given) and
// applies the seed override before validation.
RunConfig load_config(const Options& o, std::optional<std::string_view> experiment) {
  RunConfig config;
  if (!o.config_path.empty()) {
    if (!fs::exists(o.config_path))
      throw ConfigError("--config", "file not found: '" + o.config_path + "'");
    config = config_from_json(read_json(o.config_path), experiment);
  } else {
    config = default_config(experiment.value_or("toy1d"));
  }
  if (o.seed) config.seed = *o.seed;
  validate(config);
  return config;
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what, "required");
  if (!fs::exists(path)) throw ConfigError(what, "file not found: '" + path + "'");
}

std::vector<double> column_values(const Table& t, const std::string& name) {
  if (!t.has_column(name)) throw ConfigError("scores", "missing column '" + name + "'");
  return t.column(name);
}

int cmd_train(const Options& o, const Reporter& log) {
  auto config = load_config(o, std::nullopt);
  if (!config.data.path.empty() && !fs::exists(config.data.path))
    throw ConfigError("data.path", "dataset file not found: '" + config.data.path + "'");
  const auto set = experiment_dataset(config);
  const auto train_set = training_targets(set, config.data.target_scale);
  auto params = build_network(config, static_cast<int>(train_set.input_width),
                              static_cast<int>(train_set.target_width + 1));
  const auto result = train(params, train_set, train_config(config));
  fs::create_directories(o.out_dir);
  const fs::path out(o.out_dir);
  write_json(out / "params.json", nn::to_json(params));
  write_json(out / "config.json", to_json(config));
  data::csv_write(set, out / "data.csv");
  Table loss;
  loss.columns = {"epoch", "loss"};
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    loss.add_row({static_cast<double>(e), result.epoch_loss[e]});
    log.detail("epoch " + std::to_string(e) + " loss " + format_double(result.epoch_loss[e]));
  }
  write_csv(loss, out / "training-loss.csv");
  log.info("trained " + std::to_string(result.epoch_loss.size()) + " epochs, final loss " +
           format_double(result.epoch_loss.back()));
  return kSuccess;
}

int cmd_score(const Options& o, const Reporter& log) {
  require_file(o.params_path, "--params");
  if (o.data_path.empty()) throw ConfigError("--data", "required");
  if (!fs::exists(o.data_path))
    throw ConfigError("--data", "dataset file not found: '" + o.data_path + "'");
  double scale = 1.0;
  if (!o.config_path.empty()) scale = load_config(o, std::nullopt).data.target_scale;
  const auto params = nn::params_from_json(read_json(o.params_path));
  const auto set = data::csv_read(o.data_path);
  const bool scalar = set.target_width == 1;
  const std::size_t model_width = scalar ? 2 : set.target_width;
  if (params.input_width() != static_cast<int>(set.input_width) ||
      params.output_width() != static_cast<int>(model_width + 1))
    throw DimensionError("score: checkpoint expects " + std::to_string(params.input_width()) +
                         " inputs and " + std::to_string(params.output_width() - 1) +
                         " targets; data has " + std::to_string(set.input_width) + " and " +
                         std::to_string(set.target_width));
  const auto scored = score_set(params, set, scale, scalar);
  Table t;
  for (std::size_t i = 0; i < set.input_width; ++i) t.columns.push_back("x" + std::to_string(i));
  for (std::size_t i = 0; i < set.target_width; ++i) t.columns.push_back("y_hat" + std::to_string(i));
  for (const char* c : {"R_hat", "d_norm", "u", "r"}) t.columns.emplace_back(c);
  for (std::size_t i = 0; i < set.size(); ++i) {
    std::vector<double> row(set.input(i).begin(), set.input(i).end());
    row.insert(row.end(), scored.predictions[i].begin(), scored.predictions[i].end());
    row.push_back(scored.outputs[i].magnitude / scale);
    row.push_back(scored.outputs[i].direction_norm());
    row.push_back(scored.u[i]);
    row.push_back(scored.errors[i]);
    t.add_row(std::move(row));
  }
  fs::create_directories(o.out_dir);
  write_csv(t, fs::path(o.out_dir) / "scores.csv");
  log.info("scored " + std::to_string(set.size()) + " rows");
  return kSuccess;
}

int cmd_calibrate(const Options& o, const Reporter& log) {
  require_file(o.scores_path, "--scores");
  Normalization norm = Normalization::kMinMax;
  std::optional<RunConfig> config;
  if (!o.config_path.empty()) {
    config = load_config(o, std::nullopt);
    norm = config->calibration.normalizer;
  }
  auto table = read_csv(o.scores_path);
  const auto u = column_values(table, "u");
  const auto r = column_values(table, "r");
  const auto model = fit_calibration(u, r, norm);
  auto conf_norm = report_confidences(model, u);
  std::vector<double> u_cal, conf;
  for (double v : u) {
    u_cal.push_back(model.calibrated(v));
    conf.push_back(model.confidence(v));
  }
  for (const auto& [name, values] :
       {std::pair{"u_cal", &u_cal}, std::pair{"conf", &conf}, std::pair{"conf_norm", &conf_norm}}) {
    if (table.has_column(name)) throw DataError(std::string("scores already contain column '") + name + "'");
    table.columns.emplace_back(name);
    for (std::size_t i = 0; i < table.rows.size(); ++i) table.rows[i].push_back((*values)[i]);
  }
  const fs::path out(o.out_dir);
  fs::create_directories(out);
  write_json(out / "calibration.json", to_json(model));
  write_csv(table, out / "scores.csv");
  log.info("temperature " + format_double(model.temperature));
  return kSuccess;
}

int cmd_eval(const Options& o, const Reporter& log) {
  require_file(o.scores_path, "--scores");
  require_file(o.calibration_path, "--calibration");
  const auto table = read_csv(o.scores_path);
  const auto model = calibration_from_json(read_json(o.calibration_path));
  const auto u = column_values(table, "u");
  const auto r = column_values(table, "r");
  std::vector<double> u_cal;
  for (double v : u) u_cal.push_back(model.calibrated(v));
  auto report = metrics::evaluate(u_cal, r);
  if (table.has_column("ood")) {
    std::vector<metrics::Label> labels;
    for (double v : table.column("ood")) {
      if (v != 0.0 && v != 1.0) throw DataError("ood column must hold 0 or 1");
      labels.push_back(v == 1.0 ? metrics::Label::kOutOfDistribution
                                : metrics::Label::kInDistribution);
    }
    metrics::add_ranking(report, u, labels);
  }
  const fs::path out(o.out_dir);
  fs::create_directories(out);
  write_json(out / "metrics.json", metrics::to_json(report));
  write_text(out / "metrics.csv", metrics::csv_header() + "\n" + metrics::csv_row(report) + "\n");
  log.info("ece_reg " + format_double(report.ece_reg) + ", spearman " +
           format_double(report.spearman));
  return kSuccess;
}

int cmd_experiment(const Options& o, const Reporter& log) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), o.experiment) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError("experiment", "unknown experiment '" + o.experiment + "'; valid: " + list);
  }
  const auto config = load_config(o, o.experiment);
  if (!config.data.path.empty() && !fs::exists(config.data.path))
    throw ConfigError("data.path", "dataset file not found: '" + config.data.path + "'");
  const auto art = run_experiment(config);
  write_run_directory(art, o.out_dir);
  log.info("wrote " + o.out_dir);
  log.detail(art.metrics.dump(2));
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Deterministic uncertainty scores from magnitude/direction regression heads", "hcm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.1.0");

  auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", o.config_path, "JSON run configuration");
    auto* opt = sub->add_option("--out", o.out_dir, "output directory");
    if (needs_out) opt->required();
    sub->add_option("--seed", o.seed, "seed override");
    auto* q = sub->add_flag("--quiet,-q", o.quiet, "suppress progress output");
    sub->add_flag("--verbose,-v", o.verbose, "print per-epoch details")->excludes(q);
  };

  auto* train_cmd = app.add_subcommand("train", "train a network, write params.json");
  add_common(train_cmd, true);
  auto* score_cmd = app.add_subcommand("score", "write scores.csv for a dataset");
  add_common(score_cmd, true);
  score_cmd->add_option("--params", o.params_path, "params.json checkpoint")->required();
  score_cmd->add_option("--data", o.data_path, "dataset CSV")->required();
  auto* cal_cmd = app.add_subcommand("calibrate", "fit temperature and normalizer");
  add_common(cal_cmd, true);
  cal_cmd->add_option("--scores", o.scores_path, "scores CSV with u and r columns")->required();
  auto* eval_cmd = app.add_subcommand("eval", "compute metrics.json and metrics.csv");
  add_common(eval_cmd, true);
  eval_cmd->add_option("--scores", o.scores_path, "scores CSV with u and r columns")->required();
  eval_cmd->add_option("--calibration", o.calibration_path, "calibration.json")->required();
  auto* exp_cmd = app.add_subcommand("experiment", "run a named experiment");
  add_common(exp_cmd, true);
  exp_cmd->add_option("name", o.experiment, "toy1d | two-moons | noise-shift | blob-ood | lambda-sweep")
      ->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << "0.1.0\n";
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  const Reporter log(o, out);
  try {
    if (*train_cmd) return cmd_train(o, log);
    if (*score_cmd) return cmd_score(o, log);
    if (*cal_cmd) return cmd_calibrate(o, log);
    if (*eval_cmd) return cmd_eval(o, log);
    return cmd_experiment(o, log);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const DimensionError& e) {
    err << "dimension error: " << e.what() << '\n';
    return kUsageError;
  } catch (const UncalibratableError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const DivergenceError& e) {
    err << "training diverged: " << e.what() << '\n';
    return kInternalError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace hcm::cli
