#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sfmnav/episode.hpp"
#include "sfmnav/error.hpp"
#include "sfmnav/experiment.hpp"
#include "sfmnav/metrics.hpp"
#include "sfmnav/plot.hpp"
#include "sfmnav/trainer.hpp"
#include "sfmnav/value_net.hpp"

namespace fs = std::filesystem;
using namespace sfmnav;

namespace {

void print_report(const std::string& label, const MetricsReport& r) {
  ComparisonTable table;
  table.rows.push_back({label, r});
  std::cout << format_table(table);
}

int cmd_simulate(int env, std::uint64_t seed, const std::vector<std::string>& policy_spec,
                 const std::string& preset_name, const fs::path& out_dir, bool plot) {
  const ExperimentConfig config = resolve_experiment(preset_name);
  fs::create_directories(out_dir);

  std::unique_ptr<Policy> policy;
  NetworkParams params;
  const std::string kind = policy_spec.empty() ? "orca" : policy_spec.front();
  if (kind == "orca") {
    policy = std::make_unique<OrcaPolicy>();
  } else if (kind == "random") {
    policy = std::make_unique<RandomPolicy>(config.action_space().actions());
  } else if (kind == "checkpoint") {
    if (policy_spec.size() != 2) throw Error("--policy checkpoint needs a PATH");
    params = load(policy_spec[1], config.network);
    policy = std::make_unique<ValuePolicy>(lookahead_context(params, config));
  } else {
    throw Error("unknown policy: " + kind);
  }

  EpisodeOptions options;
  options.gamma = config.train.gamma;
  const EpisodeRecord record = run_episode(*policy, config.scenario, env, seed, config.reward, options);
  write_episode(record, out_dir / "episode.jsonl");
  if (plot) plot_trajectory(record, out_dir / "trajectory.svg");

  std::cout << "env " << record.env_id << " seed " << record.seed << ": " << to_string(record.outcome);
  if (record.nav_time) std::cout << " in " << *record.nav_time << " s";
  std::cout << ", reward " << record.cumulative_reward << ", " << record.steps << " steps\n";
  return 0;
}

int cmd_train(const std::string& preset_name, std::uint64_t seed, const fs::path& out_dir, bool quiet) {
  const ExperimentConfig config = resolve_experiment(preset_name);
  config.validate();
  fs::create_directories(out_dir);
  save_experiment(config, out_dir / "experiment.yaml");

  TrainingLog log;
  if (!quiet) {
    log.sink = [](const std::string& line) {
      if (line.find("\"episode\",\"episode\"") == std::string::npos) std::cerr << line << '\n';
    };
  }
  const TrainingResult result = run_training(config, seed, log);
  save(result.imitation_params, out_dir / "il.ckpt");
  save(result.params, out_dir / "final.ckpt");
  log.write(out_dir / "train_log.jsonl");
  if (config.train.test_episodes > 0) {
    write_report_json(config.name, result.test, out_dir / "report.json");
    print_report(config.name, result.test);
  }
  return 0;
}

int cmd_evaluate(const fs::path& checkpoint, const std::string& preset_name, int episodes, std::uint64_t seed_base,
                 const fs::path& out_dir) {
  const ExperimentConfig config = resolve_experiment(preset_name);
  const NetworkParams params = load(checkpoint, config.network);
  const MetricsReport report = evaluate(params, config, seed_base, episodes);
  fs::create_directories(out_dir);
  write_report_json(config.name, report, out_dir / "report.json");
  print_report(config.name, report);
  return 0;
}

int cmd_compare(const fs::path& reports_dir, const fs::path& out) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(reports_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  if (files.empty()) throw Error("no report files under " + reports_dir.string());
  std::sort(files.begin(), files.end());

  std::vector<ComparisonRow> rows;
  for (const fs::path& f : files) rows.push_back(read_report_json(f));
  // Preset order first, unknown labels after them.
  const std::vector<std::string> order = preset_names();
  auto rank = [&](const std::string& label) {
    return static_cast<std::size_t>(std::find(order.begin(), order.end(), label) - order.begin());
  };
  std::stable_sort(rows.begin(), rows.end(),
                   [&](const ComparisonRow& a, const ComparisonRow& b) { return rank(a.version) < rank(b.version); });

  const ComparisonTable table = compare_versions(std::move(rows));
  write_table_csv(table, out);
  std::cout << format_table(table);
  return 0;
}

int cmd_plot(const std::string& what, const std::vector<fs::path>& inputs, const std::vector<std::string>& labels,
             const fs::path& out) {
  if (what == "trajectory") {
    if (inputs.size() != 1) throw Error("plot trajectory takes exactly one --in file");
    plot_trajectory(read_episode(inputs.front()), out);
  } else if (what == "validation") {
    std::vector<ValidationSeries> series;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      std::string label = i < labels.size() ? labels[i] : inputs[i].parent_path().filename().string();
      if (label.empty()) label = inputs[i].stem().string();
      series.push_back({label, read_validation_points(inputs[i])});
    }
    plot_validation_curve(series, out);
  } else {
    throw Error("plot kind must be trajectory or validation");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sfmnav: crowd navigation with social-force rewards and states"};
  app.require_subcommand(1);

  int sim_env = 1;
  std::uint64_t sim_seed = 0;
  std::vector<std::string> sim_policy{"orca"};
  std::string sim_preset = "SARL";
  std::string sim_out = "sim_out";
  bool sim_plot = false;
  auto* simulate = app.add_subcommand("simulate", "Run one episode and export its trajectory");
  simulate->add_option("--env", sim_env, "Environment id")->capture_default_str();
  simulate->add_option("--seed", sim_seed, "Scenario seed")->capture_default_str();
  simulate->add_option("--policy", sim_policy, "orca | random | checkpoint PATH")->expected(1, 2);
  simulate->add_option("--preset", sim_preset, "Preset name or experiment YAML")->capture_default_str();
  simulate->add_option("--out", sim_out, "Output directory")->capture_default_str();
  simulate->add_flag("--plot", sim_plot, "Also write trajectory.svg");

  std::string train_preset = "SARL";
  std::uint64_t train_seed = 0;
  std::string train_out = "train_out";
  bool train_quiet = false;
  auto* train = app.add_subcommand("train", "Imitation learning, RL and the test phase");
  train->add_option("--preset", train_preset, "Preset name or experiment YAML")->capture_default_str();
  train->add_option("--seed", train_seed, "Master seed")->capture_default_str();
  train->add_option("--out", train_out, "Output directory")->capture_default_str();
  train->add_flag("--quiet", train_quiet, "No progress output");

  std::string eval_ckpt;
  std::string eval_preset = "SARL";
  int eval_episodes = 500;
  std::uint64_t eval_seed = 0;
  std::string eval_out = "eval_out";
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Greedy test episodes with a checkpoint");
  evaluate_cmd->add_option("--checkpoint", eval_ckpt, "Checkpoint file")->required();
  evaluate_cmd->add_option("--preset", eval_preset, "Preset name or experiment YAML")->capture_default_str();
  evaluate_cmd->add_option("--episodes", eval_episodes, "Number of test episodes")->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  evaluate_cmd->add_option("--seed-base", eval_seed, "Seed base of the test block")->capture_default_str();
  evaluate_cmd->add_option("--out", eval_out, "Output directory")->capture_default_str();

  std::string cmp_reports;
  std::string cmp_out = "table.csv";
  auto* compare = app.add_subcommand("compare", "Collect report.json files into one table");
  compare->add_option("--reports", cmp_reports, "Directory searched recursively for *.json")->required();
  compare->add_option("--out", cmp_out, "CSV output")->capture_default_str();

  std::string plot_kind;
  std::vector<std::string> plot_in;
  std::vector<std::string> plot_labels;
  std::string plot_out;
  auto* plot = app.add_subcommand("plot", "SVG trajectory or validation-curve plot");
  plot->add_option("kind", plot_kind, "trajectory | validation")->required()
      ->check(CLI::IsMember({"trajectory", "validation"}));
  plot->add_option("--in", plot_in, "Episode file, or one or more training logs")->required();
  plot->add_option("--label", plot_labels, "Series labels for validation plots");
  plot->add_option("--out", plot_out, "SVG output")->required();

  std::string preset_name;
  bool preset_list = false;
  auto* preset_cmd = app.add_subcommand("preset", "Print a built-in preset as an experiment file");
  preset_cmd->add_option("name", preset_name, "Preset name");
  preset_cmd->add_flag("--list", preset_list, "List preset names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return cmd_simulate(sim_env, sim_seed, sim_policy, sim_preset, sim_out, sim_plot);
    if (*train) return cmd_train(train_preset, train_seed, train_out, train_quiet);
    if (*evaluate_cmd) return cmd_evaluate(eval_ckpt, eval_preset, eval_episodes, eval_seed, eval_out);
    if (*compare) return cmd_compare(cmp_reports, cmp_out);
    if (*preset_cmd) {
      if (preset_list || preset_name.empty()) {
        for (const std::string& name : preset_names()) std::cout << name << '\n';
      } else {
        std::cout << experiment_to_yaml(preset(preset_name));
      }
      return 0;
    }
    if (*plot) {
      std::vector<fs::path> inputs(plot_in.begin(), plot_in.end());
      return cmd_plot(plot_kind, inputs, plot_labels, plot_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
