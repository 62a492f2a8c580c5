#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sfmnav/reward.hpp"
#include "sfmnav/sfm_forces.hpp"
#include "sfmnav/value_net.hpp"
#include "sfmnav/world.hpp"

namespace sfmnav {

/// The seven compared variants.
enum class Version { Sarl, Sfm, Sfm2, Sfm3, Sfm4, Sfm5, Sfm6 };

std::string to_string(Version version);
Version version_from_string(const std::string& name);
std::vector<Version> all_versions();

struct EnvWeight {
  int env_id = 1;
  double probability = 1.0;

  bool operator==(const EnvWeight&) const = default;
};

/// Discrete holonomic velocities in the world frame.
struct ActionSpace {
  std::vector<double> speeds;
  std::vector<double> headings;
  bool includes_stop = true;

  /// `speed_samples` speeds (e^{(i+1)/n} - 1) / (e - 1) * v_pref and
  /// `heading_samples` headings evenly spaced over [0, 2 pi).
  static ActionSpace standard(double v_pref, int speed_samples = 5, int heading_samples = 16);

  /// Stop first (if enabled), then headings in order, each with all speeds.
  std::vector<Vec2> actions() const;
  std::size_t size() const { return speeds.size() * headings.size() + (includes_stop ? 1 : 0); }

  bool operator==(const ActionSpace&) const = default;
};

struct TrainConfig {
  int il_episodes = 3000;
  int il_epochs = 50;
  double il_learning_rate = 0.01;
  int il_env = 1;
  int rl_episodes = 10000;
  double rl_learning_rate = 0.001;
  double gamma = 0.9;
  /// false: TD target r + gamma V(s'); true: r + gamma^(dt v_pref) V(s').
  bool time_scaled_discount = false;
  double epsilon_start = 0.5;
  double epsilon_end = 0.1;
  int epsilon_decay_episodes = 4000;
  int replay_capacity = 100000;
  int target_update_interval = 50;
  int updates_per_state = 1;
  int validation_interval = 1000;
  int validation_episodes = 100;
  int test_episodes = 500;
  double momentum = 0.9;
  int batch_size = 100;
  std::vector<EnvWeight> env_mix{{1, 0.7}, {2, 0.3}};
  std::vector<EnvWeight> eval_env_mix{{1, 0.7}, {2, 0.3}};
  int speed_samples = 5;
  int heading_samples = 16;

  void validate() const;
  /// Exploration rate for RL episode `episode` (0-based).
  double epsilon(int episode) const;

  bool operator==(const TrainConfig&) const = default;
};

struct ExperimentConfig {
  std::string name = "SARL";
  Version version = Version::Sarl;
  ScenarioConfig scenario;
  RewardSpec reward;
  bool force_augmented = false;
  SfmParams state_forces;  // a=1, b=1, d_z=0 for the encoded forces
  NetworkArch network;
  TrainConfig train;

  ActionSpace action_space() const;
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Built-in presets: the seven versions under their own names (SARL,
/// SARL-SFM, SARL-SFM2 ... SARL-SFM6), the two runs trained and tested on
/// environments 2-5 (SARL-T2, SARL-SFM6-T2) and the single-core smoke run
/// SARL-DESK.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// A preset name, or a path to an experiment YAML file.
ExperimentConfig resolve_experiment(const std::string& name_or_path);

/// YAML experiment file. Keys omitted from the file keep the defaults of the
/// preset named by `base` (or of `version` when no base is given).
ExperimentConfig load_experiment(const std::filesystem::path& path);
void save_experiment(const ExperimentConfig& config, const std::filesystem::path& path);
std::string experiment_to_yaml(const ExperimentConfig& config);
ExperimentConfig experiment_from_yaml(const std::string& text);

}  // namespace sfmnav
