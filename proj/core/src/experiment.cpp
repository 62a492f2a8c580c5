#include "sfmnav/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "sfmnav/error.hpp"

namespace sfmnav {

std::string to_string(Version version) {
  switch (version) {
    case Version::Sarl: return "SARL";
    case Version::Sfm: return "SARL-SFM";
    case Version::Sfm2: return "SARL-SFM2";
    case Version::Sfm3: return "SARL-SFM3";
    case Version::Sfm4: return "SARL-SFM4";
    case Version::Sfm5: return "SARL-SFM5";
    case Version::Sfm6: return "SARL-SFM6";
  }
  return "unknown";
}

Version version_from_string(const std::string& name) {
  for (Version v : all_versions()) {
    if (to_string(v) == name) return v;
  }
  throw Error("unknown version: " + name);
}

std::vector<Version> all_versions() {
  return {Version::Sarl, Version::Sfm, Version::Sfm2, Version::Sfm3, Version::Sfm4, Version::Sfm5, Version::Sfm6};
}

ActionSpace ActionSpace::standard(double v_pref, int speed_samples, int heading_samples) {
  ActionSpace space;
  for (int i = 0; i < speed_samples; ++i) {
    space.speeds.push_back((std::exp((i + 1.0) / speed_samples) - 1.0) / (std::numbers::e - 1.0) * v_pref);
  }
  for (int i = 0; i < heading_samples; ++i) {
    space.headings.push_back(2.0 * std::numbers::pi * i / heading_samples);
  }
  return space;
}

std::vector<Vec2> ActionSpace::actions() const {
  std::vector<Vec2> out;
  out.reserve(size());
  if (includes_stop) out.emplace_back(0.0, 0.0);
  for (double heading : headings) {
    for (double speed : speeds) out.emplace_back(speed * std::cos(heading), speed * std::sin(heading));
  }
  return out;
}

void TrainConfig::validate() const {
  auto check_mix = [](const std::vector<EnvWeight>& mix, const char* what) {
    if (mix.empty()) throw Error(std::string("invalid train config: empty ") + what);
    double total = 0.0;
    for (const EnvWeight& w : mix) {
      if (w.probability < 0.0) throw Error(std::string("invalid train config: negative probability in ") + what);
      total += w.probability;
    }
    if (std::fabs(total - 1.0) > 1e-9) throw Error(std::string("invalid train config: ") + what + " does not sum to 1");
  };
  check_mix(env_mix, "env_mix");
  check_mix(eval_env_mix, "eval_env_mix");
  if (il_episodes < 0 || il_epochs < 0 || rl_episodes < 0) throw Error("invalid train config: negative episode count");
  if (!(il_learning_rate > 0.0 && rl_learning_rate > 0.0)) throw Error("invalid train config: learning rates must be positive");
  if (gamma <= 0.0 || gamma > 1.0) throw Error("invalid train config: gamma outside (0, 1]");
  if (replay_capacity < 1 || target_update_interval < 1 || updates_per_state < 0) {
    throw Error("invalid train config: replay_capacity, target_update_interval must be positive");
  }
  if (validation_interval < 1 || validation_episodes < 0 || test_episodes < 0) {
    throw Error("invalid train config: bad validation/test schedule");
  }
  if (momentum < 0.0 || momentum >= 1.0 || batch_size < 1) throw Error("invalid train config: bad optimizer settings");
  if (speed_samples < 1 || heading_samples < 1) throw Error("invalid train config: empty action space");
}

double TrainConfig::epsilon(int episode) const {
  if (epsilon_decay_episodes <= 0 || episode >= epsilon_decay_episodes) return epsilon_end;
  return epsilon_start + (epsilon_end - epsilon_start) * episode / epsilon_decay_episodes;
}

ActionSpace ExperimentConfig::action_space() const {
  return ActionSpace::standard(scenario.robot_v_pref, train.speed_samples, train.heading_samples);
}

void ExperimentConfig::validate() const {
  scenario.validate();
  reward.validate();
  state_forces.validate();
  network.validate();
  train.validate();
  if (network.row_width != row_width(force_augmented) || network.self_dim != self_width(force_augmented)) {
    throw Error("invalid experiment: network input widths do not match the state encoding");
  }
  for (const auto* mix : {&train.env_mix, &train.eval_env_mix}) {
    for (const EnvWeight& w : *mix) {
      if (!scenario.environments.contains(w.env_id)) throw Error("invalid experiment: unknown env " + std::to_string(w.env_id));
    }
  }
  if (!scenario.environments.contains(train.il_env)) throw Error("invalid experiment: unknown il_env");
}

namespace {

ExperimentConfig version_config(Version version) {
  ExperimentConfig config;
  config.name = to_string(version);
  config.version = version;
  switch (version) {
    case Version::Sarl:
      config.reward.variant = RewardVariant::Cri;
      break;
    case Version::Sfm:
      config.reward.variant = RewardVariant::SfmDiscounted;
      break;
    case Version::Sfm2:
      config.reward.variant = RewardVariant::Sfm;
      break;
    case Version::Sfm3:
      config.reward.variant = RewardVariant::Sfm;
      config.train.env_mix = {{1, 1.0}};
      break;
    case Version::Sfm4:
      config.reward.variant = RewardVariant::Sfm;
      config.reward.k_reward = 0.003;
      break;
    case Version::Sfm5:
      config.reward.variant = RewardVariant::Cri;
      config.force_augmented = true;
      break;
    case Version::Sfm6:
      config.reward.variant = RewardVariant::Sfm;
      config.force_augmented = true;
      break;
  }
  config.network = NetworkArch::for_states(config.force_augmented);
  return config;
}

ExperimentConfig all_obstacle_envs(Version version) {
  ExperimentConfig config = version_config(version);
  config.name += "-T2";
  config.train.env_mix = {{2, 0.25}, {3, 0.25}, {4, 0.25}, {5, 0.25}};
  config.train.eval_env_mix = config.train.env_mix;
  config.train.rl_episodes = 15000;
  config.train.test_episodes = 1000;
  return config;
}

ExperimentConfig desk() {
  ExperimentConfig config = version_config(Version::Sarl);
  config.name = "SARL-DESK";
  config.scenario.environments[1].random_elements = 5;
  config.train.il_episodes = 300;
  config.train.rl_episodes = 1000;
  config.train.env_mix = {{1, 1.0}};
  config.train.eval_env_mix = {{1, 1.0}};
  config.train.validation_interval = 500;
  config.train.validation_episodes = 100;
  config.train.test_episodes = 100;
  // Narrower layers keep two full runs inside the single-core budget.
  config.network.embed_widths = {64, 32};
  config.network.pair_widths = {32, 16};
  config.network.attn_widths = {32, 32, 1};
  config.network.value_widths = {64, 32, 32, 1};
  return config;
}

// ---- YAML writing ----------------------------------------------------------

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string vec(const Vec2& v) { return "[" + num(v.x) + ", " + num(v.y) + "]"; }

std::string int_list(const std::vector<int>& values) {
  std::string s = "[";
  for (std::size_t i = 0; i < values.size(); ++i) s += (i ? ", " : "") + std::to_string(values[i]);
  return s + "]";
}

std::string mix(const std::vector<EnvWeight>& weights) {
  std::string s = "[";
  for (std::size_t i = 0; i < weights.size(); ++i) {
    s += (i ? ", " : "") + std::string("[") + std::to_string(weights[i].env_id) + ", " + num(weights[i].probability) + "]";
  }
  return s + "]";
}

std::string concave_name(ConcavePlacement p) {
  switch (p) {
    case ConcavePlacement::None: return "none";
    case ConcavePlacement::Fixed: return "fixed";
    case ConcavePlacement::Random: return "random";
  }
  return "none";
}

ConcavePlacement concave_from(const std::string& s) {
  if (s == "none") return ConcavePlacement::None;
  if (s == "fixed") return ConcavePlacement::Fixed;
  if (s == "random") return ConcavePlacement::Random;
  throw Error("unknown concave placement: " + s);
}

// ---- YAML reading ----------------------------------------------------------

template <typename T>
void read(const YAML::Node& node, const char* key, T& out) {
  if (const YAML::Node v = node[key]) out = v.as<T>();
}

void read_vec(const YAML::Node& node, const char* key, Vec2& out) {
  if (const YAML::Node v = node[key]) {
    if (!v.IsSequence() || v.size() != 2) throw Error(std::string("expected [x, y] for ") + key);
    out = {v[0].as<double>(), v[1].as<double>()};
  }
}

void read_mix(const YAML::Node& node, const char* key, std::vector<EnvWeight>& out) {
  if (const YAML::Node v = node[key]) {
    out.clear();
    for (const YAML::Node& pair : v) {
      if (!pair.IsSequence() || pair.size() != 2) throw Error(std::string("expected [env_id, probability] in ") + key);
      out.push_back({pair[0].as<int>(), pair[1].as<double>()});
    }
  }
}

void apply_yaml(const YAML::Node& root, ExperimentConfig& c) {
  read(root, "name", c.name);

  if (const YAML::Node s = root["scenario"]) {
    ScenarioConfig& sc = c.scenario;
    read(s, "time_step", sc.time_step);
    read(s, "time_limit", sc.time_limit);
    read(s, "robot_radius", sc.robot_radius);
    read(s, "human_radius", sc.human_radius);
    read(s, "robot_v_pref", sc.robot_v_pref);
    read(s, "human_v_pref", sc.human_v_pref);
    read_vec(s, "robot_start", sc.robot_start);
    read_vec(s, "robot_goal", sc.robot_goal);
    read(s, "circle_radius", sc.circle_radius);
    read(s, "human_probability", sc.human_probability);
    read(s, "goal_angle_noise", sc.goal_angle_noise);
    read(s, "goal_radial_noise", sc.goal_radial_noise);
    read(s, "placement_margin", sc.placement_margin);
    read(s, "obstacle_region_radius", sc.obstacle_region_radius);
    read(s, "start_goal_clearance", sc.start_goal_clearance);
    read(s, "barrier_clearance", sc.barrier_clearance);
    if (const YAML::Node offsets = s["concave_offsets"]) {
      sc.concave_offsets.clear();
      for (const YAML::Node& o : offsets) sc.concave_offsets.push_back({o[0].as<double>(), o[1].as<double>()});
    }
    read_vec(s, "concave_fixed_center", sc.concave_fixed_center);
    read_vec(s, "concave_random_min", sc.concave_random_min);
    read_vec(s, "concave_random_max", sc.concave_random_max);
    read_vec(s, "barrier_region_min", sc.barrier_region_min);
    read_vec(s, "barrier_region_max", sc.barrier_region_max);
    read(s, "max_attempts", sc.max_attempts);
    if (const YAML::Node o = s["orca"]) {
      read(o, "time_horizon_agents", sc.orca.time_horizon_agents);
      read(o, "time_horizon_obstacles", sc.orca.time_horizon_obstacles);
      read(o, "neighbor_distance", sc.orca.neighbor_distance);
      read(o, "safety_margin", sc.orca.safety_margin);
    }
    if (const YAML::Node envs = s["environments"]) {
      sc.environments.clear();
      for (const auto& kv : envs) {
        EnvLayout layout;
        const YAML::Node& e = kv.second;
        read(e, "random_elements", layout.random_elements);
        read(e, "humans", layout.humans);
        if (const YAML::Node cc = e["concave"]) layout.concave = concave_from(cc.as<std::string>());
        read(e, "straight_barriers", layout.straight_barriers);
        sc.environments[kv.first.as<int>()] = layout;
      }
    }
    sc.orca.time_step = sc.time_step;
  }

  if (const YAML::Node r = root["reward"]) {
    if (const YAML::Node v = r["variant"]) c.reward.variant = reward_variant_from_string(v.as<std::string>());
    read(r, "A", c.reward.A);
    read(r, "B", c.reward.B);
    read(r, "k_reward", c.reward.k_reward);
    read(r, "collision_penalty", c.reward.collision_penalty);
    read(r, "proximity_threshold", c.reward.proximity_threshold);
    read(r, "goal_reward", c.reward.goal_reward);
    read(r, "discount_rate", c.reward.discount_rate);
    read(r, "discount_onset", c.reward.discount_onset);
    read(r, "distance_coeff", c.reward.distance_coeff);
  }

  if (const YAML::Node s = root["state"]) {
    read(s, "force_augmented", c.force_augmented);
    read(s, "a_z", c.state_forces.a_z);
    read(s, "b_z", c.state_forces.b_z);
    read(s, "d_z", c.state_forces.d_z);
  }
  c.network.row_width = row_width(c.force_augmented);
  c.network.self_dim = self_width(c.force_augmented);

  if (const YAML::Node n = root["network"]) {
    read(n, "embed", c.network.embed_widths);
    read(n, "pair", c.network.pair_widths);
    read(n, "attention", c.network.attn_widths);
    read(n, "value", c.network.value_widths);
  }

  if (const YAML::Node t = root["train"]) {
    TrainConfig& tc = c.train;
    read(t, "il_episodes", tc.il_episodes);
    read(t, "il_epochs", tc.il_epochs);
    read(t, "il_learning_rate", tc.il_learning_rate);
    read(t, "il_env", tc.il_env);
    read(t, "rl_episodes", tc.rl_episodes);
    read(t, "rl_learning_rate", tc.rl_learning_rate);
    read(t, "gamma", tc.gamma);
    read(t, "time_scaled_discount", tc.time_scaled_discount);
    read(t, "epsilon_start", tc.epsilon_start);
    read(t, "epsilon_end", tc.epsilon_end);
    read(t, "epsilon_decay_episodes", tc.epsilon_decay_episodes);
    read(t, "replay_capacity", tc.replay_capacity);
    read(t, "target_update_interval", tc.target_update_interval);
    read(t, "updates_per_state", tc.updates_per_state);
    read(t, "validation_interval", tc.validation_interval);
    read(t, "validation_episodes", tc.validation_episodes);
    read(t, "test_episodes", tc.test_episodes);
    read(t, "momentum", tc.momentum);
    read(t, "batch_size", tc.batch_size);
    read_mix(t, "env_mix", tc.env_mix);
    read_mix(t, "eval_env_mix", tc.eval_env_mix);
    read(t, "speed_samples", tc.speed_samples);
    read(t, "heading_samples", tc.heading_samples);
  }
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (Version v : all_versions()) names.push_back(to_string(v));
  names.push_back("SARL-T2");
  names.push_back("SARL-SFM6-T2");
  names.push_back("SARL-DESK");
  return names;
}

ExperimentConfig preset(const std::string& name) {
  if (name == "SARL-T2") return all_obstacle_envs(Version::Sarl);
  if (name == "SARL-SFM6-T2") return all_obstacle_envs(Version::Sfm6);
  if (name == "SARL-DESK") return desk();
  for (Version v : all_versions()) {
    if (to_string(v) == name) return version_config(v);
  }
  throw Error("unknown preset: " + name);
}

ExperimentConfig resolve_experiment(const std::string& name_or_path) {
  for (const std::string& name : preset_names()) {
    if (name == name_or_path) return preset(name);
  }
  if (std::filesystem::exists(name_or_path)) return load_experiment(name_or_path);
  throw Error("unknown preset or missing experiment file: " + name_or_path);
}

std::string experiment_to_yaml(const ExperimentConfig& c) {
  std::ostringstream y;
  const ScenarioConfig& s = c.scenario;
  y << "name: " << c.name << "\n";
  y << "version: " << to_string(c.version) << "\n";
  y << "scenario:\n";
  y << "  time_step: " << num(s.time_step) << "\n";
  y << "  time_limit: " << num(s.time_limit) << "\n";
  y << "  robot_radius: " << num(s.robot_radius) << "\n";
  y << "  human_radius: " << num(s.human_radius) << "\n";
  y << "  robot_v_pref: " << num(s.robot_v_pref) << "\n";
  y << "  human_v_pref: " << num(s.human_v_pref) << "\n";
  y << "  robot_start: " << vec(s.robot_start) << "\n";
  y << "  robot_goal: " << vec(s.robot_goal) << "\n";
  y << "  circle_radius: " << num(s.circle_radius) << "\n";
  y << "  human_probability: " << num(s.human_probability) << "\n";
  y << "  goal_angle_noise: " << num(s.goal_angle_noise) << "\n";
  y << "  goal_radial_noise: " << num(s.goal_radial_noise) << "\n";
  y << "  placement_margin: " << num(s.placement_margin) << "\n";
  y << "  obstacle_region_radius: " << num(s.obstacle_region_radius) << "\n";
  y << "  start_goal_clearance: " << num(s.start_goal_clearance) << "\n";
  y << "  barrier_clearance: " << num(s.barrier_clearance) << "\n";
  y << "  concave_offsets: [";
  for (std::size_t i = 0; i < s.concave_offsets.size(); ++i) y << (i ? ", " : "") << vec(s.concave_offsets[i]);
  y << "]\n";
  y << "  concave_fixed_center: " << vec(s.concave_fixed_center) << "\n";
  y << "  concave_random_min: " << vec(s.concave_random_min) << "\n";
  y << "  concave_random_max: " << vec(s.concave_random_max) << "\n";
  y << "  barrier_region_min: " << vec(s.barrier_region_min) << "\n";
  y << "  barrier_region_max: " << vec(s.barrier_region_max) << "\n";
  y << "  max_attempts: " << s.max_attempts << "\n";
  y << "  orca:\n";
  y << "    time_horizon_agents: " << num(s.orca.time_horizon_agents) << "\n";
  y << "    time_horizon_obstacles: " << num(s.orca.time_horizon_obstacles) << "\n";
  y << "    neighbor_distance: " << num(s.orca.neighbor_distance) << "\n";
  y << "    safety_margin: " << num(s.orca.safety_margin) << "\n";
  y << "  environments:\n";
  for (const auto& [id, layout] : s.environments) {
    y << "    " << id << ": {random_elements: " << layout.random_elements << ", humans: " << layout.humans
      << ", concave: " << concave_name(layout.concave) << ", straight_barriers: " << int_list(layout.straight_barriers)
      << "}\n";
  }
  const RewardSpec& r = c.reward;
  y << "reward:\n";
  y << "  variant: " << to_string(r.variant) << "\n";
  y << "  A: " << num(r.A) << "\n";
  y << "  B: " << num(r.B) << "\n";
  y << "  k_reward: " << num(r.k_reward) << "\n";
  y << "  collision_penalty: " << num(r.collision_penalty) << "\n";
  y << "  proximity_threshold: " << num(r.proximity_threshold) << "\n";
  y << "  goal_reward: " << num(r.goal_reward) << "\n";
  y << "  discount_rate: " << num(r.discount_rate) << "\n";
  y << "  discount_onset: " << num(r.discount_onset) << "\n";
  y << "  distance_coeff: " << num(r.distance_coeff) << "\n";
  y << "state:\n";
  y << "  force_augmented: " << (c.force_augmented ? "true" : "false") << "\n";
  y << "  a_z: " << num(c.state_forces.a_z) << "\n";
  y << "  b_z: " << num(c.state_forces.b_z) << "\n";
  y << "  d_z: " << num(c.state_forces.d_z) << "\n";
  y << "network:\n";
  y << "  embed: " << int_list(c.network.embed_widths) << "\n";
  y << "  pair: " << int_list(c.network.pair_widths) << "\n";
  y << "  attention: " << int_list(c.network.attn_widths) << "\n";
  y << "  value: " << int_list(c.network.value_widths) << "\n";
  const TrainConfig& t = c.train;
  y << "train:\n";
  y << "  il_episodes: " << t.il_episodes << "\n";
  y << "  il_epochs: " << t.il_epochs << "\n";
  y << "  il_learning_rate: " << num(t.il_learning_rate) << "\n";
  y << "  il_env: " << t.il_env << "\n";
  y << "  rl_episodes: " << t.rl_episodes << "\n";
  y << "  rl_learning_rate: " << num(t.rl_learning_rate) << "\n";
  y << "  gamma: " << num(t.gamma) << "\n";
  y << "  time_scaled_discount: " << (t.time_scaled_discount ? "true" : "false") << "\n";
  y << "  epsilon_start: " << num(t.epsilon_start) << "\n";
  y << "  epsilon_end: " << num(t.epsilon_end) << "\n";
  y << "  epsilon_decay_episodes: " << t.epsilon_decay_episodes << "\n";
  y << "  replay_capacity: " << t.replay_capacity << "\n";
  y << "  target_update_interval: " << t.target_update_interval << "\n";
  y << "  updates_per_state: " << t.updates_per_state << "\n";
  y << "  validation_interval: " << t.validation_interval << "\n";
  y << "  validation_episodes: " << t.validation_episodes << "\n";
  y << "  test_episodes: " << t.test_episodes << "\n";
  y << "  momentum: " << num(t.momentum) << "\n";
  y << "  batch_size: " << t.batch_size << "\n";
  y << "  env_mix: " << mix(t.env_mix) << "\n";
  y << "  eval_env_mix: " << mix(t.eval_env_mix) << "\n";
  y << "  speed_samples: " << t.speed_samples << "\n";
  y << "  heading_samples: " << t.heading_samples << "\n";
  return y.str();
}

ExperimentConfig experiment_from_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(std::string("malformed experiment file: ") + e.what());
  }
  ExperimentConfig config;
  try {
    if (const YAML::Node base = root["base"]) {
      config = preset(base.as<std::string>());
    } else if (const YAML::Node v = root["version"]) {
      config = version_config(version_from_string(v.as<std::string>()));
    }
    if (const YAML::Node v = root["version"]) config.version = version_from_string(v.as<std::string>());
    apply_yaml(root, config);
  } catch (const YAML::Exception& e) {
    throw Error(std::string("malformed experiment file: ") + e.what());
  }
  config.validate();
  return config;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open experiment file: " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return experiment_from_yaml(text.str());
}

void save_experiment(const ExperimentConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << experiment_to_yaml(config);
}

}  // namespace sfmnav
