#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sfmnav/state_codec.hpp"

namespace sfmnav {

/// Layer widths of the four perceptrons. Inputs are implied: the embedding
/// reads one state row, the pair and attention heads read the embedding
/// (attention also gets the mean embedding), and the value head reads the
/// robot features plus the attention-pooled pair features. Hidden layers use
/// ReLU; every perceptron's last layer is linear.
struct NetworkArch {
  int row_width = kPlainRowWidth;
  int self_dim = kPlainSelfWidth;
  std::vector<int> embed_widths{150, 100};
  std::vector<int> pair_widths{100, 50};
  std::vector<int> attn_widths{100, 100, 1};
  std::vector<int> value_widths{150, 100, 100, 1};

  static NetworkArch for_states(bool force_augmented);
  void validate() const;
  std::size_t parameter_count() const;

  bool operator==(const NetworkArch&) const = default;
};

struct NetworkParams {
  NetworkArch arch;
  std::vector<double> weights;   // per layer: W (out x in, row-major), then b
  std::vector<double> momentum;  // same layout as weights

  bool operator==(const NetworkParams&) const = default;
};

struct Gradients {
  std::vector<double> values;  // same layout as NetworkParams::weights
};

struct SgdConfig {
  double learning_rate = 0.001;
  double momentum = 0.9;
  int batch_size = 100;

  void validate() const;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias.
NetworkParams init_network(const NetworkArch& arch, std::uint64_t seed);

struct ForwardResult {
  double value = 0.0;
  std::vector<double> attention;  // softmax weights, one per state row
};

double forward(const NetworkParams& params, const StateMatrix& state);
ForwardResult forward_detailed(const NetworkParams& params, const StateMatrix& state);

/// Values for many joint states in one pass (states may differ in row count).
std::vector<double> forward_batch(const NetworkParams& params,
                                  std::span<const StateMatrix* const> states);

/// Gradient of 0.5 * (forward - target)^2 for one state.
Gradients backward(const NetworkParams& params, const StateMatrix& state, double target);

/// Mean gradient of 0.5 * (forward - target)^2 over a batch, written into
/// `mean_gradient`. Returns the mean loss.
double batch_gradient(const NetworkParams& params, std::span<const StateMatrix* const> states,
                      std::span<const double> targets, Gradients& mean_gradient);

/// buffer = momentum * buffer + mean(batch); weights -= lr * buffer.
/// Throws Error on an empty batch.
void sgd_step(NetworkParams& params, std::span<const Gradients> gradient_batch,
              const SgdConfig& config);
void sgd_step(NetworkParams& params, const Gradients& mean_gradient, const SgdConfig& config);

/// Checkpoint layout (all integers little-endian):
///   8 bytes  magic "SFMNAVNN"
///   u32      format version (1)
///   u32      row_width, u32 self_dim
///   4 x { u32 layer count, u32 widths[count] }  embed, pair, attn, value
///   u64      parameter count P
///   P x f64  weights, then P x f64 momentum buffers
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save(const NetworkParams& params, const std::filesystem::path& path);

/// Throws Error("corrupt checkpoint") on a truncated or malformed file and
/// Error("unsupported checkpoint version") on a version mismatch.
NetworkParams load(const std::filesystem::path& path);

/// As load, and additionally requires the stored architecture to equal
/// `expected` (Error("checkpoint shape mismatch") otherwise).
NetworkParams load(const std::filesystem::path& path, const NetworkArch& expected);

}  // namespace sfmnav
