#include "sfmnav/value_net.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>

#include <Eigen/Dense>

#include "sfmnav/error.hpp"
#include "sfmnav/rng.hpp"

namespace sfmnav {

namespace {

using Matrix = Eigen::MatrixXd;
using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMajorMutMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

struct Layer {
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
  int in = 0;
  int out = 0;
};

struct Mlp {
  std::vector<Layer> layers;
  int in() const { return layers.front().in; }
  int out() const { return layers.back().out; }
};

struct Layout {
  Mlp embed;
  Mlp pair;
  Mlp attn;
  Mlp value;
  std::size_t total = 0;
};

Mlp make_mlp(int in, const std::vector<int>& widths, std::size_t& offset) {
  Mlp mlp;
  for (int out : widths) {
    Layer layer;
    layer.in = in;
    layer.out = out;
    layer.weight_offset = offset;
    offset += static_cast<std::size_t>(in) * static_cast<std::size_t>(out);
    layer.bias_offset = offset;
    offset += static_cast<std::size_t>(out);
    mlp.layers.push_back(layer);
    in = out;
  }
  return mlp;
}

Layout make_layout(const NetworkArch& arch) {
  Layout layout;
  std::size_t offset = 0;
  layout.embed = make_mlp(arch.row_width, arch.embed_widths, offset);
  const int e = layout.embed.out();
  layout.pair = make_mlp(e, arch.pair_widths, offset);
  layout.attn = make_mlp(2 * e, arch.attn_widths, offset);
  layout.value = make_mlp(arch.self_dim + layout.pair.out(), arch.value_widths, offset);
  layout.total = offset;
  return layout;
}

/// Inputs to every layer plus the pre-activations of the hidden ones.
struct MlpCache {
  std::vector<Matrix> inputs;
};

Matrix mlp_forward(const Mlp& mlp, const double* weights, const Matrix& x, MlpCache* cache) {
  Matrix a = x;
  const std::size_t n_layers = mlp.layers.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    const Layer& layer = mlp.layers[l];
    const RowMajorMap w(weights + layer.weight_offset, layer.out, layer.in);
    const Eigen::Map<const Eigen::RowVectorXd> b(weights + layer.bias_offset, layer.out);
    if (cache) cache->inputs.push_back(a);
    Matrix z = a * w.transpose();
    z.rowwise() += b;
    if (l + 1 < n_layers) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

/// Accumulates parameter gradients into `grad` and returns d(loss)/d(input)
/// unless `need_input_grad` is false.
Matrix mlp_backward(const Mlp& mlp, const double* weights, const MlpCache& cache, Matrix d_out,
                    double* grad, bool need_input_grad) {
  for (std::size_t l = mlp.layers.size(); l-- > 0;) {
    const Layer& layer = mlp.layers[l];
    const Matrix& input = cache.inputs[l];
    RowMajorMutMap dw(grad + layer.weight_offset, layer.out, layer.in);
    Eigen::Map<Eigen::RowVectorXd> db(grad + layer.bias_offset, layer.out);
    dw.noalias() += d_out.transpose() * input;
    db += d_out.colwise().sum();
    if (l == 0 && !need_input_grad) return {};
    const RowMajorMap w(weights + layer.weight_offset, layer.out, layer.in);
    Matrix d_in = d_out * w;
    if (l > 0) {
      // input of layer l is relu output of layer l-1: gate by its positivity
      d_in = d_in.cwiseProduct((input.array() > 0.0).cast<double>().matrix());
    }
    d_out = std::move(d_in);
  }
  return d_out;
}

struct Batch {
  Matrix stacked;                  // all rows of all states
  std::vector<Eigen::Index> begin;  // first row of each state
  std::vector<Eigen::Index> count;  // rows per state
};

Batch stack(std::span<const StateMatrix* const> states, const NetworkArch& arch) {
  Batch batch;
  Eigen::Index total = 0;
  for (const StateMatrix* s : states) {
    if (s->rows() < 1) throw Error("state matrix has no rows");
    if (s->cols() != arch.row_width) {
      throw Error("state matrix width " + std::to_string(s->cols()) + " does not match network row width " +
                  std::to_string(arch.row_width));
    }
    batch.begin.push_back(total);
    batch.count.push_back(s->rows());
    total += s->rows();
  }
  batch.stacked.resize(total, arch.row_width);
  for (std::size_t i = 0; i < states.size(); ++i) {
    batch.stacked.middleRows(batch.begin[i], batch.count[i]) = *states[i];
  }
  return batch;
}

struct ForwardCache {
  MlpCache embed, pair, attn, value;
  Matrix embedded;   // N x e
  Matrix paired;     // N x h
  Matrix attention;  // N x 1 (softmax weights)
  Matrix values;     // B x 1
};

void network_forward(const Layout& layout, const NetworkArch& arch, const double* weights,
                     const Batch& batch, ForwardCache& cache, bool keep) {
  const auto n_states = static_cast<Eigen::Index>(batch.begin.size());
  cache.embedded = mlp_forward(layout.embed, weights, batch.stacked, keep ? &cache.embed : nullptr);
  cache.paired = mlp_forward(layout.pair, weights, cache.embedded, keep ? &cache.pair : nullptr);

  const Eigen::Index e = cache.embedded.cols();
  Matrix attn_in(cache.embedded.rows(), 2 * e);
  attn_in.leftCols(e) = cache.embedded;
  for (Eigen::Index s = 0; s < n_states; ++s) {
    const auto rows = cache.embedded.middleRows(batch.begin[s], batch.count[s]);
    const Eigen::RowVectorXd mean = rows.colwise().mean();
    attn_in.block(batch.begin[s], e, batch.count[s], e).rowwise() = mean;
  }
  const Matrix scores = mlp_forward(layout.attn, weights, attn_in, keep ? &cache.attn : nullptr);

  const Eigen::Index h = cache.paired.cols();
  cache.attention.resize(scores.rows(), 1);
  Matrix joint(n_states, arch.self_dim + h);
  for (Eigen::Index s = 0; s < n_states; ++s) {
    const auto seg = scores.col(0).segment(batch.begin[s], batch.count[s]);
    const double top = seg.maxCoeff();
    Eigen::VectorXd alpha = (seg.array() - top).exp().matrix();
    alpha /= alpha.sum();
    cache.attention.col(0).segment(batch.begin[s], batch.count[s]) = alpha;
    joint.row(s).head(arch.self_dim) = batch.stacked.row(batch.begin[s]).head(arch.self_dim);
    joint.row(s).tail(h) = alpha.transpose() * cache.paired.middleRows(batch.begin[s], batch.count[s]);
  }
  cache.values = mlp_forward(layout.value, weights, joint, keep ? &cache.value : nullptr);
}

void network_backward(const Layout& layout, const double* weights,
                      const Batch& batch, const ForwardCache& cache, const Matrix& d_values,
                      double* grad) {
  const auto n_states = static_cast<Eigen::Index>(batch.begin.size());
  const Matrix d_joint = mlp_backward(layout.value, weights, cache.value, d_values, grad, true);
  const Eigen::Index h = cache.paired.cols();
  const Matrix d_pooled = d_joint.rightCols(h);

  Matrix d_paired(cache.paired.rows(), h);
  Matrix d_scores(cache.paired.rows(), 1);
  for (Eigen::Index s = 0; s < n_states; ++s) {
    const Eigen::Index b = batch.begin[s];
    const Eigen::Index n = batch.count[s];
    const auto alpha = cache.attention.col(0).segment(b, n);
    const Eigen::RowVectorXd dc = d_pooled.row(s);
    d_paired.middleRows(b, n) = alpha * dc;
    const Eigen::VectorXd d_alpha = cache.paired.middleRows(b, n) * dc.transpose();
    const double mean_term = alpha.dot(d_alpha);
    d_scores.col(0).segment(b, n) = alpha.cwiseProduct((d_alpha.array() - mean_term).matrix());
  }

  const Matrix d_attn_in = mlp_backward(layout.attn, weights, cache.attn, d_scores, grad, true);
  const Eigen::Index e = cache.embedded.cols();
  Matrix d_embedded = d_attn_in.leftCols(e);
  for (Eigen::Index s = 0; s < n_states; ++s) {
    const Eigen::Index b = batch.begin[s];
    const Eigen::Index n = batch.count[s];
    const Eigen::RowVectorXd d_mean = d_attn_in.block(b, e, n, e).colwise().sum() / static_cast<double>(n);
    d_embedded.middleRows(b, n).rowwise() += d_mean;
  }
  d_embedded += mlp_backward(layout.pair, weights, cache.pair, d_paired, grad, true);
  mlp_backward(layout.embed, weights, cache.embed, d_embedded, grad, false);
}

void check_params(const NetworkParams& params, const Layout& layout) {
  if (params.weights.size() != layout.total) throw Error("network parameter count does not match architecture");
}

template <typename T>
void write_le(std::ostream& out, T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    value = std::bit_cast<T>(bytes);
  }
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error("corrupt checkpoint");
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    value = std::bit_cast<T>(bytes);
  }
  return value;
}

constexpr char kMagic[8] = {'S', 'F', 'M', 'N', 'A', 'V', 'N', 'N'};

}  // namespace

NetworkArch NetworkArch::for_states(bool force_augmented) {
  NetworkArch arch;
  arch.row_width = sfmnav::row_width(force_augmented);
  arch.self_dim = self_width(force_augmented);
  return arch;
}

void NetworkArch::validate() const {
  if (row_width < 1 || self_dim < 1 || self_dim > row_width) throw Error("invalid network: bad input widths");
  for (const auto* widths : {&embed_widths, &pair_widths, &attn_widths, &value_widths}) {
    if (widths->empty()) throw Error("invalid network: empty perceptron");
    for (int w : *widths) {
      if (w < 1) throw Error("invalid network: layer width must be positive");
    }
  }
  if (attn_widths.back() != 1 || value_widths.back() != 1) {
    throw Error("invalid network: attention and value heads must end in a single unit");
  }
}

std::size_t NetworkArch::parameter_count() const { return make_layout(*this).total; }

void SgdConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error("invalid sgd config: learning_rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw Error("invalid sgd config: momentum outside [0, 1)");
  if (batch_size < 1) throw Error("invalid sgd config: batch_size must be positive");
}

NetworkParams init_network(const NetworkArch& arch, std::uint64_t seed) {
  arch.validate();
  const Layout layout = make_layout(arch);
  NetworkParams params;
  params.arch = arch;
  params.weights.assign(layout.total, 0.0);
  params.momentum.assign(layout.total, 0.0);

  Rng rng(seed);
  for (const Mlp* mlp : {&layout.embed, &layout.pair, &layout.attn, &layout.value}) {
    for (const Layer& layer : mlp->layers) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
      const std::size_t end = layer.bias_offset + static_cast<std::size_t>(layer.out);
      for (std::size_t i = layer.weight_offset; i < end; ++i) params.weights[i] = uniform(rng, -bound, bound);
    }
  }
  return params;
}

ForwardResult forward_detailed(const NetworkParams& params, const StateMatrix& state) {
  const Layout layout = make_layout(params.arch);
  check_params(params, layout);
  const StateMatrix* one[] = {&state};
  const Batch batch = stack(one, params.arch);
  ForwardCache cache;
  network_forward(layout, params.arch, params.weights.data(), batch, cache, false);
  ForwardResult result;
  result.value = cache.values(0, 0);
  result.attention.assign(cache.attention.data(), cache.attention.data() + cache.attention.size());
  return result;
}

double forward(const NetworkParams& params, const StateMatrix& state) {
  return forward_detailed(params, state).value;
}

std::vector<double> forward_batch(const NetworkParams& params,
                                  std::span<const StateMatrix* const> states) {
  if (states.empty()) return {};
  const Layout layout = make_layout(params.arch);
  check_params(params, layout);
  const Batch batch = stack(states, params.arch);
  ForwardCache cache;
  network_forward(layout, params.arch, params.weights.data(), batch, cache, false);
  return {cache.values.data(), cache.values.data() + cache.values.size()};
}

double batch_gradient(const NetworkParams& params, std::span<const StateMatrix* const> states,
                      std::span<const double> targets, Gradients& mean_gradient) {
  if (states.empty() || states.size() != targets.size()) throw Error("batch_gradient: bad batch");
  const Layout layout = make_layout(params.arch);
  check_params(params, layout);
  const Batch batch = stack(states, params.arch);
  ForwardCache cache;
  network_forward(layout, params.arch, params.weights.data(), batch, cache, true);

  const auto n = static_cast<Eigen::Index>(states.size());
  Matrix d_values(n, 1);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double residual = cache.values(i, 0) - targets[static_cast<std::size_t>(i)];
    loss += 0.5 * residual * residual;
    d_values(i, 0) = residual / static_cast<double>(n);
  }
  mean_gradient.values.assign(layout.total, 0.0);
  network_backward(layout, params.weights.data(), batch, cache, d_values,
                   mean_gradient.values.data());
  return loss / static_cast<double>(n);
}

Gradients backward(const NetworkParams& params, const StateMatrix& state, double target) {
  const StateMatrix* one[] = {&state};
  const double targets[] = {target};
  Gradients gradients;
  batch_gradient(params, one, targets, gradients);
  return gradients;
}

void sgd_step(NetworkParams& params, const Gradients& mean_gradient, const SgdConfig& config) {
  if (mean_gradient.values.size() != params.weights.size()) throw Error("sgd_step: gradient size mismatch");
  const std::size_t n = params.weights.size();
  for (std::size_t i = 0; i < n; ++i) {
    params.momentum[i] = config.momentum * params.momentum[i] + mean_gradient.values[i];
    params.weights[i] -= config.learning_rate * params.momentum[i];
  }
}

void sgd_step(NetworkParams& params, std::span<const Gradients> gradient_batch,
              const SgdConfig& config) {
  if (gradient_batch.empty()) throw Error("sgd_step: empty gradient batch");
  Gradients mean;
  mean.values.assign(params.weights.size(), 0.0);
  for (const Gradients& g : gradient_batch) {
    if (g.values.size() != mean.values.size()) throw Error("sgd_step: gradient size mismatch");
    for (std::size_t i = 0; i < g.values.size(); ++i) mean.values[i] += g.values[i];
  }
  const double inv = 1.0 / static_cast<double>(gradient_batch.size());
  for (double& v : mean.values) v *= inv;
  sgd_step(params, mean, config);
}

void save(const NetworkParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open checkpoint for writing: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_le<std::uint32_t>(out, kCheckpointVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.arch.row_width));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.arch.self_dim));
  for (const auto* widths : {&params.arch.embed_widths, &params.arch.pair_widths, &params.arch.attn_widths,
                             &params.arch.value_widths}) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(widths->size()));
    for (int w : *widths) write_le<std::uint32_t>(out, static_cast<std::uint32_t>(w));
  }
  write_le<std::uint64_t>(out, params.weights.size());
  for (double w : params.weights) write_le<double>(out, w);
  for (double m : params.momentum) write_le<double>(out, m);
  if (!out) throw Error("failed writing checkpoint: " + path.string());
}

NetworkParams load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path.string());

  char magic[sizeof(kMagic)] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw Error("corrupt checkpoint");
  const auto version = read_le<std::uint32_t>(in);
  if (version != kCheckpointVersion) throw Error("unsupported checkpoint version " + std::to_string(version));

  NetworkParams params;
  params.arch.row_width = static_cast<int>(read_le<std::uint32_t>(in));
  params.arch.self_dim = static_cast<int>(read_le<std::uint32_t>(in));
  for (auto* widths : {&params.arch.embed_widths, &params.arch.pair_widths, &params.arch.attn_widths,
                       &params.arch.value_widths}) {
    const auto count = read_le<std::uint32_t>(in);
    if (count == 0 || count > 64) throw Error("corrupt checkpoint");
    widths->clear();
    for (std::uint32_t i = 0; i < count; ++i) widths->push_back(static_cast<int>(read_le<std::uint32_t>(in)));
  }
  try {
    params.arch.validate();
  } catch (const Error&) {
    throw Error("corrupt checkpoint");
  }
  const auto count = read_le<std::uint64_t>(in);
  if (count != params.arch.parameter_count()) throw Error("corrupt checkpoint");
  params.weights.resize(count);
  params.momentum.resize(count);
  for (double& w : params.weights) w = read_le<double>(in);
  for (double& m : params.momentum) m = read_le<double>(in);
  if (in.peek() != std::char_traits<char>::eof()) throw Error("corrupt checkpoint");
  return params;
}

NetworkParams load(const std::filesystem::path& path, const NetworkArch& expected) {
  NetworkParams params = load(path);
  if (!(params.arch == expected)) throw Error("checkpoint shape mismatch");
  return params;
}

}  // namespace sfmnav
