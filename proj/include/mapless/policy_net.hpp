#ifndef MAPLESS_POLICY_NET_HPP
#define MAPLESS_POLICY_NET_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "agent_ground.hpp"
#include "errors.hpp"
#include "grid_mdp.hpp"

namespace mapless {

/// Layer sizes of the actor-critic network:
/// conv(k1, stride s1) -> relu -> conv(k2, stride s2) -> relu -> fc -> relu -> {actor, critic}.
struct Architecture {
  int input_size = kGroundSize;
  int channels = StateTensor::kChannels;
  int conv1_filters = 16;
  int conv1_kernel = 5;
  int conv1_stride = 2;
  int conv2_filters = 32;
  int conv2_kernel = 3;
  int conv2_stride = 2;
  int hidden = 256;
  int actions = kActionCount;

  int conv1_out() const { return (input_size - conv1_kernel) / conv1_stride + 1; }
  int conv2_out() const { return (conv1_out() - conv2_kernel) / conv2_stride + 1; }
  int flat() const { return conv2_out() * conv2_out() * conv2_filters; }

  void validate() const {
    if (input_size < conv1_kernel || conv1_out() < conv2_kernel || conv2_out() < 1)
      throw parameter_error("architecture: input too small for the convolution stack");
    if (conv1_filters < 1 || conv2_filters < 1 || hidden < 1 || conv1_stride < 1 || conv2_stride < 1)
      throw parameter_error("architecture: sizes must be positive");
    if (channels != StateTensor::kChannels || actions != kActionCount)
      throw parameter_error("architecture: channel and action counts are fixed at 3 and 8");
  }

  std::string describe() const {
    std::ostringstream s;
    s << "in" << input_size << "x" << channels << "-c" << conv1_filters << "k" << conv1_kernel << "s" << conv1_stride
      << "-c" << conv2_filters << "k" << conv2_kernel << "s" << conv2_stride << "-fc" << hidden << "-a" << actions;
    return s.str();
  }

  /// FNV-1a over describe().
  std::uint64_t digest() const {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : describe()) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    return h;
  }

  bool operator==(const Architecture&) const = default;
};

// Eigen-aligned storage keeps vectorized reductions in a fixed order, so
// results do not depend on where the allocator places a buffer.
template <typename Scalar>
using AlignedVector = std::vector<Scalar, Eigen::aligned_allocator<Scalar>>;

template <typename Scalar>
struct Tensor {
  std::string name;
  std::vector<int> shape;
  AlignedVector<Scalar> data;

  std::size_t size() const { return data.size(); }
  bool operator==(const Tensor&) const = default;
};

enum ParamId : int {
  kConv1W, kConv1B, kConv2W, kConv2B, kFcW, kFcB, kActorW, kActorB, kCriticW, kCriticB, kParamTensorCount
};

/// All network weights. Tensor order is fixed by ParamId.
///
/// Layouts (row-major): conv1.weight [channels, k1, k1, f1],
/// conv2.weight [k2, k2, f1, f2], fc.weight [flat, hidden],
/// actor.weight [hidden, actions], critic.weight [hidden, 1]. Activations are
/// stored height-width-channel, so `flat` enumerates (row, col, filter).
template <typename Scalar>
struct NetworkParams {
  Architecture arch;
  std::vector<Tensor<Scalar>> tensors;

  Tensor<Scalar>& operator[](ParamId id) { return tensors[static_cast<std::size_t>(id)]; }
  const Tensor<Scalar>& operator[](ParamId id) const { return tensors[static_cast<std::size_t>(id)]; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors) n += t.size();
    return n;
  }

  static NetworkParams zeros(const Architecture& arch) {
    arch.validate();
    NetworkParams p;
    p.arch = arch;
    auto add = [&](std::string name, std::vector<int> shape) {
      std::size_t n = 1;
      for (int d : shape) n *= static_cast<std::size_t>(d);
      p.tensors.push_back({std::move(name), std::move(shape), AlignedVector<Scalar>(n, Scalar(0))});
    };
    add("conv1.weight", {arch.channels, arch.conv1_kernel, arch.conv1_kernel, arch.conv1_filters});
    add("conv1.bias", {arch.conv1_filters});
    add("conv2.weight", {arch.conv2_kernel, arch.conv2_kernel, arch.conv1_filters, arch.conv2_filters});
    add("conv2.bias", {arch.conv2_filters});
    add("fc.weight", {arch.flat(), arch.hidden});
    add("fc.bias", {arch.hidden});
    add("actor.weight", {arch.hidden, arch.actions});
    add("actor.bias", {arch.actions});
    add("critic.weight", {arch.hidden, 1});
    add("critic.bias", {1});
    return p;
  }

  bool operator==(const NetworkParams&) const = default;
};

template <typename To, typename From>
NetworkParams<To> cast_params(const NetworkParams<From>& in) {
  NetworkParams<To> out;
  out.arch = in.arch;
  for (const auto& t : in.tensors)
    out.tensors.push_back({t.name, t.shape, std::vector<To>(t.data.begin(), t.data.end())});
  return out;
}

/// Fan-in scaled uniform initialization (He-uniform for the ReLU layers),
/// zero biases. The heads start `head_scale` times smaller so the initial
/// policy is close to uniform.
template <typename Scalar>
NetworkParams<Scalar> init_params(const Architecture& arch, std::uint64_t seed, double head_scale = 0.01) {
  auto p = NetworkParams<Scalar>::zeros(arch);
  std::mt19937_64 rng(seed);
  auto fill = [&](ParamId id, int fan_in, double scale) {
    const double bound = scale * std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> u(-bound, bound);
    for (auto& w : p[id].data) w = static_cast<Scalar>(u(rng));
  };
  fill(kConv1W, arch.channels * arch.conv1_kernel * arch.conv1_kernel, 1.0);
  fill(kConv2W, arch.conv2_kernel * arch.conv2_kernel * arch.conv1_filters, 1.0);
  fill(kFcW, arch.flat(), 1.0);
  fill(kActorW, arch.hidden, head_scale);
  fill(kCriticW, arch.hidden, head_scale);
  return p;
}

// ---------------------------------------------------------------------------
// Forward / backward

struct PolicyOutput {
  std::array<double, kActionCount> probabilities{};
  double value = 0.0;
};

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using MatrixMap = Eigen::Map<RowMatrix<Scalar>>;
template <typename Scalar>
using ConstMatrixMap = Eigen::Map<const RowMatrix<Scalar>>;
template <typename Scalar>
using RowVectorMap = Eigen::Map<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>;

namespace detail {

struct ActivePixel {
  int channel;
  int row;
  int col;
};

inline std::vector<ActivePixel> active_pixels(const StateTensor& s) {
  std::vector<ActivePixel> out;
  for (int c = 0; c < StateTensor::kChannels; ++c)
    for (int r = 0; r < s.size; ++r)
      for (int col = 0; col < s.size; ++col)
        if (s.at(c, r, col)) out.push_back({c, r, col});
  return out;
}

// Calls fn(weight_row, out_position) for every conv1 tap touched by an active
// input pixel. Inputs are binary, so the first convolution is a scatter of
// kernel columns.
template <typename Fn>
void for_each_conv1_tap(const Architecture& a, const ActivePixel& px, Fn&& fn) {
  const int k = a.conv1_kernel, s = a.conv1_stride, out = a.conv1_out();
  for (int ky = px.row % s; ky < k && ky <= px.row; ky += s) {
    const int oy = (px.row - ky) / s;
    if (oy >= out) continue;
    for (int kx = px.col % s; kx < k && kx <= px.col; kx += s) {
      const int ox = (px.col - kx) / s;
      if (ox >= out) continue;
      fn((px.channel * k + ky) * k + kx, oy * out + ox);
    }
  }
}

template <typename Scalar>
void im2col_conv2(const Architecture& a, const Scalar* act1, Scalar* patches) {
  const int in = a.conv1_out(), out = a.conv2_out(), k = a.conv2_kernel, s = a.conv2_stride, f = a.conv1_filters;
  for (int oy = 0; oy < out; ++oy)
    for (int ox = 0; ox < out; ++ox) {
      Scalar* row = patches + static_cast<std::ptrdiff_t>(oy * out + ox) * k * k * f;
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx) {
          const Scalar* src = act1 + static_cast<std::ptrdiff_t>((oy * s + ky) * in + (ox * s + kx)) * f;
          std::copy(src, src + f, row + (ky * k + kx) * f);
        }
    }
}

template <typename Scalar>
void col2im_conv2(const Architecture& a, const Scalar* dpatches, Scalar* dact1) {
  const int in = a.conv1_out(), out = a.conv2_out(), k = a.conv2_kernel, s = a.conv2_stride, f = a.conv1_filters;
  for (int oy = 0; oy < out; ++oy)
    for (int ox = 0; ox < out; ++ox) {
      const Scalar* row = dpatches + static_cast<std::ptrdiff_t>(oy * out + ox) * k * k * f;
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx) {
          Scalar* dst = dact1 + static_cast<std::ptrdiff_t>((oy * s + ky) * in + (ox * s + kx)) * f;
          const Scalar* src = row + (ky * k + kx) * f;
          for (int i = 0; i < f; ++i) dst[i] += src[i];
        }
    }
}

}  // namespace detail

/// Activations of a batch of states, kept for the backward pass.
template <typename Scalar>
struct ForwardPass {
  int batch = 0;
  std::vector<std::vector<detail::ActivePixel>> pixels;
  AlignedVector<Scalar> act1;    // batch x conv1_out^2 x f1, post-relu
  AlignedVector<Scalar> act2;    // batch x flat, post-relu
  AlignedVector<Scalar> hidden;  // batch x hidden, post-relu
  AlignedVector<Scalar> logits;  // batch x actions
  AlignedVector<Scalar> probs;   // batch x actions
  AlignedVector<Scalar> value;   // batch
};

inline constexpr int kSparseFcMaxBatch = 4;

template <typename Scalar>
void forward_batch(const NetworkParams<Scalar>& p, std::span<const StateTensor* const> states, ForwardPass<Scalar>& fp) {
  const Architecture& a = p.arch;
  const int B = static_cast<int>(states.size());
  const int c1 = a.conv1_out(), c2 = a.conv2_out(), f1 = a.conv1_filters, f2 = a.conv2_filters;
  const int pos1 = c1 * c1, pos2 = c2 * c2, patch = a.conv2_kernel * a.conv2_kernel * f1;
  const int flat = a.flat(), H = a.hidden, A = a.actions;

  fp.batch = B;
  fp.pixels.resize(static_cast<std::size_t>(B));
  fp.act1.assign(static_cast<std::size_t>(B) * pos1 * f1, Scalar(0));
  fp.act2.resize(static_cast<std::size_t>(B) * flat);
  fp.hidden.resize(static_cast<std::size_t>(B) * H);
  fp.logits.resize(static_cast<std::size_t>(B) * A);
  fp.probs.resize(static_cast<std::size_t>(B) * A);
  fp.value.resize(static_cast<std::size_t>(B));

  const Scalar* w1 = p[kConv1W].data.data();
  const Scalar* b1 = p[kConv1B].data.data();
  ConstMatrixMap<Scalar> w2(p[kConv2W].data.data(), patch, f2);
  RowVectorMap<Scalar> b2(p[kConv2B].data.data(), f2);
  RowMatrix<Scalar> patches(pos2, patch);

  for (int b = 0; b < B; ++b) {
    const StateTensor& s = *states[static_cast<std::size_t>(b)];
    if (s.size != a.input_size)
      throw contract_error("state is " + std::to_string(s.size) + " cells wide, network expects " +
                           std::to_string(a.input_size));
    auto& px = fp.pixels[static_cast<std::size_t>(b)];
    px = detail::active_pixels(s);

    Scalar* act1 = fp.act1.data() + static_cast<std::ptrdiff_t>(b) * pos1 * f1;
    for (int q = 0; q < pos1; ++q) std::copy(b1, b1 + f1, act1 + static_cast<std::ptrdiff_t>(q) * f1);
    for (const auto& pixel : px)
      detail::for_each_conv1_tap(a, pixel, [&](int tap, int pos) {
        const Scalar* w = w1 + static_cast<std::ptrdiff_t>(tap) * f1;
        Scalar* o = act1 + static_cast<std::ptrdiff_t>(pos) * f1;
        for (int f = 0; f < f1; ++f) o[f] += w[f];
      });
    for (int i = 0; i < pos1 * f1; ++i) act1[i] = std::max(act1[i], Scalar(0));

    detail::im2col_conv2(a, act1, patches.data());
    MatrixMap<Scalar> out2(fp.act2.data() + static_cast<std::ptrdiff_t>(b) * flat, pos2, f2);
    out2.noalias() = patches * w2;
    out2.rowwise() += b2;
    out2 = out2.cwiseMax(Scalar(0));
  }

  ConstMatrixMap<Scalar> x(fp.act2.data(), B, flat);
  ConstMatrixMap<Scalar> wfc(p[kFcW].data.data(), flat, H);
  MatrixMap<Scalar> h(fp.hidden.data(), B, H);
  if (B <= kSparseFcMaxBatch) {
    // post-relu features are mostly zero; only their weight rows are read
    h.setZero();
    for (int b = 0; b < B; ++b)
      for (int i = 0; i < flat; ++i)
        if (x(b, i) != Scalar(0)) h.row(b).noalias() += x(b, i) * wfc.row(i);
  } else {
    h.noalias() = x * wfc;
  }
  h.rowwise() += RowVectorMap<Scalar>(p[kFcB].data.data(), H);
  h = h.cwiseMax(Scalar(0));

  MatrixMap<Scalar> logits(fp.logits.data(), B, A);
  logits.noalias() = h * ConstMatrixMap<Scalar>(p[kActorW].data.data(), H, A);
  logits.rowwise() += RowVectorMap<Scalar>(p[kActorB].data.data(), A);
  Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> value(fp.value.data(), B);
  value.noalias() = h * Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(p[kCriticW].data.data(), H);
  value.array() += p[kCriticB].data[0];

  for (int b = 0; b < B; ++b) {
    const Scalar* z = fp.logits.data() + static_cast<std::ptrdiff_t>(b) * A;
    Scalar* pr = fp.probs.data() + static_cast<std::ptrdiff_t>(b) * A;
    const Scalar m = *std::max_element(z, z + A);
    Scalar sum = 0;
    for (int i = 0; i < A; ++i) sum += (pr[i] = std::exp(z[i] - m));
    for (int i = 0; i < A; ++i) pr[i] /= sum;
  }
}

template <typename Scalar>
PolicyOutput forward(const NetworkParams<Scalar>& p, const StateTensor& state) {
  ForwardPass<Scalar> fp;
  const StateTensor* s = &state;
  forward_batch(p, std::span<const StateTensor* const>(&s, 1), fp);
  PolicyOutput out;
  for (int i = 0; i < kActionCount; ++i) out.probabilities[static_cast<std::size_t>(i)] = fp.probs[static_cast<std::size_t>(i)];
  out.value = fp.value[0];
  return out;
}

/// Backpropagates d(loss)/d(logits) and d(loss)/d(value) through a stored
/// forward pass, accumulating into `grad` (same shapes as the params).
template <typename Scalar>
void backward_batch(const NetworkParams<Scalar>& p, const ForwardPass<Scalar>& fp, std::span<const Scalar> dlogits_in,
                    std::span<const Scalar> dvalue_in, NetworkParams<Scalar>& grad) {
  const Architecture& a = p.arch;
  const int B = fp.batch;
  const int c1 = a.conv1_out(), c2 = a.conv2_out(), f1 = a.conv1_filters, f2 = a.conv2_filters;
  const int pos1 = c1 * c1, pos2 = c2 * c2, patch = a.conv2_kernel * a.conv2_kernel * f1;
  const int flat = a.flat(), H = a.hidden, A = a.actions;

  ConstMatrixMap<Scalar> dlogits(dlogits_in.data(), B, A);
  Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> dvalue(dvalue_in.data(), B);
  ConstMatrixMap<Scalar> h(fp.hidden.data(), B, H);

  MatrixMap<Scalar>(grad[kActorW].data.data(), H, A).noalias() += h.transpose() * dlogits;
  Eigen::Map<Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>(grad[kActorB].data.data(), A) += dlogits.colwise().sum();
  Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(grad[kCriticW].data.data(), H).noalias() +=
      h.transpose() * dvalue;
  grad[kCriticB].data[0] += dvalue.sum();

  RowMatrix<Scalar> dh = dlogits * ConstMatrixMap<Scalar>(p[kActorW].data.data(), H, A).transpose();
  dh.noalias() += dvalue * Eigen::Map<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>(p[kCriticW].data.data(), H);
  dh = (h.array() > Scalar(0)).select(dh, Scalar(0));

  ConstMatrixMap<Scalar> x(fp.act2.data(), B, flat);
  MatrixMap<Scalar>(grad[kFcW].data.data(), flat, H).noalias() += x.transpose() * dh;
  Eigen::Map<Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>(grad[kFcB].data.data(), H) += dh.colwise().sum();

  RowMatrix<Scalar> dx = dh * ConstMatrixMap<Scalar>(p[kFcW].data.data(), flat, H).transpose();
  dx = (x.array() > Scalar(0)).select(dx, Scalar(0));

  ConstMatrixMap<Scalar> w2(p[kConv2W].data.data(), patch, f2);
  MatrixMap<Scalar> dw2(grad[kConv2W].data.data(), patch, f2);
  Eigen::Map<Eigen::Matrix<Scalar, 1, Eigen::Dynamic>> db2(grad[kConv2B].data.data(), f2);
  Scalar* dw1 = grad[kConv1W].data.data();
  Scalar* db1 = grad[kConv1B].data.data();
  RowMatrix<Scalar> patches(pos2, patch), dpatches(pos2, patch);
  AlignedVector<Scalar> dact1(static_cast<std::size_t>(pos1) * f1);

  for (int b = 0; b < B; ++b) {
    const Scalar* act1 = fp.act1.data() + static_cast<std::ptrdiff_t>(b) * pos1 * f1;
    Eigen::Map<const RowMatrix<Scalar>> dout2(dx.data() + static_cast<std::ptrdiff_t>(b) * flat, pos2, f2);
    detail::im2col_conv2(a, act1, patches.data());
    dw2.noalias() += patches.transpose() * dout2;
    db2 += dout2.colwise().sum();
    dpatches.noalias() = dout2 * w2.transpose();

    std::fill(dact1.begin(), dact1.end(), Scalar(0));
    detail::col2im_conv2(a, dpatches.data(), dact1.data());
    for (int i = 0; i < pos1 * f1; ++i)
      if (!(act1[i] > Scalar(0))) dact1[static_cast<std::size_t>(i)] = Scalar(0);
    for (int q = 0; q < pos1; ++q)
      for (int f = 0; f < f1; ++f) db1[f] += dact1[static_cast<std::size_t>(q * f1 + f)];
    for (const auto& pixel : fp.pixels[static_cast<std::size_t>(b)])
      detail::for_each_conv1_tap(a, pixel, [&](int tap, int pos) {
        Scalar* g = dw1 + static_cast<std::ptrdiff_t>(tap) * f1;
        const Scalar* d = dact1.data() + static_cast<std::ptrdiff_t>(pos) * f1;
        for (int f = 0; f < f1; ++f) g[f] += d[f];
      });
  }
}

// ---------------------------------------------------------------------------
// A2C

inline double td_error(double reward, double value, double next_value, bool done, double gamma) {
  return reward + gamma * next_value * (done ? 0.0 : 1.0) - value;
}

/// One environment transition. When `done` is false and `next_state` is
/// empty, the next state is the following transition's state.
struct Transition {
  StateTensor state;
  Action action = Action::N;
  double reward = 0.0;
  bool done = false;
  std::optional<StateTensor> next_state;
};

using UpdateBatch = std::vector<Transition>;

inline void validate_batch(const UpdateBatch& batch) {
  if (batch.empty()) throw contract_error("update batch is empty");
  for (std::size_t t = 0; t < batch.size(); ++t) {
    if (batch[t].done && t + 1 != batch.size()) throw contract_error("terminal transition must be the last in a batch");
    if (!batch[t].done && !batch[t].next_state && t + 1 == batch.size())
      throw contract_error("non-terminal final transition needs a next state");
  }
}

struct A2CHyper {
  double learning_rate = 3e-4;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double gamma = 0.99;
  double grad_clip = 5.0;  // global L2 norm; <= 0 disables
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct LossReport {
  double policy_loss = 0.0;  // -sum log pi(a|s) * delta
  double value_loss = 0.0;   // sum delta^2
  double entropy = 0.0;      // sum H(pi(.|s))
  double total = 0.0;        // policy + c_v * value - c_e * entropy
  double grad_norm = 0.0;    // before clipping
  std::size_t transitions = 0;
};

/// Quantities treated as constants by the loss: the advantage in the policy
/// term and the bootstrapped target of the critic.
struct DetachedTargets {
  std::vector<double> advantage;
  std::vector<double> target;
};

template <typename Scalar>
DetachedTargets compute_targets(const NetworkParams<Scalar>& p, const UpdateBatch& batch, double gamma,
                                const ForwardPass<Scalar>& fp) {
  const std::size_t T = batch.size();
  DetachedTargets out;
  out.advantage.resize(T);
  out.target.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    const Transition& tr = batch[t];
    double next_value = 0.0;
    if (!tr.done) {
      if (!tr.next_state || (t + 1 < T && *tr.next_state == batch[t + 1].state)) next_value = fp.value[t + 1];
      else next_value = forward(p, *tr.next_state).value;
    }
    const double v = fp.value[t];
    out.advantage[t] = td_error(tr.reward, v, next_value, tr.done, gamma);
    out.target[t] = tr.reward + (tr.done ? 0.0 : gamma * next_value);
  }
  return out;
}

/// Gradient of
///   L = -sum_t log pi(a_t|s_t) * adv_t + c_v * sum_t (target_t - V(s_t))^2 - c_e * sum_t H(pi(.|s_t))
/// with adv and target held fixed. Accumulates into `grad` (zeroed here).
template <typename Scalar>
LossReport loss_and_gradient(const NetworkParams<Scalar>& p, const UpdateBatch& batch, const A2CHyper& hyper,
                             NetworkParams<Scalar>& grad, const DetachedTargets* fixed = nullptr) {
  validate_batch(batch);
  const std::size_t T = batch.size();
  std::vector<const StateTensor*> states;
  states.reserve(T);
  for (const auto& tr : batch) states.push_back(&tr.state);
  ForwardPass<Scalar> fp;
  forward_batch(p, std::span<const StateTensor* const>(states), fp);

  const DetachedTargets targets = fixed ? *fixed : compute_targets(p, batch, hyper.gamma, fp);
  const int A = p.arch.actions;
  AlignedVector<Scalar> dlogits(T * static_cast<std::size_t>(A)), dvalue(T);
  LossReport rep;
  rep.transitions = T;
  for (std::size_t t = 0; t < T; ++t) {
    const Scalar* pr = fp.probs.data() + t * static_cast<std::size_t>(A);
    const Scalar* z = fp.logits.data() + t * static_cast<std::size_t>(A);
    const int a = index(batch[t].action);
    // log-softmax from logits keeps tiny probabilities finite
    const Scalar zmax = *std::max_element(z, z + A);
    Scalar lse = 0;
    for (int i = 0; i < A; ++i) lse += std::exp(z[i] - zmax);
    lse = zmax + std::log(lse);
    double entropy = 0.0;
    for (int i = 0; i < A; ++i) entropy -= static_cast<double>(pr[i]) * static_cast<double>(z[i] - lse);
    const double adv = targets.advantage[t];
    const double td = targets.target[t] - static_cast<double>(fp.value[t]);
    rep.policy_loss -= static_cast<double>(z[a] - lse) * adv;
    rep.value_loss += td * td;
    rep.entropy += entropy;
    for (int i = 0; i < A; ++i) {
      const double pi = pr[i];
      const double logp = static_cast<double>(z[i] - lse);
      const double dpolicy = -adv * ((i == a ? 1.0 : 0.0) - pi);
      const double dentropy = hyper.entropy_coef * pi * (logp + entropy);
      dlogits[t * static_cast<std::size_t>(A) + static_cast<std::size_t>(i)] = static_cast<Scalar>(dpolicy + dentropy);
    }
    dvalue[t] = static_cast<Scalar>(-2.0 * hyper.value_coef * td);
  }
  rep.total = rep.policy_loss + hyper.value_coef * rep.value_loss - hyper.entropy_coef * rep.entropy;

  grad = NetworkParams<Scalar>::zeros(p.arch);
  backward_batch(p, fp, std::span<const Scalar>(dlogits), std::span<const Scalar>(dvalue), grad);
  return rep;
}

class non_finite_gradient : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
struct AdamState {
  std::vector<AlignedVector<Scalar>> m;
  std::vector<AlignedVector<Scalar>> v;
  long step = 0;
};

/// One synchronous advantage actor-critic update over a batch (typically a
/// whole episode). Rejects the update if any gradient element is non-finite.
template <typename Scalar>
LossReport a2c_update(NetworkParams<Scalar>& params, const UpdateBatch& batch, const A2CHyper& hyper,
                      AdamState<Scalar>& adam) {
  NetworkParams<Scalar> grad;
  LossReport rep = loss_and_gradient(params, batch, hyper, grad);

  double sq = 0.0;
  for (const auto& t : grad.tensors)
    for (std::size_t i = 0; i < t.data.size(); ++i) {
      const double g = t.data[i];
      if (!std::isfinite(g))
        throw non_finite_gradient("non-finite gradient in " + t.name + " element " + std::to_string(i));
      sq += g * g;
    }
  rep.grad_norm = std::sqrt(sq);
  const double clip = (hyper.grad_clip > 0.0 && rep.grad_norm > hyper.grad_clip) ? hyper.grad_clip / rep.grad_norm : 1.0;

  if (adam.m.empty()) {
    for (const auto& t : params.tensors) {
      adam.m.emplace_back(t.size(), Scalar(0));
      adam.v.emplace_back(t.size(), Scalar(0));
    }
  }
  ++adam.step;
  const double b1 = hyper.adam_beta1, b2 = hyper.adam_beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(adam.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(adam.step));
  const Scalar step_size = static_cast<Scalar>(hyper.learning_rate * std::sqrt(bc2) / bc1);
  const Scalar eps = static_cast<Scalar>(hyper.adam_eps * std::sqrt(bc2));
  const Scalar sb1 = static_cast<Scalar>(b1), sb2 = static_cast<Scalar>(b2), sclip = static_cast<Scalar>(clip);
  for (std::size_t k = 0; k < params.tensors.size(); ++k) {
    auto& w = params.tensors[k].data;
    const auto& g = grad.tensors[k].data;
    auto& m = adam.m[k];
    auto& v = adam.v[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const Scalar gi = g[i] * sclip;
      m[i] = sb1 * m[i] + (Scalar(1) - sb1) * gi;
      v[i] = sb2 * v[i] + (Scalar(1) - sb2) * gi * gi;
      w[i] -= step_size * m[i] / (std::sqrt(v[i]) + eps);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Action selection

enum class SelectMode : std::uint8_t { sample, greedy };

inline Action select_action(const PolicyOutput& out, SelectMode mode, std::mt19937_64& rng) {
  if (mode == SelectMode::greedy) {
    int best = 0;
    for (int i = 1; i < kActionCount; ++i)
      if (out.probabilities[static_cast<std::size_t>(i)] > out.probabilities[static_cast<std::size_t>(best)]) best = i;
    return action_from_index(best);
  }
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (int i = 0; i < kActionCount; ++i) {
    acc += out.probabilities[static_cast<std::size_t>(i)];
    if (u < acc) return action_from_index(i);
  }
  // u landed in the rounding slack above the cumulative sum
  for (int i = kActionCount - 1; i >= 0; --i)
    if (out.probabilities[static_cast<std::size_t>(i)] > 0.0) return action_from_index(i);
  return Action::N;
}

inline double policy_entropy(const PolicyOutput& out) {
  double h = 0.0;
  for (double p : out.probabilities)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

}  // namespace mapless

#endif  // MAPLESS_POLICY_NET_HPP
