#ifndef MAPLESS_GRADCHECK_HPP
#define MAPLESS_GRADCHECK_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "policy_net.hpp"

namespace mapless {

/// Downscaled network used for finite-difference checks: 3x12x12 input,
/// default filter and hidden counts.
inline Architecture gradcheck_architecture() {
  Architecture a;
  a.input_size = 12;
  return a;
}

namespace detail {

// Straightforward dense evaluation of the A2C surrogate loss, written
// independently of the sparse/GEMM path. `signs` receives every ReLU
// pre-activation sign so callers can detect perturbations that cross a kink.
inline double reference_loss(const NetworkParams<double>& p, const UpdateBatch& batch, const DetachedTargets& fixed,
                             const A2CHyper& hyper, std::vector<std::uint8_t>* signs = nullptr) {
  const Architecture& a = p.arch;
  const int n = a.input_size, k1 = a.conv1_kernel, s1 = a.conv1_stride, f1 = a.conv1_filters;
  const int c1 = a.conv1_out(), k2 = a.conv2_kernel, s2 = a.conv2_stride, f2 = a.conv2_filters, c2 = a.conv2_out();
  const int H = a.hidden, A = a.actions;
  const auto& W1 = p[kConv1W].data;
  const auto& B1 = p[kConv1B].data;
  const auto& W2 = p[kConv2W].data;
  const auto& B2 = p[kConv2B].data;
  const auto& Wf = p[kFcW].data;
  const auto& Bf = p[kFcB].data;
  const auto& Wa = p[kActorW].data;
  const auto& Ba = p[kActorB].data;
  const auto& Wc = p[kCriticW].data;
  const double bc = p[kCriticB].data[0];
  if (signs) signs->clear();
  auto relu = [&](double x) {
    if (signs) signs->push_back(x > 0.0);
    return x > 0.0 ? x : 0.0;
  };

  double loss = 0.0;
  for (std::size_t t = 0; t < batch.size(); ++t) {
    const StateTensor& s = batch[t].state;
    // conv1[f][y][x]
    std::vector<double> a1(static_cast<std::size_t>(f1 * c1 * c1));
    for (int f = 0; f < f1; ++f)
      for (int y = 0; y < c1; ++y)
        for (int x = 0; x < c1; ++x) {
          double acc = B1[static_cast<std::size_t>(f)];
          for (int c = 0; c < 3; ++c)
            for (int ky = 0; ky < k1; ++ky)
              for (int kx = 0; kx < k1; ++kx) {
                const int iy = y * s1 + ky, ix = x * s1 + kx;
                if (iy < n && ix < n)
                  acc += W1[static_cast<std::size_t>(((c * k1 + ky) * k1 + kx) * f1 + f)] * s.at(c, iy, ix);
              }
          a1[static_cast<std::size_t>((f * c1 + y) * c1 + x)] = relu(acc);
        }
    // conv2, flattened as (y, x, g)
    std::vector<double> a2(static_cast<std::size_t>(c2 * c2 * f2));
    for (int y = 0; y < c2; ++y)
      for (int x = 0; x < c2; ++x)
        for (int g = 0; g < f2; ++g) {
          double acc = B2[static_cast<std::size_t>(g)];
          for (int ky = 0; ky < k2; ++ky)
            for (int kx = 0; kx < k2; ++kx)
              for (int f = 0; f < f1; ++f)
                acc += W2[static_cast<std::size_t>(((ky * k2 + kx) * f1 + f) * f2 + g)] *
                       a1[static_cast<std::size_t>((f * c1 + y * s2 + ky) * c1 + x * s2 + kx)];
          a2[static_cast<std::size_t>((y * c2 + x) * f2 + g)] = relu(acc);
        }
    std::vector<double> h(static_cast<std::size_t>(H));
    for (int j = 0; j < H; ++j) {
      double acc = Bf[static_cast<std::size_t>(j)];
      for (std::size_t i = 0; i < a2.size(); ++i) acc += a2[i] * Wf[i * static_cast<std::size_t>(H) + static_cast<std::size_t>(j)];
      h[static_cast<std::size_t>(j)] = relu(acc);
    }
    std::vector<double> z(static_cast<std::size_t>(A));
    double v = bc;
    for (int j = 0; j < H; ++j) v += h[static_cast<std::size_t>(j)] * Wc[static_cast<std::size_t>(j)];
    for (int i = 0; i < A; ++i) {
      double acc = Ba[static_cast<std::size_t>(i)];
      for (int j = 0; j < H; ++j) acc += h[static_cast<std::size_t>(j)] * Wa[static_cast<std::size_t>(j * A + i)];
      z[static_cast<std::size_t>(i)] = acc;
    }
    double zmax = z[0];
    for (double zi : z) zmax = std::max(zmax, zi);
    double sum = 0.0;
    for (double zi : z) sum += std::exp(zi - zmax);
    const double lse = zmax + std::log(sum);
    double entropy = 0.0;
    for (double zi : z) entropy -= std::exp(zi - lse) * (zi - lse);

    const double logp = z[static_cast<std::size_t>(index(batch[t].action))] - lse;
    const double td = fixed.target[t] - v;
    loss += -logp * fixed.advantage[t] + hyper.value_coef * td * td - hyper.entropy_coef * entropy;
  }
  return loss;
}

}  // namespace detail

struct GradCheckEntry {
  int batch = 0;
  std::string tensor;
  std::size_t element = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  int skipped_at_kinks = 0;
  bool passed = false;
};

/// Random batch of 3..8 transitions on an n x n input: sparse random
/// obstacles, one agent and one goal cell, shaped step rewards, and a final
/// transition that is either terminal or bootstrapped.
inline UpdateBatch random_batch(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(3, 8), cell(0, n - 1), act(0, kActionCount - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0), shaped(-std::sqrt(2.0), std::sqrt(2.0));
  auto random_state = [&] {
    StateTensor s(n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) s.at(kObstaclePlane, r, c) = unit(rng) < 0.2;
    s.at(kAgentPlane, cell(rng), cell(rng)) = 1;
    s.at(kGoalPlane, cell(rng), cell(rng)) = 1;
    return s;
  };
  const int T = len(rng);
  UpdateBatch batch;
  for (int t = 0; t < T; ++t) batch.push_back({random_state(), action_from_index(act(rng)), shaped(rng), false, std::nullopt});
  if (unit(rng) < 0.5) {
    batch.back().done = true;
    batch.back().reward = unit(rng) < 0.5 ? kGoalReward : kCrashReward;
  } else {
    batch.back().next_state = random_state();
  }
  return batch;
}

/// Compares the analytic gradient of the A2C loss against central finite
/// differences of an independent dense evaluation, in double precision.
/// Parameters whose +-eps perturbation flips any ReLU are redrawn, since
/// finite differences are meaningless across a kink.
inline GradCheckReport gradient_check(std::uint64_t seed, int n_batches = 10, int params_per_batch = 50,
                                      double eps = 1e-3, double tolerance = 1e-4,
                                      const Architecture& arch = gradcheck_architecture()) {
  std::mt19937_64 rng(seed);
  A2CHyper hyper;
  hyper.entropy_coef = 0.05;  // large enough that the entropy term shows up in the check
  GradCheckReport report;

  for (int b = 0; b < n_batches; ++b) {
    // a draw that keeps landing on kinks is replaced by a fresh one
    for (int draw = 0; draw < 50; ++draw) {
      auto params = init_params<double>(arch, rng(), 1.0);
      std::uniform_real_distribution<double> bias(0.05, 0.2);
      std::bernoulli_distribution negative(0.5);
      for (ParamId id : {kConv1B, kConv2B, kFcB, kActorB, kCriticB})
        for (auto& v : params[id].data) v = negative(rng) ? -bias(rng) : bias(rng);
      const UpdateBatch batch = random_batch(arch.input_size, rng);

      ForwardPass<double> fp;
      std::vector<const StateTensor*> states;
      for (const auto& tr : batch) states.push_back(&tr.state);
      forward_batch(params, std::span<const StateTensor* const>(states), fp);
      const DetachedTargets fixed = compute_targets(params, batch, hyper.gamma, fp);

      NetworkParams<double> grad;
      loss_and_gradient(params, batch, hyper, grad, &fixed);

      std::vector<std::uint8_t> base_signs, signs;
      detail::reference_loss(params, batch, fixed, hyper, &base_signs);

      std::vector<GradCheckEntry> found;
      int attempts = 0;
      while (static_cast<int>(found.size()) < params_per_batch && attempts < params_per_batch * 4) {
        ++attempts;
        // spread checks over every tensor
        const auto tid = static_cast<std::size_t>(found.size() % kParamTensorCount);
        auto& w = params.tensors[tid].data;
        const std::size_t i = std::uniform_int_distribution<std::size_t>(0, w.size() - 1)(rng);
        const double saved = w[i];
        w[i] = saved + eps;
        const double up = detail::reference_loss(params, batch, fixed, hyper, &signs);
        const bool kink_up = signs != base_signs;
        w[i] = saved - eps;
        const double down = detail::reference_loss(params, batch, fixed, hyper, &signs);
        const bool kink_down = signs != base_signs;
        w[i] = saved;
        if (kink_up || kink_down) {
          ++report.skipped_at_kinks;
          continue;
        }
        const double numeric = (up - down) / (2.0 * eps);
        const double analytic = grad.tensors[tid].data[i];
        const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        found.push_back({b, params.tensors[tid].name, i, analytic, numeric, std::abs(analytic - numeric) / scale});
      }
      if (static_cast<int>(found.size()) < params_per_batch) continue;
      for (const auto& e : found) report.max_rel_error = std::max(report.max_rel_error, e.rel_error);
      report.entries.insert(report.entries.end(), found.begin(), found.end());
      break;
    }
  }
  report.passed = report.max_rel_error < tolerance &&
                  static_cast<int>(report.entries.size()) == n_batches * params_per_batch;
  return report;
}

}  // namespace mapless

#endif  // MAPLESS_GRADCHECK_HPP
