#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include <mapless/gradcheck.hpp>
#include <mapless/policy_net.hpp>

using namespace mapless;

namespace {

StateTensor random_state(std::mt19937_64& rng, int n = kGroundSize, double density = 0.05) {
  std::bernoulli_distribution obstacle(density);
  std::uniform_int_distribution<int> cell(0, n - 1);
  StateTensor s(n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) s.at(kObstaclePlane, r, c) = obstacle(rng);
  s.at(kAgentPlane, n / 2, n / 2) = 1;
  s.at(kGoalPlane, cell(rng), cell(rng)) = 1;
  return s;
}

double log_prob(const NetworkParams<float>& p, const StateTensor& s, Action a) {
  return std::log(forward(p, s).probabilities[static_cast<std::size_t>(index(a))]);
}

}  // namespace

TEST(Forward, ZeroHeadsGiveUniformPolicy) {
  const auto p = init_params<float>(Architecture{}, 1, 0.0);
  std::mt19937_64 rng(1);
  const PolicyOutput out = forward(p, random_state(rng));
  for (double q : out.probabilities) EXPECT_DOUBLE_EQ(q, 0.125);
  EXPECT_DOUBLE_EQ(out.value, 0.0);
  EXPECT_NEAR(policy_entropy(out), std::log(8.0), 1e-12);
}

TEST(Forward, NormalizedAndDeterministic) {
  const auto p = init_params<float>(Architecture{}, 2, 1.0);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 5; ++i) {
    const StateTensor s = random_state(rng);
    const PolicyOutput a = forward(p, s), b = forward(p, s);
    double sum = 0.0;
    for (double q : a.probabilities) {
      sum += q;
      EXPECT_GT(q, 0.0);
      EXPECT_LT(q, 1.0);
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
    EXPECT_EQ(a.probabilities, b.probabilities);
    EXPECT_EQ(a.value, b.value);
  }
  EXPECT_EQ(init_params<float>(Architecture{}, 2, 1.0), p);
}

TEST(Forward, ShapeMismatchIsContractError) {
  const auto p = init_params<float>(Architecture{}, 3);
  EXPECT_THROW(forward(p, StateTensor(12)), contract_error);
}

TEST(Forward, SparseAndDenseHiddenLayerAgree) {
  const auto p = init_params<float>(Architecture{}, 4, 1.0);
  std::mt19937_64 rng(4);
  std::vector<StateTensor> states;
  for (int i = 0; i < kSparseFcMaxBatch + 2; ++i) states.push_back(random_state(rng));
  std::vector<const StateTensor*> ptrs;
  for (const auto& s : states) ptrs.push_back(&s);
  ForwardPass<float> dense;
  forward_batch(p, std::span<const StateTensor* const>(ptrs), dense);
  for (std::size_t b = 0; b < states.size(); ++b) {
    const PolicyOutput single = forward(p, states[b]);
    for (int i = 0; i < kActionCount; ++i)
      EXPECT_NEAR(single.probabilities[static_cast<std::size_t>(i)], dense.probs[b * kActionCount + static_cast<std::size_t>(i)], 1e-6);
    EXPECT_NEAR(single.value, dense.value[b], 1e-5 * (1.0 + std::abs(single.value)));
  }
}

TEST(Forward, SoftmaxTranslationInvariance) {
  auto p = init_params<double>(Architecture{}, 5, 1.0);
  std::mt19937_64 rng(5);
  const StateTensor s = random_state(rng);
  const PolicyOutput before = forward(p, s);
  for (auto& b : p[kActorB].data) b += 37.5;
  const PolicyOutput after = forward(p, s);
  for (int i = 0; i < kActionCount; ++i)
    EXPECT_NEAR(before.probabilities[static_cast<std::size_t>(i)], after.probabilities[static_cast<std::size_t>(i)], 1e-9);
}

TEST(Entropy, MaximalAtUniform) {
  PolicyOutput u;
  u.probabilities.fill(0.125);
  EXPECT_NEAR(policy_entropy(u), std::log(8.0), 1e-15);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> w(0.01, 1.0);
  for (int i = 0; i < 100; ++i) {
    PolicyOutput o;
    double sum = 0.0;
    for (auto& q : o.probabilities) sum += (q = w(rng));
    for (auto& q : o.probabilities) q /= sum;
    EXPECT_LT(policy_entropy(o), std::log(8.0));
  }
}

TEST(TdError, Examples) {
  EXPECT_DOUBLE_EQ(td_error(10.0, 3.0, 123.0, true, 0.99), 7.0);
  EXPECT_DOUBLE_EQ(td_error(0.0, 5.0, 5.0, false, 1.0), 0.0);
  EXPECT_NEAR(td_error(1.0, 2.0, 3.0, false, 0.99), 1.97, 1e-12);
}

TEST(A2CUpdate, ZeroAdvantageLeavesParamsUnchanged) {
  auto p = init_params<float>(Architecture{}, 7, 1.0);
  std::fill(p[kCriticW].data.begin(), p[kCriticW].data.end(), 0.0f);  // V = 0 everywhere
  std::mt19937_64 rng(7);
  UpdateBatch batch;
  for (int t = 0; t < 4; ++t) batch.push_back({random_state(rng), action_from_index(t), 0.0, false, std::nullopt});
  batch.back().done = true;
  A2CHyper hyper;
  hyper.entropy_coef = 0.0;
  const auto before = p;
  AdamState<float> adam;
  const LossReport rep = a2c_update(p, batch, hyper, adam);
  EXPECT_EQ(p, before);
  EXPECT_DOUBLE_EQ(rep.policy_loss, 0.0);
  EXPECT_DOUBLE_EQ(rep.value_loss, 0.0);
}

TEST(A2CUpdate, PositiveAdvantageRaisesTakenAction) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto p = init_params<float>(Architecture{}, 10 + seed, 1.0);
    std::mt19937_64 rng(seed);
    const StateTensor s = random_state(rng);
    const Action a = action_from_index(static_cast<int>(seed % 8));
    UpdateBatch batch{{s, a, 10.0, true, std::nullopt}};
    ASSERT_GT(td_error(10.0, forward(p, s).value, 0.0, true, 0.99), 0.0);
    const double before = log_prob(p, s, a);
    AdamState<float> adam;
    A2CHyper hyper;
    hyper.learning_rate = 1e-3;
    a2c_update(p, batch, hyper, adam);
    EXPECT_GT(log_prob(p, s, a), before);
  }
}

TEST(A2CUpdate, MonotoneAtSmallLearningRate) {
  auto p = init_params<float>(Architecture{}, 21, 1.0);
  std::mt19937_64 rng(21);
  const StateTensor s = random_state(rng);
  const UpdateBatch batch{{s, Action::SE, 10.0, true, std::nullopt}};
  A2CHyper hyper;
  hyper.learning_rate = 1e-4;
  hyper.value_coef = 0.0;
  hyper.entropy_coef = 0.0;
  AdamState<float> adam;
  double last = log_prob(p, s, Action::SE);
  for (int k = 0; k < 10; ++k) {
    ASSERT_GT(td_error(10.0, forward(p, s).value, 0.0, true, 0.99), 0.0);
    a2c_update(p, batch, hyper, adam);
    const double now = log_prob(p, s, Action::SE);
    EXPECT_GE(now, last);
    last = now;
  }
}

TEST(A2CUpdate, NonFiniteGradientRejected) {
  auto p = init_params<float>(Architecture{}, 8, 1.0);
  std::mt19937_64 rng(8);
  const UpdateBatch batch{{random_state(rng), Action::N, std::nan(""), true, std::nullopt}};
  const auto before = p;
  AdamState<float> adam;
  try {
    a2c_update(p, batch, A2CHyper{}, adam);
    FAIL() << "expected non_finite_gradient";
  } catch (const non_finite_gradient& e) {
    EXPECT_NE(std::string(e.what()).find("element"), std::string::npos);
  }
  EXPECT_EQ(p, before);
}

TEST(A2CUpdate, BatchValidation) {
  auto p = init_params<float>(Architecture{}, 9);
  AdamState<float> adam;
  EXPECT_THROW(a2c_update(p, UpdateBatch{}, A2CHyper{}, adam), contract_error);
  std::mt19937_64 rng(9);
  UpdateBatch early{{random_state(rng), Action::N, 1.0, true, std::nullopt},
                    {random_state(rng), Action::N, 1.0, true, std::nullopt}};
  EXPECT_THROW(a2c_update(p, early, A2CHyper{}, adam), contract_error);
  UpdateBatch open_end{{random_state(rng), Action::N, 1.0, false, std::nullopt}};
  EXPECT_THROW(a2c_update(p, open_end, A2CHyper{}, adam), contract_error);
}

TEST(A2CUpdate, GradientMatchesFiniteDifferences) {
  const GradCheckReport rep = gradient_check(0);
  EXPECT_TRUE(rep.passed) << "max relative error " << rep.max_rel_error;
  EXPECT_GE(rep.entries.size(), 500u);
  EXPECT_LT(rep.max_rel_error, 1e-4);
  std::set<std::string> tensors;
  for (const auto& e : rep.entries) tensors.insert(e.tensor);
  EXPECT_EQ(tensors.size(), static_cast<std::size_t>(kParamTensorCount));
}

TEST(SelectAction, GreedyTieBreakAndCertainty) {
  std::mt19937_64 rng(1);
  PolicyOutput u;
  u.probabilities.fill(0.125);
  EXPECT_EQ(select_action(u, SelectMode::greedy, rng), Action::N);
  PolicyOutput sure{};
  sure.probabilities[5] = 1.0;
  EXPECT_EQ(select_action(sure, SelectMode::greedy, rng), Action::SW);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(select_action(sure, SelectMode::sample, rng), Action::SW);
}

TEST(SelectAction, SampleFrequencies) {
  PolicyOutput o;
  o.probabilities = {0.3, 0.05, 0.2, 0.1, 0.15, 0.02, 0.08, 0.1};
  std::mt19937_64 rng(99);
  const int n = 100000;
  std::array<int, 8> counts{};
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(index(select_action(o, SelectMode::sample, rng)))];
  for (std::size_t i = 0; i < 8; ++i) {
    const double p = o.probabilities[i];
    EXPECT_LE(std::abs(counts[i] - n * p), 3.0 * std::sqrt(n * p * (1 - p))) << i;
  }
}
