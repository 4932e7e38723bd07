#include <gtest/gtest.h>

#include "mcsched/datagen.hpp"
#include "mcsched/eval.hpp"
#include "mcsched/policies.hpp"
#include "oracles.hpp"

using namespace mcsched;

namespace {

constexpr auto HI = Criticality::HI;
constexpr auto LO = Criticality::LO;

struct View {
  Observation obs;
  ActionMask mask;
};

View view(std::vector<Job> jobs, Tick now = 0, double speed = 1.0) {
  EnvState s;
  s.instance = oracle::make_instance(std::move(jobs));
  s.now = now;
  s.speed = speed;
  for (auto& j : s.instance.jobs) update_status(j, now);
  return {encode_observation(s), action_mask(s)};
}

std::vector<Instance> corpus(std::size_t count, std::size_t n, double release_mean, std::uint64_t base) {
  std::vector<Instance> out;
  for (std::size_t i = 0; i < count; ++i) {
    GenParams p;
    p.n = n;
    p.release_mean = release_mean;
    p.lo_fraction = 0.3;
    p.seed = base + i;
    out.push_back(generate_instance(p));
  }
  return out;
}

std::vector<std::uint64_t> seeds(std::size_t count, std::uint64_t base) {
  std::vector<std::uint64_t> s(count);
  for (std::size_t i = 0; i < count; ++i) s[i] = base * 1000 + i;
  return s;
}

}  // namespace

TEST(Edf, EarliestDeadline) {
  const auto v = view({Job::make(0, 0, 9, 1, HI), Job::make(0, 0, 4, 1, LO)});
  EXPECT_EQ(edf_action(v.obs, v.mask), 1u);
}

TEST(Edf, IdleWhenOnlyIdleAllowed) {
  const auto v = view({Job::make(0, 3, 9, 1, HI)});
  EXPECT_EQ(edf_action(v.obs, v.mask), v.mask.idle_action());
  EXPECT_EQ(criticality_edf_action(v.obs, v.mask), v.mask.idle_action());
  EXPECT_EQ(priority_action(v.obs, v.mask), v.mask.idle_action());
}

TEST(Edf, CompletesEveryRepairedInstanceAtFullSpeed) {
  auto policy = make_edf_policy();
  const auto report = evaluate(*policy, corpus(200, 20, 20.0, 0), {}, seeds(200, 1));
  EXPECT_EQ(report.overall_completion_rate, 1.0);
  EXPECT_EQ(report.avg_missed_overall, 0.0);
}

TEST(CriticalityEdf, HiDominatesDeadline) {
  const auto v = view({Job::make(0, 0, 12, 1, HI), Job::make(0, 0, 3, 1, LO)});
  EXPECT_EQ(criticality_edf_action(v.obs, v.mask), 0u);
}

TEST(CriticalityEdf, FallsBackToEarliestLo) {
  const auto v = view({Job::make(0, 0, 12, 1, LO), Job::make(0, 0, 3, 1, LO), Job::make(0, 5, 30, 1, HI)});
  EXPECT_EQ(criticality_edf_action(v.obs, v.mask), 1u);
}

TEST(CriticalityEdf, ProtectsHiUnderHeavyDegradation) {
  DegradationConfig deg;
  deg.threshold = 0.9;
  auto edf = make_edf_policy();
  auto crit = make_criticality_edf_policy();
  const auto instances = corpus(200, 20, 20.0, 500);
  const auto s = seeds(200, 2);
  EXPECT_GE(evaluate(*crit, instances, deg, s).hi_completion_rate, evaluate(*edf, instances, deg, s).hi_completion_rate);
}

TEST(Priority, NearLoBeatsFarHi) {
  // laxities: HI 20 (far), LO 1 (near), LO 2 (median)
  const auto v = view({Job::make(0, 0, 22, 2, HI), Job::make(0, 0, 3, 2, LO), Job::make(0, 0, 4, 2, LO)});
  EXPECT_LE(v.obs.job(1, JobFeature::Laxity), observed_laxity_threshold(v.obs));
  EXPECT_GT(v.obs.job(0, JobFeature::Laxity), observed_laxity_threshold(v.obs));
  EXPECT_EQ(priority_action(v.obs, v.mask), 1u);
}

TEST(Priority, NearHiFirst) {
  const auto v = view({Job::make(0, 0, 5, 2, LO), Job::make(0, 0, 6, 2, HI), Job::make(0, 0, 30, 2, HI)});
  EXPECT_EQ(priority_action(v.obs, v.mask), 1u);
}

TEST(Priority, SingleJob) {
  const auto v = view({Job::make(0, 0, 50, 2, LO), Job::make(0, 9, 30, 2, HI)});
  EXPECT_EQ(priority_action(v.obs, v.mask), 0u);
}

TEST(Priority, ThresholdMatchesEnvironment) {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Job> jobs;
    for (int i = 0; i < 7; ++i) {
      const Tick r = static_cast<Tick>(rng.index(4));
      const Tick p = 1 + static_cast<Tick>(rng.index(5));
      jobs.push_back(Job::make(0, r, r + p + static_cast<Tick>(rng.index(12)), p, rng.bernoulli(0.5) ? HI : LO));
    }
    EnvState s;
    s.instance = oracle::make_instance(jobs);
    s.now = 2;
    for (auto& j : s.instance.jobs) update_status(j, s.now);
    const auto obs = encode_observation(s);
    const auto mask = action_mask(s);
    if (mask.allowed(mask.idle_action())) continue;
    const std::size_t a = priority_action(obs, mask);
    // The chosen job earns the best band reward available.
    for (std::size_t i : mask.allowed_actions()) EXPECT_GE(band_reward(s, a), band_reward(s, i));
  }
}

TEST(Priority, OutEarnsRandomByTwentyPercent) {
  auto priority = make_priority_policy();
  auto random = make_random_policy();
  const auto instances = corpus(500, 10, 4.0, 9000);
  const auto s = seeds(500, 3);
  const double p = evaluate(*priority, instances, {}, s).mean_reward;
  const double r = evaluate(*random, instances, {}, s).mean_reward;
  EXPECT_GE(p, 1.2 * r) << "priority " << p << " random " << r;
}

TEST(Random, SingleBitIsForced) {
  ActionMask m{{0, 1, 0, 0}};
  Rng rng(1);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(random_action(m, rng), 1u);
}

TEST(Random, TwoBitsSplitEvenly) {
  ActionMask m{{1, 0, 1, 0}};
  Rng rng(2);
  int first = 0;
  for (int i = 0; i < 10000; ++i) first += random_action(m, rng) == 0;
  EXPECT_NEAR(first / 10000.0, 0.5, 0.02);
}

TEST(Random, NeverPicksClearedBit) {
  Rng rng(3);
  for (int i = 0; i < 100000; ++i) {
    ActionMask m;
    m.bits.resize(6);
    for (auto& b : m.bits) b = rng.bernoulli(0.4);
    if (m.count() == 0) m.bits.back() = 1;
    ASSERT_TRUE(m.allowed(random_action(m, rng)));
  }
}

TEST(Baselines, RespectMaskOnRandomStates) {
  Rng rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<Job> jobs;
    const int n = 1 + static_cast<int>(rng.index(8));
    for (int i = 0; i < n; ++i) {
      const Tick r = static_cast<Tick>(rng.index(6));
      const Tick p = 1 + static_cast<Tick>(rng.index(5));
      jobs.push_back(Job::make(0, r, r + p + static_cast<Tick>(rng.index(8)), p, rng.bernoulli(0.5) ? HI : LO));
    }
    const auto v = view(jobs, static_cast<Tick>(rng.index(8)), rng.bernoulli(0.5) ? 1.0 : 0.7);
    ASSERT_TRUE(v.mask.allowed(edf_action(v.obs, v.mask)));
    ASSERT_TRUE(v.mask.allowed(criticality_edf_action(v.obs, v.mask)));
    ASSERT_TRUE(v.mask.allowed(priority_action(v.obs, v.mask)));
    ASSERT_TRUE(v.mask.allowed(random_action(v.mask, rng)));
  }
}

TEST(Baselines, DeterministicRollouts) {
  DegradationConfig deg;
  deg.threshold = 0.4;
  const auto inst = generate_instance({});
  for (auto make : {make_edf_policy, make_criticality_edf_policy, make_priority_policy}) {
    auto policy = make();
    EXPECT_TRUE(policy->deterministic());
    SchedulingEnv env;
    Rng r1(0), r2(99);
    const auto a = run_episode(env, *policy, inst, deg, 31, r1);
    const auto b = run_episode(env, *policy, inst, deg, 31, r2);
    EXPECT_EQ(a.trace, b.trace);
    EXPECT_EQ(a.total_reward, b.total_reward);
  }
  EXPECT_FALSE(make_random_policy()->deterministic());
}
