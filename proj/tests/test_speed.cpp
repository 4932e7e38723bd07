#include <gtest/gtest.h>

#include "mcsched/datagen.hpp"
#include "mcsched/policies.hpp"
#include "mcsched/speed.hpp"
#include "oracles.hpp"

using namespace mcsched;

namespace {

constexpr auto HI = Criticality::HI;
constexpr auto LO = Criticality::LO;

ScheduleTrace rollout(const Instance& inst, Policy& policy, std::uint64_t seed) {
  SchedulingEnv env;
  Rng rng(seed);
  return run_episode(env, policy, inst, {}, seed, rng).trace;
}

bool keeps_all(const Instance& inst, const ScheduleTrace& trace, KeepSet keep, double s) {
  const auto ok = oracle::replay(inst, trace.start_order(), s);
  for (std::size_t id : kept_jobs(inst, trace, keep))
    if (!ok[id]) return false;
  return true;
}

}  // namespace

TEST(MinSpeed, SingleJobIsProcessingOverWindow) {
  auto inst = oracle::make_instance({Job::make(0, 0, 4, 2, HI)});
  const auto trace = simulate_edf(inst);
  EXPECT_NEAR(min_tolerable_speed(inst, trace, KeepSet::HiOnly), 0.5, 1e-3);

  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const Tick r = static_cast<Tick>(rng.index(20));
    const Tick p = 1 + static_cast<Tick>(rng.index(9));
    const Tick d = r + p + static_cast<Tick>(rng.index(30));
    auto one = oracle::make_instance({Job::make(0, r, d, p, HI)});
    const double expected = static_cast<double>(p) / static_cast<double>(d - r);
    EXPECT_NEAR(min_tolerable_speed(one, simulate_edf(one), KeepSet::All), expected, 1e-3);
  }
}

TEST(MinSpeed, EmptyKeptSetIsSearchFloor) {
  auto inst = oracle::make_instance({Job::make(0, 0, 4, 2, LO)});
  EXPECT_EQ(min_tolerable_speed(inst, simulate_edf(inst), KeepSet::HiOnly), kSpeedTolerance);
  EXPECT_EQ(min_tolerable_speed(inst, ScheduleTrace{}, KeepSet::All), kSpeedTolerance);
}

TEST(MinSpeed, TightScheduleNeedsFullSpeed) {
  auto inst = oracle::make_instance({Job::make(0, 0, 3, 3, HI), Job::make(0, 0, 5, 2, HI)});
  EXPECT_EQ(min_tolerable_speed(inst, simulate_edf(inst), KeepSet::All), 1.0);
}

TEST(MinSpeed, ReplayMatchesOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Job> jobs;
    for (int i = 0; i < 7; ++i) {
      const Tick r = static_cast<Tick>(rng.index(15));
      const Tick p = 1 + static_cast<Tick>(rng.index(6));
      jobs.push_back(Job::make(0, r, r + p + static_cast<Tick>(rng.index(20)), p, HI));
    }
    const auto inst = oracle::make_instance(jobs);
    std::vector<std::size_t> order(inst.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    const double s = rng.uniform(0.2, 1.0);
    EXPECT_EQ(replay_order(inst, order, s), oracle::replay(inst, order, s));
  }
}

TEST(MinSpeed, OracleProperties) {
  auto priority = make_priority_policy();
  auto random = make_random_policy();
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    GenParams p;
    p.n = 10;
    p.seed = seed;
    p.release_mean = seed % 2 ? 4.0 : 20.0;
    const auto inst = generate_instance(p);
    const auto trace = rollout(inst, seed % 3 ? *priority : *random, seed);
    for (KeepSet keep : {KeepSet::HiOnly, KeepSet::All}) {
      const double s = min_tolerable_speed(inst, trace, keep);
      ASSERT_GT(s, 0.0);
      ASSERT_LE(s, 1.0);
      EXPECT_TRUE(keeps_all(inst, trace, keep, s)) << seed;
      EXPECT_TRUE(keeps_all(inst, trace, keep, 1.0)) << seed;
      if (s < 1.0 && !kept_jobs(inst, trace, keep).empty())
        EXPECT_FALSE(keeps_all(inst, trace, keep, s - 2 * kSpeedTolerance)) << seed;
    }
    EXPECT_LE(min_tolerable_speed(inst, trace, KeepSet::HiOnly), min_tolerable_speed(inst, trace, KeepSet::All));
  }
}

TEST(CriticalityEdfSchedule, HiFirstAndFeasibleAtFullSpeed) {
  auto inst = oracle::make_instance({Job::make(0, 0, 3, 2, LO), Job::make(0, 0, 9, 2, HI), Job::make(0, 0, 20, 1, LO)});
  const auto trace = criticality_edf_schedule(inst);
  ASSERT_FALSE(trace.events.empty());
  EXPECT_EQ(trace.events[0].job, 1u);
  for (const auto& e : trace.events) EXPECT_LE(e.end, e.deadline);
}

TEST(DegradationFloor, ClampedAndKeepsHi) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    GenParams p;
    p.n = 10;
    p.seed = seed;
    const auto inst = generate_instance(p);
    const double f = degradation_floor(inst);
    EXPECT_GE(f, DegradationConfig::kMinFloor);
    EXPECT_LE(f, 1.0);
  }
  auto loose = oracle::make_instance({Job::make(0, 0, 1000, 1, HI)});
  EXPECT_EQ(degradation_floor(loose), DegradationConfig::kMinFloor);
}
