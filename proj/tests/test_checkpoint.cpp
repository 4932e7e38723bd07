#include <gtest/gtest.h>

#include <filesystem>

#include "mcsched/checkpoint.hpp"
#include "mcsched/datagen.hpp"
#include "mcsched/eval.hpp"
#include "mcsched/io.hpp"

using namespace mcsched;
namespace fs = std::filesystem;

namespace {

PolicyCheckpoint random_checkpoint(std::size_t n_max, std::uint64_t seed) {
  Rng rng(seed);
  PolicyCheckpoint c;
  c.n_max = n_max;
  c.hyper.hidden = 16;
  c.hyper.learning_rate = 1e-3;
  c.network = nn::PolicyNetwork<float>::initialized({observation_size(n_max), 16, n_max + 1}, rng);
  c.observation_layout = observation_layout(n_max);
  c.training_seed = seed;
  c.episode_rewards = {{10, 1.5}, {25, -2.25}};
  c.update_curve = {{25, 0.125}};
  c.config_echo = R"({"command":"train","seed":"3"})";
  return c;
}

fs::path temp_path(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "mcsched_ckpt_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Layout, NamesEveryColumn) {
  const auto layout = observation_layout(2);
  ASSERT_EQ(layout.size(), observation_size(2));
  EXPECT_EQ(layout.front(), "job0.release");
  EXPECT_EQ(layout[kJobFeatures + 10], "job1.running");
  EXPECT_EQ(layout.back(), "global.threshold");
}

TEST(Checkpoint, RoundTripIsBitExact) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto c = random_checkpoint(3 + seed, seed);
    const auto path = temp_path("rt.bin");
    save_checkpoint(c, path);
    const auto back = load_checkpoint(path);
    EXPECT_EQ(back, c);
    EXPECT_EQ(serialize_checkpoint(back), serialize_checkpoint(c));
  }
}

TEST(Checkpoint, TruncationIsAnError) {
  const auto bytes = serialize_checkpoint(random_checkpoint(4, 1));
  for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{12}, std::size_t{40}, bytes.size() / 2, bytes.size() - 1})
    EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, cut)), CheckpointError) << cut;
}

TEST(Checkpoint, RejectsBadMagicVersionAndTrailingBytes) {
  auto bytes = serialize_checkpoint(random_checkpoint(4, 1));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(deserialize_checkpoint(bad_magic), CheckpointError);
  auto bad_version = bytes;
  bad_version[8] = 9;
  try {
    deserialize_checkpoint(bad_version);
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
  EXPECT_THROW(deserialize_checkpoint(bytes + "xx"), CheckpointError);
  EXPECT_THROW(load_checkpoint(temp_path("missing.bin")), std::exception);
}

TEST(Checkpoint, LayoutGuard) {
  const auto c = random_checkpoint(4, 2);
  EXPECT_NO_THROW(check_layout(c, 4));
  EXPECT_THROW(check_layout(c, 5), CheckpointError);
  auto renamed = c;
  renamed.observation_layout[0] = "job0.other";
  EXPECT_THROW(check_layout(renamed, 4), CheckpointError);
  EXPECT_THROW(NetworkPolicy(renamed, "x"), CheckpointError);
}

TEST(NetworkPolicy, ActsWithinMaskAndRejectsMismatch) {
  NetworkPolicy policy(random_checkpoint(6, 3), "net");
  GenParams p;
  p.n = 6;
  p.release_mean = 3.0;
  SchedulingEnv env;
  Rng rng(0);
  for (std::uint64_t s = 0; s < 50; ++s) {
    p.seed = s;
    DegradationConfig deg;
    deg.threshold = 0.5;
    const auto ep = run_episode(env, policy, generate_instance(p), deg, s, rng);
    EXPECT_NO_THROW(ep.trace.validate());
  }
  p.n = 5;
  p.seed = 1;
  auto r = env.reset(generate_instance(p), {}, 0);
  EXPECT_THROW(policy.act(r.observation, r.mask, rng), CheckpointError);
  r = env.reset(pad_instance(generate_instance(p), 6), {}, 0);
  r.observation.values[0] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(policy.act(r.observation, r.mask, rng), InvalidInput);
}

TEST(NetworkPolicy, StochasticModeSamplesAllowedActions) {
  NetworkPolicy policy(random_checkpoint(4, 4), "net", true);
  EXPECT_FALSE(policy.deterministic());
  SchedulingEnv env;
  GenParams p;
  p.n = 4;
  p.release_mean = 1.0;
  const auto r = env.reset(generate_instance(p), {}, 0);
  Rng rng(1);
  for (int i = 0; i < 200; ++i) ASSERT_TRUE(r.mask.allowed(policy.act(r.observation, r.mask, rng)));
}

TEST(NetworkPolicy, LoadsThroughPolicySpec) {
  const auto path = temp_path("spec.bin");
  save_checkpoint(random_checkpoint(3, 5), path);
  const auto policy = make_policy("checkpoint:" + path.string());
  EXPECT_EQ(policy->name(), "checkpoint:" + path.string());
  EXPECT_THROW(make_policy("checkpoint:" + temp_path("nope.bin").string()), std::exception);
}
