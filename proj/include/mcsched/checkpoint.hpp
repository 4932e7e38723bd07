#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mcsched/network.hpp"
#include "mcsched/policies.hpp"
#include "mcsched/ppo.hpp"

namespace mcsched {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Trained network plus everything needed to reproduce and reuse it.
///
/// File layout (all integers little-endian):
///   8 bytes   magic "MCSCKPT\0"
///   u32       format version
///   u64       header length H
///   H bytes   JSON header: n_max, observation layout, tensor shape table,
///             hyperparameters, training seed, reward curves
///   4*P bytes float32 parameters in shape-table order
struct PolicyCheckpoint {
  std::uint32_t version = kCheckpointVersion;
  nn::PolicyNetwork<float> network;
  ppo::PpoHyper hyper;
  std::size_t n_max = 0;
  std::vector<std::string> observation_layout;
  std::uint64_t training_seed = 0;
  std::vector<ppo::CurvePoint> episode_rewards;
  std::vector<ppo::CurvePoint> update_curve;
  std::string config_echo;  // JSON text of the resolved run configuration

  bool operator==(const PolicyCheckpoint&) const = default;
};

/// Column names of the flattened observation for `n_max` job slots.
std::vector<std::string> observation_layout(std::size_t n_max);

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string serialize_checkpoint(const PolicyCheckpoint& ckpt);
PolicyCheckpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const PolicyCheckpoint& ckpt, const std::filesystem::path& path);
PolicyCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Throws CheckpointError unless the checkpoint was trained for `n_max` slots.
void check_layout(const PolicyCheckpoint& ckpt, std::size_t n_max);

/// Acts with a trained network: argmax of the masked distribution, or a
/// sample from it when `stochastic`.
class NetworkPolicy final : public Policy {
 public:
  NetworkPolicy(PolicyCheckpoint ckpt, std::string name, bool stochastic = false);

  std::size_t act(const Observation& obs, const ActionMask& mask, Rng& rng) override;
  std::string name() const override { return name_; }
  bool deterministic() const override { return !stochastic_; }
  std::size_t n_max() const { return ckpt_.n_max; }

 private:
  PolicyCheckpoint ckpt_;
  std::string name_;
  bool stochastic_;
};

}  // namespace mcsched
