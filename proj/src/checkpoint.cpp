#include "mcsched/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "json.hpp"
#include "mcsched/io.hpp"

namespace mcsched {

using Json = nlohmann::ordered_json;

namespace {

constexpr char kMagic[8] = {'M', 'C', 'S', 'C', 'K', 'P', 'T', '\0'};

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <typename U>
U get_le(const std::string& in, std::size_t& pos) {
  if (in.size() - pos < sizeof(U)) throw CheckpointError("checkpoint truncated");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i)
    v |= static_cast<U>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += sizeof(U);
  return v;
}

Json hyper_to_json(const ppo::PpoHyper& h) {
  Json j;
  j["gamma"] = h.gamma;
  j["gae_lambda"] = h.gae_lambda;
  j["clip_epsilon"] = h.clip_epsilon;
  j["learning_rate"] = h.learning_rate;
  j["rollout_length"] = h.rollout_length;
  j["minibatch_size"] = h.minibatch_size;
  j["epochs"] = h.epochs;
  j["entropy_coef"] = h.entropy_coef;
  j["value_coef"] = h.value_coef;
  j["max_grad_norm"] = h.max_grad_norm;
  j["total_steps"] = h.total_steps;
  j["hidden"] = h.hidden;
  j["normalize_advantages"] = h.normalize_advantages;
  return j;
}

ppo::PpoHyper hyper_from_json(const Json& j) {
  ppo::PpoHyper h;
  h.gamma = j.at("gamma").get<double>();
  h.gae_lambda = j.at("gae_lambda").get<double>();
  h.clip_epsilon = j.at("clip_epsilon").get<double>();
  h.learning_rate = j.at("learning_rate").get<double>();
  h.rollout_length = j.at("rollout_length").get<std::size_t>();
  h.minibatch_size = j.at("minibatch_size").get<std::size_t>();
  h.epochs = j.at("epochs").get<std::size_t>();
  h.entropy_coef = j.at("entropy_coef").get<double>();
  h.value_coef = j.at("value_coef").get<double>();
  h.max_grad_norm = j.at("max_grad_norm").get<double>();
  h.total_steps = j.at("total_steps").get<std::uint64_t>();
  h.hidden = j.at("hidden").get<std::size_t>();
  h.normalize_advantages = j.at("normalize_advantages").get<bool>();
  return h;
}

Json curve_to_json(const std::vector<ppo::CurvePoint>& curve) {
  Json arr = Json::array();
  for (const auto& p : curve) arr.push_back(Json::array({p.step, p.value}));
  return arr;
}

std::vector<ppo::CurvePoint> curve_from_json(const Json& arr) {
  std::vector<ppo::CurvePoint> out;
  for (const auto& p : arr) out.push_back({p.at(0).get<std::uint64_t>(), p.at(1).get<double>()});
  return out;
}

}  // namespace

std::vector<std::string> observation_layout(std::size_t n_max) {
  static const char* job_cols[kJobFeatures] = {"release",  "deadline", "processing", "remaining",
                                               "laxity",   "laxity_rank", "is_hi",  "released",
                                               "executed", "starved",  "running"};
  std::vector<std::string> out;
  out.reserve(observation_size(n_max));
  for (std::size_t i = 0; i < n_max; ++i)
    for (const char* c : job_cols) out.push_back("job" + std::to_string(i) + "." + c);
  for (const char* c : {"now", "speed", "threshold"}) out.push_back(std::string("global.") + c);
  return out;
}

std::string serialize_checkpoint(const PolicyCheckpoint& ckpt) {
  const auto& shape = ckpt.network.shape();
  Json header;
  header["n_max"] = ckpt.n_max;
  header["observation_layout"] = ckpt.observation_layout;
  header["network"] = {{"input", shape.input}, {"hidden", shape.hidden}, {"actions", shape.actions}};
  Json tensors = Json::array();
  for (const auto& b : shape.blocks())
    tensors.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}, {"offset", b.offset}});
  header["tensors"] = std::move(tensors);
  header["dtype"] = "float32-le";
  header["parameter_count"] = shape.parameter_count();
  header["hyper"] = hyper_to_json(ckpt.hyper);
  header["training_seed"] = ckpt.training_seed;
  header["episode_rewards"] = curve_to_json(ckpt.episode_rewards);
  header["update_curve"] = curve_to_json(ckpt.update_curve);
  header["config"] = ckpt.config_echo;
  const std::string text = header.dump();

  std::string out(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(out, ckpt.version);
  put_le<std::uint64_t>(out, text.size());
  out += text;
  const auto& params = ckpt.network.params();
  out.reserve(out.size() + 4 * static_cast<std::size_t>(params.size()));
  for (Eigen::Index i = 0; i < params.size(); ++i) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(params[i]));
  return out;
}

PolicyCheckpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw CheckpointError("not a checkpoint file (bad magic)");
  std::size_t pos = sizeof kMagic;
  PolicyCheckpoint ckpt;
  ckpt.version = get_le<std::uint32_t>(bytes, pos);
  if (ckpt.version != kCheckpointVersion)
    throw CheckpointError("checkpoint version " + std::to_string(ckpt.version) + " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  const auto header_len = get_le<std::uint64_t>(bytes, pos);
  if (bytes.size() - pos < header_len) throw CheckpointError("checkpoint truncated in header");
  Json header;
  try {
    header = Json::parse(bytes.substr(pos, header_len));
    pos += header_len;
    ckpt.n_max = header.at("n_max").get<std::size_t>();
    ckpt.observation_layout = header.at("observation_layout").get<std::vector<std::string>>();
    nn::NetworkShape shape;
    shape.input = header.at("network").at("input").get<std::size_t>();
    shape.hidden = header.at("network").at("hidden").get<std::size_t>();
    shape.actions = header.at("network").at("actions").get<std::size_t>();
    if (header.at("dtype").get<std::string>() != "float32-le") throw CheckpointError("unsupported dtype");
    const auto blocks = shape.blocks();
    const auto& tensors = header.at("tensors");
    if (tensors.size() != blocks.size()) throw CheckpointError("shape table does not match network layout");
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const auto& t = tensors[k];
      if (t.at("name").get<std::string>() != blocks[k].name || t.at("rows").get<std::size_t>() != blocks[k].rows ||
          t.at("cols").get<std::size_t>() != blocks[k].cols || t.at("offset").get<std::size_t>() != blocks[k].offset)
        throw CheckpointError("shape table entry " + std::to_string(k) + " is inconsistent");
    }
    if (header.at("parameter_count").get<std::size_t>() != shape.parameter_count())
      throw CheckpointError("parameter count mismatch");
    ckpt.hyper = hyper_from_json(header.at("hyper"));
    ckpt.training_seed = header.at("training_seed").get<std::uint64_t>();
    ckpt.episode_rewards = curve_from_json(header.at("episode_rewards"));
    ckpt.update_curve = curve_from_json(header.at("update_curve"));
    ckpt.config_echo = header.at("config").get<std::string>();

    const std::size_t count = shape.parameter_count();
    if (bytes.size() - pos != 4 * count)
      throw CheckpointError("checkpoint payload holds " + std::to_string(bytes.size() - pos) + " bytes, expected " +
                            std::to_string(4 * count));
    ckpt.network = nn::PolicyNetwork<float>(shape);
    auto& params = ckpt.network.params();
    for (std::size_t i = 0; i < count; ++i)
      params[static_cast<Eigen::Index>(i)] = std::bit_cast<float>(get_le<std::uint32_t>(bytes, pos));
  } catch (const Json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint header: ") + e.what());
  }
  if (ckpt.network.shape().input != observation_size(ckpt.n_max) || ckpt.network.shape().actions != ckpt.n_max + 1)
    throw CheckpointError("network shape does not match n_max");
  return ckpt;
}

void save_checkpoint(const PolicyCheckpoint& ckpt, const std::filesystem::path& path) {
  io::write_file(path, serialize_checkpoint(ckpt));
}

PolicyCheckpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return deserialize_checkpoint(io::read_file(path));
  } catch (const CheckpointError& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
}

void check_layout(const PolicyCheckpoint& ckpt, std::size_t n_max) {
  if (ckpt.n_max != n_max)
    throw CheckpointError("checkpoint was trained for n_max=" + std::to_string(ckpt.n_max) +
                          " but the environment has n_max=" + std::to_string(n_max));
  if (ckpt.observation_layout != observation_layout(n_max))
    throw CheckpointError("checkpoint observation layout differs from this build");
}

NetworkPolicy::NetworkPolicy(PolicyCheckpoint ckpt, std::string name, bool stochastic)
    : ckpt_(std::move(ckpt)), name_(std::move(name)), stochastic_(stochastic) {
  check_layout(ckpt_, ckpt_.n_max);
}

std::size_t NetworkPolicy::act(const Observation& obs, const ActionMask& mask, Rng& rng) {
  if (obs.n_max != ckpt_.n_max || mask.size() != ckpt_.n_max + 1) check_layout(ckpt_, obs.n_max);
  Eigen::MatrixXf x(static_cast<Eigen::Index>(obs.values.size()), 1);
  for (std::size_t i = 0; i < obs.values.size(); ++i) {
    if (!std::isfinite(obs.values[i])) throw InvalidInput("non-finite observation value");
    x(static_cast<Eigen::Index>(i), 0) = static_cast<float>(obs.values[i]);
  }
  Eigen::MatrixXf m(static_cast<Eigen::Index>(mask.size()), 1);
  for (std::size_t i = 0; i < mask.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = mask.bits[i];
  const auto cache = ckpt_.network.forward(x, m);
  if (stochastic_) return ppo::sample_action(cache.probs.col(0), mask, rng);
  std::size_t best = mask.idle_action();
  for (std::size_t a = 0; a < mask.size(); ++a) {
    if (!mask.allowed(a)) continue;
    if (!mask.allowed(best) || cache.logits(static_cast<Eigen::Index>(a), 0) >
                                   cache.logits(static_cast<Eigen::Index>(best), 0))
      best = a;
  }
  return best;
}

}  // namespace mcsched
