#pragma once
/**
 * @file  checkpoint.hpp
 * @brief JSON tensor dumps.
 *
 *   {"manifest": {"model_kind": str, "layer_shapes": {name: [...]},
 *                 "seed": u64, "train_steps": u64, "config": {...}},
 *    "tensors": {name: [flat parameters]}}
 *
 * Loading rebuilds each module from its recorded shapes and rejects a
 * tensor whose length disagrees with them.
 */

#include <prefnav/nn/gru.hpp>
#include <prefnav/nn/mlp.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>

namespace prefnav::nn {

[[nodiscard]] nlohmann::json shapes_json(const Mlp& net);
[[nodiscard]] nlohmann::json shapes_json(const Gru& cell);

class Checkpoint {
 public:
  std::string model_kind;
  std::uint64_t seed = 0;
  std::uint64_t train_steps = 0;
  nlohmann::json config = nlohmann::json::object();

  void put(const std::string& name, const Mlp& net);
  void put(const std::string& name, const Gru& cell);

  [[nodiscard]] bool has(const std::string& name) const { return tensors_.contains(name); }
  [[nodiscard]] Mlp get_mlp(const std::string& name) const;
  [[nodiscard]] Gru get_gru(const std::string& name) const;

  [[nodiscard]] nlohmann::json to_json() const;
  static Checkpoint from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

 private:
  std::map<std::string, nlohmann::json> shapes_;
  std::map<std::string, std::vector<double>> tensors_;
};

}  // namespace prefnav::nn
