#include <prefnav/nn/checkpoint.hpp>

#include <prefnav/error.hpp>

#include <fstream>

namespace prefnav::nn {
namespace {

std::vector<double> flat(const Vector& v) { return {v.data(), v.data() + v.size()}; }

void fill(Vector& dst, const std::vector<double>& src, const std::string& name) {
  if (static_cast<Eigen::Index>(src.size()) != dst.size())
    throw Error("checkpoint: tensor '" + name + "' has " + std::to_string(src.size()) + " values, shapes need " +
                std::to_string(dst.size()));
  dst = Eigen::Map<const Vector>(src.data(), static_cast<Eigen::Index>(src.size()));
}

}  // namespace

nlohmann::json shapes_json(const Mlp& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers()) layers.push_back({l.in, l.out, to_string(l.act)});
  return {{"kind", "mlp"}, {"layers", layers}};
}

nlohmann::json shapes_json(const Gru& cell) {
  return {{"kind", "gru"}, {"input", cell.input_dim()}, {"hidden", cell.hidden_dim()}};
}

void Checkpoint::put(const std::string& name, const Mlp& net) {
  shapes_[name] = shapes_json(net);
  tensors_[name] = flat(net.params());
}

void Checkpoint::put(const std::string& name, const Gru& cell) {
  shapes_[name] = shapes_json(cell);
  tensors_[name] = flat(cell.params());
}

Mlp Checkpoint::get_mlp(const std::string& name) const {
  const auto it = shapes_.find(name);
  if (it == shapes_.end() || it->second.value("kind", "") != "mlp")
    throw Error("checkpoint: no mlp named '" + name + "'");
  std::vector<LayerShape> layers;
  try {
    for (const auto& l : it->second.at("layers"))
      layers.push_back({l.at(0).get<int>(), l.at(1).get<int>(), activation_from_string(l.at(2).get<std::string>())});
  } catch (const nlohmann::json::exception& e) {
    throw Error("checkpoint: bad layer shapes for '" + name + "': " + e.what());
  }
  Mlp net(std::move(layers));
  fill(net.params(), tensors_.at(name), name);
  return net;
}

Gru Checkpoint::get_gru(const std::string& name) const {
  const auto it = shapes_.find(name);
  if (it == shapes_.end() || it->second.value("kind", "") != "gru")
    throw Error("checkpoint: no gru named '" + name + "'");
  Gru cell(it->second.at("input").get<int>(), it->second.at("hidden").get<int>());
  fill(cell.params(), tensors_.at(name), name);
  return cell;
}

nlohmann::json Checkpoint::to_json() const {
  nlohmann::json shapes = nlohmann::json::object();
  for (const auto& [k, v] : shapes_) shapes[k] = v;
  nlohmann::json tensors = nlohmann::json::object();
  for (const auto& [k, v] : tensors_) tensors[k] = v;
  return {{"manifest",
           {{"model_kind", model_kind},
            {"layer_shapes", shapes},
            {"seed", seed},
            {"train_steps", train_steps},
            {"config", config}}},
          {"tensors", tensors}};
}

Checkpoint Checkpoint::from_json(const nlohmann::json& j) {
  Checkpoint c;
  try {
    const auto& m = j.at("manifest");
    c.model_kind = m.at("model_kind").get<std::string>();
    c.seed = m.value("seed", std::uint64_t{0});
    c.train_steps = m.value("train_steps", std::uint64_t{0});
    c.config = m.value("config", nlohmann::json::object());
    for (const auto& [k, v] : m.at("layer_shapes").items()) c.shapes_[k] = v;
    for (const auto& [k, v] : j.at("tensors").items()) {
      if (!c.shapes_.contains(k)) throw Error("checkpoint: tensor '" + k + "' has no recorded shape");
      c.tensors_[k] = v.get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("checkpoint: malformed JSON: ") + e.what());
  }
  for (const auto& [k, v] : c.shapes_) {
    if (!c.tensors_.contains(k)) throw Error("checkpoint: missing tensor '" + k + "'");
    // Validate eagerly so a bad file fails at load time.
    if (v.value("kind", "") == "mlp") (void)c.get_mlp(k);
    else if (v.value("kind", "") == "gru") (void)c.get_gru(k);
    else throw Error("checkpoint: unknown module kind for '" + k + "'");
  }
  return c;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    out << to_json().dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("checkpoint " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace prefnav::nn
