#include "near/model_io.hpp"

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "near/errors.hpp"

namespace near {

using nlohmann::json;

json model_spec_to_json(const ModelSpec& spec) {
  json layers = json::array();
  for (const auto& layer : spec.layers) {
    if (const auto* d = std::get_if<DenseSpec>(&layer)) {
      layers.push_back({{"type", "dense"}, {"in", d->in}, {"out", d->out}, {"bias", d->bias}});
    } else if (const auto* c = std::get_if<Conv2dSpec>(&layer)) {
      layers.push_back({{"type", "conv2d"},
                        {"in_channels", c->in_channels},
                        {"out_channels", c->out_channels},
                        {"kernel", c->kernel},
                        {"stride", c->stride},
                        {"padding", c->padding},
                        {"bias", c->bias}});
    } else {
      layers.push_back({{"type", "flatten"}});
    }
  }

  json init = {{"scheme", init_name(spec.init.kind)}};
  if (spec.init.kind == InitScheme::Kind::Custom) {
    json bounds = json::array();
    for (const auto& [lo, hi] : spec.init.custom_bounds) {
      bounds.push_back({lo, hi});
    }
    init["bounds"] = bounds;
  }

  return {{"layers", layers},
          {"activation", activation_name(spec.activation)},
          {"final_activation", activation_name(spec.final_activation)},
          {"init", init},
          {"seed", spec.seed}};
}

ModelSpec model_spec_from_json(const json& j) {
  ModelSpec spec;
  for (const auto& layer : j.at("layers")) {
    const std::string type = layer.at("type");
    if (type == "dense") {
      DenseSpec d;
      d.in = layer.at("in");
      d.out = layer.at("out");
      d.bias = layer.value("bias", true);
      spec.layers.emplace_back(d);
    } else if (type == "conv2d") {
      Conv2dSpec c;
      c.in_channels = layer.at("in_channels");
      c.out_channels = layer.at("out_channels");
      c.kernel = layer.at("kernel");
      c.stride = layer.value("stride", std::size_t{1});
      c.padding = layer.value("padding", std::size_t{0});
      c.bias = layer.value("bias", true);
      spec.layers.emplace_back(c);
    } else if (type == "flatten") {
      spec.layers.emplace_back(FlattenSpec{});
    } else {
      throw Error("unknown layer type: " + type);
    }
  }

  spec.activation = activation_from_name(j.value("activation", "relu"));
  spec.final_activation = activation_from_name(j.value("final_activation", "identity"));

  if (j.contains("init")) {
    const auto& init = j.at("init");
    spec.init.kind = init_from_name(init.at("scheme"));
    if (init.contains("bounds")) {
      for (const auto& b : init.at("bounds")) {
        spec.init.custom_bounds.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
      }
    }
  }
  spec.seed = j.value("seed", std::uint64_t{0});
  return spec;
}

ModelSpec load_model_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound("cannot open model spec " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("model spec " + path + ": " + e.what());
  }
  return model_spec_from_json(j);
}

std::string model_spec_digest(const ModelSpec& spec) {
  const std::string canonical = model_spec_to_json(spec).dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

}  // namespace near
