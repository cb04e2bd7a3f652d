#include <set>

#include "wmh/error.hpp"
#include "wmh/network.hpp"

namespace wmh {

Shape4 infer_shape(const NetworkSpec& net, const Shape4& input) {
  if (input.c != net.input_channels)
    fail(ErrorCode::ShapeMismatch, "network expects " + std::to_string(net.input_channels) +
                                       " input channels, got " + std::to_string(input.c));
  ShapeBindings bindings;
  bindings.emplace(std::string(kInputBinding), input);
  Shape4 s = input;
  for (const Layer& layer : net.layers) {
    s = infer_layer_shape(s, layer.spec, bindings);
    if (!layer.name.empty()) bindings.insert_or_assign(layer.name, s);
  }
  return s;
}

std::optional<Shape4> try_infer_shape(const NetworkSpec& net, const Shape4& input) noexcept {
  try {
    return infer_shape(net, input);
  } catch (...) {
    return std::nullopt;
  }
}

void check_network(const NetworkSpec& net) {
  auto bad = [](const std::string& why) { fail(ErrorCode::ShapeCheckFailed, why); };
  if (net.input_channels == 0 || net.output_channels == 0) bad("declared channel counts must be >= 1");

  // Channels only; spatial extents are checked per input by infer_shape.
  std::map<std::string, std::size_t, std::less<>> channels{{std::string(kInputBinding), net.input_channels}};
  std::set<std::string, std::less<>> names;
  std::size_t c = net.input_channels;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const Layer& layer = net.layers[i];
    const std::string where = "layer " + std::to_string(i) + " ('" + layer.name + "'): ";
    if (!layer.name.empty() && layer.name == kInputBinding) bad(where + "name 'input' is reserved");
    if (!layer.name.empty() && !names.insert(layer.name).second) bad(where + "duplicate layer name");

    // Probe with an extent large enough that only channel and parameter rules can fail.
    Shape4 probe{c, 1024, 1024, 1024};
    ShapeBindings sb;
    if (const auto* cat = std::get_if<Concat>(&layer.spec)) {
      const auto it = channels.find(cat->source);
      if (it == channels.end()) bad(where + "concat source '" + cat->source + "' not produced earlier");
      sb.emplace(cat->source, Shape4{it->second, probe.d, probe.h, probe.w});
    }
    try {
      c = infer_layer_shape(probe, layer.spec, sb).c;
    } catch (const Error& e) {
      bad(where + e.what());
    }
    if (!layer.name.empty()) channels.insert_or_assign(layer.name, c);
  }
  if (c != net.output_channels)
    bad("network produces " + std::to_string(c) + " channels but declares " + std::to_string(net.output_channels));
}

Tensor4 forward(const NetworkSpec& net, const Tensor4& x) {
  if (x.shape().c != net.input_channels)
    fail(ErrorCode::ShapeMismatch, "network expects " + std::to_string(net.input_channels) +
                                       " input channels, got " + std::to_string(x.shape().c));

  // Only outputs referenced by a later Concat are retained.
  std::set<std::string, std::less<>> needed;
  for (const Layer& layer : net.layers)
    if (const auto* cat = std::get_if<Concat>(&layer.spec)) needed.insert(cat->source);

  Bindings bindings;
  if (needed.contains(kInputBinding)) bindings.insert_or_assign(std::string(kInputBinding), x);
  Tensor4 cur = x;
  for (const Layer& layer : net.layers) {
    cur = apply_layer(cur, layer.spec, bindings);
    if (!layer.name.empty() && needed.contains(layer.name)) bindings.insert_or_assign(layer.name, cur);
  }
  return cur;
}

}  // namespace wmh
