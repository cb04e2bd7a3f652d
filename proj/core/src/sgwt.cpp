#include "wmh/sgwt.hpp"

#include <bit>
#include <cstring>
#include <limits>

#include "json.hpp"
#include "wmh/error.hpp"
#include "wmh/volume_io.hpp"

namespace wmh {
namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "SGWT codec assumes a little-endian host");

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t off) {
  std::uint32_t v;
  std::memcpy(&v, b.data() + off, 4);
  return v;
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + 4);
}

class BlobWriter {
 public:
  json add(const std::vector<std::size_t>& shape, const std::vector<float>& values) {
    const std::size_t offset = blob_.size() * sizeof(float);
    blob_.insert(blob_.end(), values.begin(), values.end());
    return json{{"shape", shape}, {"offset", offset}};
  }
  const std::vector<float>& blob() const { return blob_; }

 private:
  std::vector<float> blob_;
};

Triple triple(const json& j, const char* key) {
  const auto v = j.at(key).get<std::vector<std::size_t>>();
  if (v.size() != 3) fail(ErrorCode::BadManifest, std::string(key) + " must have 3 entries");
  return {v[0], v[1], v[2]};
}

class BlobReader {
 public:
  explicit BlobReader(std::span<const std::uint8_t> blob) : blob_(blob) {}

  std::vector<float> read(const json& desc, std::vector<std::size_t>& shape) const {
    shape = desc.at("shape").get<std::vector<std::size_t>>();
    const auto offset = desc.at("offset").get<std::uint64_t>();
    std::uint64_t count = 1;
    for (auto d : shape) {
      if (d != 0 && count > std::numeric_limits<std::uint32_t>::max() / d)
        fail(ErrorCode::TruncatedTensor, "tensor shape overflows");
      count *= d;
    }
    if (offset > blob_.size() || count * 4 > blob_.size() - offset)
      fail(ErrorCode::TruncatedTensor, "tensor at offset " + std::to_string(offset) + " needs " +
                                           std::to_string(count * 4) + " bytes, blob has " +
                                           std::to_string(blob_.size()));
    std::vector<float> out(static_cast<std::size_t>(count));
    std::memcpy(out.data(), blob_.data() + offset, out.size() * sizeof(float));
    return out;
  }

  std::vector<float> read_vector(const json& tensors, const char* key, std::size_t* length = nullptr) const {
    std::vector<std::size_t> shape;
    auto v = read(tensors.at(key), shape);
    if (shape.size() != 1) fail(ErrorCode::ShapeCheckFailed, std::string(key) + " must be 1-D");
    if (length) *length = shape[0];
    return v;
  }

 private:
  std::span<const std::uint8_t> blob_;
};

json encode_layer(const Layer& layer, BlobWriter& blob) {
  json j{{"name", layer.name}, {"type", std::string(layer_type_name(layer.spec))}};
  if (const auto* c = std::get_if<Conv3D>(&layer.spec)) {
    j["stride"] = c->stride;
    j["padding"] = c->padding;
    const auto& k = c->kernel_shape;
    j["tensors"] = json{{"weight", blob.add({k[0], k[1], k[2], k[3], k[4]}, c->weights)},
                        {"bias", blob.add({c->bias.size()}, c->bias)}};
  } else if (const auto* b = std::get_if<BatchNorm>(&layer.spec)) {
    j["eps"] = b->eps;
    json t;
    t["gamma"] = blob.add({b->gamma.size()}, b->gamma);
    t["beta"] = blob.add({b->beta.size()}, b->beta);
    t["mean"] = blob.add({b->mean.size()}, b->mean);
    t["var"] = blob.add({b->var.size()}, b->var);
    j["tensors"] = t;
  } else if (const auto* m = std::get_if<MaxPool>(&layer.spec)) {
    j["kernel"] = m->kernel;
    j["stride"] = m->stride;
  } else if (const auto* u = std::get_if<UpsampleNearest>(&layer.spec)) {
    j["factor"] = u->factor;
  } else if (const auto* cat = std::get_if<Concat>(&layer.spec)) {
    j["source"] = cat->source;
  }
  return j;
}

Layer decode_layer(const json& j, const BlobReader& blob) {
  Layer layer;
  layer.name = j.value("name", std::string{});
  const auto type = j.at("type").get<std::string>();
  if (type == "conv3d") {
    Conv3D c;
    std::vector<std::size_t> shape;
    c.weights = blob.read(j.at("tensors").at("weight"), shape);
    if (shape.size() != 5) fail(ErrorCode::ShapeCheckFailed, "conv3d weight must be 5-D");
    for (int i = 0; i < 5; ++i) c.kernel_shape[i] = shape[i];
    c.bias = blob.read_vector(j.at("tensors"), "bias");
    c.stride = triple(j, "stride");
    c.padding = triple(j, "padding");
    layer.spec = std::move(c);
  } else if (type == "batchnorm") {
    BatchNorm b;
    const json& t = j.at("tensors");
    b.gamma = blob.read_vector(t, "gamma");
    b.beta = blob.read_vector(t, "beta");
    b.mean = blob.read_vector(t, "mean");
    b.var = blob.read_vector(t, "var");
    b.eps = j.at("eps").get<float>();
    layer.spec = std::move(b);
  } else if (type == "relu") {
    layer.spec = ReLU{};
  } else if (type == "maxpool") {
    layer.spec = MaxPool{triple(j, "kernel"), triple(j, "stride")};
  } else if (type == "upsample") {
    layer.spec = UpsampleNearest{triple(j, "factor")};
  } else if (type == "concat") {
    layer.spec = Concat{j.at("source").get<std::string>()};
  } else if (type == "softmax") {
    layer.spec = Softmax{};
  } else {
    fail(ErrorCode::BadManifest, "unknown layer type '" + type + "'");
  }
  return layer;
}

}  // namespace

std::vector<std::uint8_t> save_networks(std::span<const NetworkSpec> nets) {
  BlobWriter blob;
  json networks = json::array();
  for (const NetworkSpec& net : nets) {
    json layers = json::array();
    for (const Layer& layer : net.layers) layers.push_back(encode_layer(layer, blob));
    networks.push_back(json{{"role", net.role},
                            {"input_channels", net.input_channels},
                            {"output_channels", net.output_channels},
                            {"layers", std::move(layers)}});
  }
  const std::string manifest = json{{"networks", std::move(networks)}}.dump();

  std::vector<std::uint8_t> out{'S', 'G', 'W', 'T'};
  append_u32(out, kSgwtVersion);
  append_u32(out, static_cast<std::uint32_t>(manifest.size()));
  out.insert(out.end(), manifest.begin(), manifest.end());
  const auto* p = reinterpret_cast<const std::uint8_t*>(blob.blob().data());
  out.insert(out.end(), p, p + blob.blob().size() * sizeof(float));
  return out;
}

std::vector<std::uint8_t> save_network(const NetworkSpec& net) { return save_networks(std::span(&net, 1)); }

std::vector<NetworkSpec> load_networks(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "SGWT", 4) != 0) fail(ErrorCode::BadMagic, "not an SGWT container");
  if (bytes.size() < 12) fail(ErrorCode::BadManifest, "container shorter than its 12-byte preamble");
  if (const auto v = read_u32(bytes, 4); v != kSgwtVersion)
    fail(ErrorCode::BadVersion, "unsupported SGWT version " + std::to_string(v));
  const std::uint64_t manifest_len = read_u32(bytes, 8);
  if (12 + manifest_len > bytes.size()) fail(ErrorCode::BadManifest, "manifest length exceeds container size");

  const std::string_view text(reinterpret_cast<const char*>(bytes.data() + 12), static_cast<std::size_t>(manifest_len));
  const BlobReader blob(bytes.subspan(12 + static_cast<std::size_t>(manifest_len)));

  std::vector<NetworkSpec> nets;
  try {
    const json manifest = json::parse(text);
    for (const json& jn : manifest.at("networks")) {
      NetworkSpec net;
      net.role = jn.value("role", std::string{});
      net.input_channels = jn.at("input_channels").get<std::size_t>();
      net.output_channels = jn.at("output_channels").get<std::size_t>();
      for (const json& jl : jn.at("layers")) net.layers.push_back(decode_layer(jl, blob));
      nets.push_back(std::move(net));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::BadManifest, e.what());
  }
  for (const NetworkSpec& net : nets) check_network(net);
  return nets;
}

NetworkSpec load_network(std::span<const std::uint8_t> bytes) {
  auto nets = load_networks(bytes);
  if (nets.size() != 1)
    fail(ErrorCode::BadManifest, "expected one network, container holds " + std::to_string(nets.size()));
  return std::move(nets.front());
}

std::vector<NetworkSpec> load_networks_file(const std::filesystem::path& path) {
  return load_networks(read_file_bytes(path));
}

}  // namespace wmh
