#include "wmh/tensor.hpp"

#include <algorithm>

#include "wmh/error.hpp"

namespace wmh {

std::string Shape4::str() const {
  return "(" + std::to_string(c) + "," + std::to_string(d) + "," + std::to_string(h) + "," + std::to_string(w) + ")";
}

Tensor4::Tensor4(Shape4 shape, float fill) : shape_(shape) {
  if (shape.c == 0 || shape.d == 0 || shape.h == 0 || shape.w == 0)
    fail(ErrorCode::ShapeMismatch, "tensor dims must be >= 1, got " + shape.str());
  data_.assign(shape.count(), fill);
}

Tensor4::Tensor4(Shape4 shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
  if (shape.c == 0 || shape.d == 0 || shape.h == 0 || shape.w == 0)
    fail(ErrorCode::ShapeMismatch, "tensor dims must be >= 1, got " + shape.str());
  if (data_.size() != shape.count()) fail(ErrorCode::ShapeMismatch, "tensor data length mismatch");
}

Tensor4 tensor_from_volume(const Volume3D& v) {
  const Shape4 s{1, v.dims()[2], v.dims()[1], v.dims()[0]};
  return Tensor4(s, std::vector<float>(v.data().begin(), v.data().end()));
}

Tensor4 tensor_from_volumes(std::span<const Volume3D> volumes) {
  if (volumes.empty()) fail(ErrorCode::InvalidArgument, "no volumes to stack");
  const Volume3D& first = volumes.front();
  const Shape4 s{volumes.size(), first.dims()[2], first.dims()[1], first.dims()[0]};
  Tensor4 t(s);
  for (std::size_t c = 0; c < volumes.size(); ++c) {
    if (volumes[c].dims() != first.dims()) fail(ErrorCode::ShapeMismatch, "stacked volumes differ in dims");
    std::copy(volumes[c].data().begin(), volumes[c].data().end(), t.channel(c).begin());
  }
  return t;
}

Volume3D volume_from_channel(const Tensor4& t, std::size_t channel, const Volume3D& geometry) {
  const Shape4& s = t.shape();
  if (channel >= s.c) fail(ErrorCode::ShapeMismatch, "channel index out of range");
  const Dims dims{s.w, s.h, s.d};
  if (dims != geometry.dims()) fail(ErrorCode::ShapeMismatch, "tensor spatial dims differ from geometry");
  const auto ch = t.channel(channel);
  return Volume3D(dims, geometry.spacing(), geometry.orientation(), std::vector<float>(ch.begin(), ch.end()));
}

}  // namespace wmh
