// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "core/error.hpp"

namespace vtnk {

namespace {

void check_dims(int a, int b, int c) {
  if (a <= 0 || b <= 0 || c <= 0) {
    fail(ErrorCode::InvalidArgument, "tensor dimensions must be positive, got " + std::to_string(a) + "x" +
                                         std::to_string(b) + "x" + std::to_string(c));
  }
}

}  // namespace

Image::Image(int height, int width, double fill) : height_(height), width_(width) {
  check_dims(height, width, kChannels);
  data_.assign(static_cast<std::size_t>(height) * width * kChannels, fill);
}

Mask::Mask(int height, int width, std::uint8_t fill) : height_(height), width_(width) {
  check_dims(height, width, 1);
  data_.assign(static_cast<std::size_t>(height) * width, fill ? 1 : 0);
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count_if(data_.begin(), data_.end(), [](auto v) { return v != 0; }));
}

Mask Mask::inverted() const {
  Mask out = *this;
  for (auto& v : out.data_) v = v ? 0 : 1;
  return out;
}

LatentTensor::LatentTensor(int channels, int height, int width, double fill)
    : channels_(channels), height_(height), width_(width) {
  check_dims(channels, height, width);
  data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

bool LatentTensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

LatentTensor concat_channels(const LatentTensor& a, const LatentTensor& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    fail(ErrorCode::ShapeMismatch, "cannot concatenate latents with different spatial dims");
  }
  LatentTensor out(a.channels() + b.channels(), a.height(), a.width());
  std::copy(a.data().begin(), a.data().end(), out.data().begin());
  std::copy(b.data().begin(), b.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(a.size()));
  return out;
}

LatentTensor gaussian_noise(int channels, int height, int width, std::uint64_t seed) {
  LatentTensor out(channels, height, width);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : out.data()) v = normal(rng);
  return out;
}

}  // namespace vtnk
