// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/codec.hpp"

#include <algorithm>
#include <string>

#include "core/error.hpp"

namespace vtnk::pipeline {

ImageSize LatentCodec::latent_size(ImageSize image) const {
  if (image.height % kFactor != 0 || image.width % kFactor != 0 || image.height <= 0 || image.width <= 0) {
    fail(ErrorCode::DimensionMismatch, "image dims " + std::to_string(image.height) + "x" +
                                           std::to_string(image.width) + " are not multiples of " +
                                           std::to_string(kFactor));
  }
  return {image.height / kFactor, image.width / kFactor};
}

LatentTensor LatentCodec::encode(const Image& image) const {
  const ImageSize ls = latent_size(image.size());
  LatentTensor z(kLatentChannels, ls.height, ls.width);
  const double inv_area = 1.0 / (kFactor * kFactor);
  for (int ly = 0; ly < ls.height; ++ly) {
    for (int lx = 0; lx < ls.width; ++lx) {
      double acc[3] = {0, 0, 0};
      for (int y = ly * kFactor; y < (ly + 1) * kFactor; ++y) {
        for (int x = lx * kFactor; x < (lx + 1) * kFactor; ++x) {
          for (int c = 0; c < 3; ++c) acc[c] += image.at(y, x, c);
        }
      }
      double mean = 0.0;
      for (int c = 0; c < 3; ++c) {
        z.at(c, ly, lx) = 2.0 * acc[c] * inv_area - 1.0;
        mean += z.at(c, ly, lx);
      }
      z.at(3, ly, lx) = mean / 3.0;
    }
  }
  return z;
}

LatentTensor LatentCodec::encode_mask(const Mask& mask) const {
  const ImageSize ls = latent_size(mask.size());
  LatentTensor z(1, ls.height, ls.width);
  for (int ly = 0; ly < ls.height; ++ly) {
    for (int lx = 0; lx < ls.width; ++lx) {
      int set = 0;
      for (int y = ly * kFactor; y < (ly + 1) * kFactor; ++y) {
        for (int x = lx * kFactor; x < (lx + 1) * kFactor; ++x) set += mask.test(y, x) ? 1 : 0;
      }
      z.at(0, ly, lx) = static_cast<double>(set) / (kFactor * kFactor);
    }
  }
  return z;
}

Image LatentCodec::decode(const LatentTensor& latent) const {
  if (latent.channels() < 3) fail(ErrorCode::ShapeMismatch, "latent needs at least 3 channels to decode");
  Image img(latent.height() * kFactor, latent.width() * kFactor);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        img.at(y, x, c) = std::clamp(0.5 * (latent.at(c, y / kFactor, x / kFactor) + 1.0), 0.0, 1.0);
      }
    }
  }
  return img;
}

}  // namespace vtnk::pipeline
