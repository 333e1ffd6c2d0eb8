// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "core/tensor.hpp"

namespace vtnk::pipeline {

/// Desk-scale stand-in for a VAE: 8x average pooling to a 4-channel latent
/// (RGB mapped to [-1, 1], plus their mean) and replication on decode.
class LatentCodec {
 public:
  static constexpr int kFactor = 8;
  static constexpr int kLatentChannels = 4;

  /// Throws DimensionMismatch unless both dims are multiples of kFactor.
  LatentTensor encode(const Image& image) const;
  /// One channel in [0, 1]: the fraction of set pixels per latent cell.
  LatentTensor encode_mask(const Mask& mask) const;
  Image decode(const LatentTensor& latent) const;

  ImageSize latent_size(ImageSize image) const;
};

}  // namespace vtnk::pipeline
