// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "core/attention.hpp"
#include "core/geometry.hpp"
#include "core/tensor.hpp"

namespace vtnk::io {

/// Interchange tensor: "VTNK", u16 version, u8 dtype (0 = f32), u8 rank,
/// rank x u32 dims, then row-major f32 payload. All little-endian.
inline constexpr char kMagic[4] = {'V', 'T', 'N', 'K'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::uint8_t kDtypeF32 = 0;

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t element_count() const;
  std::string dims_string() const;  // e.g. "4x8x8"
};

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
/// Throws BadMagic, UnsupportedVersion, UnsupportedFormat or TruncatedPayload.
Tensor decode_tensor(const std::vector<std::uint8_t>& bytes);

Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const Tensor& t);

Tensor from_latent(const LatentTensor& latent);
/// Rank 3 (C x H x W) or rank 2 (H x W, one channel).
LatentTensor to_latent(const Tensor& t);
Tensor from_matrix(const attention::Matrix& m);
attention::Matrix to_matrix(const Tensor& t);

/// Keypoint document: {"people": [{"pose_keypoints_2d": [x, y, c] * 25}, ...]}.
std::vector<geometry::Skeleton> parse_keypoints(const std::string& text, ImageSize image_size);
std::vector<geometry::Skeleton> read_keypoints(const std::filesystem::path& path, ImageSize image_size);
/// First person of a keypoint file; MalformedDocument if there is none.
geometry::Skeleton read_pose(const std::filesystem::path& path, ImageSize image_size);

/// 8-bit RGB or grey PNG, values scaled to [0, 1].
Image read_image(const std::filesystem::path& path);
/// 8-bit grey PNG, value >= 128 is set.
Mask read_mask(const std::filesystem::path& path);
/// 8-bit grey PNG whose values are part labels.
geometry::SegmentationMap read_segmentation(const std::filesystem::path& path);

void write_image(const std::filesystem::path& path, const Image& image);
void write_mask(const std::filesystem::path& path, const Mask& mask);
void write_segmentation(const std::filesystem::path& path, const geometry::SegmentationMap& map);

/// Flattened interchange tensor of any rank.
std::vector<double> read_embedding(const std::filesystem::path& path);

}  // namespace vtnk::io
