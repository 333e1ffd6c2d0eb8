// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "core/geometry.hpp"
#include "core/homography.hpp"

namespace vtnk::geometry {

struct RegionTransform {
  int region_id = 0;
  Eigen::Matrix3d matrix = Eigen::Matrix3d::Identity();  // source -> destination
};

enum class RegionStatus { Ok, Degenerate, Absent };

struct RegionOutcome {
  int region_id = 0;
  RegionStatus status = RegionStatus::Ok;
};

struct WarpResult {
  Image image;    // 0 where nothing was written
  Mask coverage;  // 1 where some region wrote a pixel
  std::vector<RegionOutcome> per_region_status;
};

/// Piecewise perspective warp. Each output pixel is inverse-mapped through
/// its region's homography and bilinearly sampled from the region's source
/// pixels only; a pixel belongs to a region when the nearest source pixel of
/// its pre-image is inside the region mask. Regions are painted in the order
/// given, so later regions overwrite earlier ones. Regions whose matrix is
/// singular are skipped and reported Degenerate.
WarpResult piecewise_warp(const Image& image, std::span<const RegionMask> masks,
                          std::span<const RegionTransform> transforms, ImageSize out_size);

/// Union of coverage; where both cover a pixel the overlay wins.
WarpResult merge_warps(const WarpResult& base, const WarpResult& overlay);

}  // namespace vtnk::geometry
