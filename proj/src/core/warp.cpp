// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/warp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "core/error.hpp"

namespace vtnk::geometry {

namespace {

struct PixelRange {
  int x0, y0, x1, y1;
};

// Output rectangle that can receive pixels from the mask, or the whole
// output when the projected mask bounds straddle the horizon.
PixelRange destination_range(const Mask& mask, const Eigen::Matrix3d& forward, ImageSize out) {
  const PixelRange all{0, 0, out.width - 1, out.height - 1};
  BoundingBox b;
  try {
    b = mask_bounds(mask);
  } catch (const Error&) {
    return {0, 0, -1, -1};
  }
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (double cx : {b.x_min - 1.0, b.x_max + 1.0}) {
    for (double cy : {b.y_min - 1.0, b.y_max + 1.0}) {
      const Eigen::Vector3d q = forward * Eigen::Vector3d(cx, cy, 1.0);
      if (q.z() <= 1e-12) return all;
      x0 = std::min(x0, q.x() / q.z());
      y0 = std::min(y0, q.y() / q.z());
      x1 = std::max(x1, q.x() / q.z());
      y1 = std::max(y1, q.y() / q.z());
    }
  }
  PixelRange r;
  r.x0 = static_cast<int>(std::max(0.0, std::floor(x0) - 1));
  r.y0 = static_cast<int>(std::max(0.0, std::floor(y0) - 1));
  r.x1 = static_cast<int>(std::min<double>(out.width - 1, std::ceil(x1) + 1));
  r.y1 = static_cast<int>(std::min<double>(out.height - 1, std::ceil(y1) + 1));
  return r;
}

bool singular(const Eigen::Matrix3d& m) {
  if (!m.allFinite()) return true;
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  return std::abs((m / scale).determinant()) <= 1e-12;
}

}  // namespace

WarpResult piecewise_warp(const Image& image, std::span<const RegionMask> masks,
                          std::span<const RegionTransform> transforms, ImageSize out_size) {
  if (out_size.height <= 0 || out_size.width <= 0) fail(ErrorCode::InvalidArgument, "output size must be positive");

  WarpResult out;
  out.image = Image(out_size.height, out_size.width, 0.0);
  out.coverage = Mask(out_size.height, out_size.width);

  const int sh = image.height(), sw = image.width();
  for (const auto& rm : masks) {
    if (rm.mask.size() != image.size()) {
      fail(ErrorCode::DimensionMismatch, "mask for region " + std::to_string(rm.region_id) + " does not match image");
    }
    const auto it = std::find_if(transforms.begin(), transforms.end(),
                                 [&](const RegionTransform& t) { return t.region_id == rm.region_id; });
    if (it == transforms.end()) {
      fail(ErrorCode::MissingHomography, "no homography for region " + std::to_string(rm.region_id));
    }
    if (singular(it->matrix)) {
      out.per_region_status.push_back({rm.region_id, RegionStatus::Degenerate});
      continue;
    }
    const Eigen::Matrix3d inv = it->matrix.inverse();
    const PixelRange range = destination_range(rm.mask, it->matrix, out_size);

    for (int y = range.y0; y <= range.y1; ++y) {
      for (int x = range.x0; x <= range.x1; ++x) {
        const Eigen::Vector3d q = inv * Eigen::Vector3d(x, y, 1.0);
        if (std::abs(q.z()) <= 1e-12) continue;
        const double sx = q.x() / q.z(), sy = q.y() / q.z();
        if (!(sx > -1.0 && sy > -1.0 && sx < sw && sy < sh)) continue;
        const int nx = static_cast<int>(std::floor(sx + 0.5));
        const int ny = static_cast<int>(std::floor(sy + 0.5));
        if (nx < 0 || ny < 0 || nx >= sw || ny >= sh || !rm.mask.test(ny, nx)) continue;

        // Bilinear over the in-region neighbours, renormalised.
        const int x0 = static_cast<int>(std::floor(sx)), y0 = static_cast<int>(std::floor(sy));
        const double fx = sx - x0, fy = sy - y0;
        double acc[Image::kChannels] = {0, 0, 0};
        double wsum = 0.0;
        for (int dy = 0; dy <= 1; ++dy) {
          for (int dx = 0; dx <= 1; ++dx) {
            const int px = x0 + dx, py = y0 + dy;
            if (px < 0 || py < 0 || px >= sw || py >= sh || !rm.mask.test(py, px)) continue;
            const double w = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy);
            if (w == 0.0) continue;
            wsum += w;
            for (int c = 0; c < Image::kChannels; ++c) acc[c] += w * image.at(py, px, c);
          }
        }
        if (wsum <= 0.0) continue;
        for (int c = 0; c < Image::kChannels; ++c) {
          out.image.at(y, x, c) = std::clamp(acc[c] / wsum, 0.0, 1.0);
        }
        out.coverage.at(y, x) = 1;
      }
    }
    out.per_region_status.push_back({rm.region_id, RegionStatus::Ok});
  }
  return out;
}

WarpResult merge_warps(const WarpResult& base, const WarpResult& overlay) {
  if (base.image.size() != overlay.image.size()) fail(ErrorCode::DimensionMismatch, "cannot merge warps of different size");
  WarpResult out = base;
  for (int y = 0; y < out.image.height(); ++y) {
    for (int x = 0; x < out.image.width(); ++x) {
      if (!overlay.coverage.test(y, x)) continue;
      out.coverage.at(y, x) = 1;
      for (int c = 0; c < Image::kChannels; ++c) out.image.at(y, x, c) = overlay.image.at(y, x, c);
    }
  }
  out.per_region_status.insert(out.per_region_status.end(), overlay.per_region_status.begin(),
                               overlay.per_region_status.end());
  return out;
}

}  // namespace vtnk::geometry
