// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <span>

#include <Eigen/Core>

#include "core/geometry.hpp"

namespace vtnk::geometry {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// 3x3 projective map normalised so that element (2,2) is 1.
class Homography {
 public:
  /// Identity.
  Homography();

  /// Normalises by m(2,2). Throws DegenerateCorners if the matrix cannot be
  /// normalised or is singular.
  static Homography from_matrix(const Eigen::Matrix3d& m);
  static Homography translation(double tx, double ty);

  const Eigen::Matrix3d& matrix() const { return m_; }
  Point2 apply(Point2 p) const;
  Homography inverse() const;

  /// Matrix product this * other (apply `other` first).
  Homography compose(const Homography& other) const;

 private:
  explicit Homography(const Eigen::Matrix3d& m) : m_(m) {}
  Eigen::Matrix3d m_;
};

struct LmOptions {
  int max_iterations = 100;
  double initial_damping = 1e-3;
  double cost_tolerance = 1e-10;  // on the change of the squared residual
};

struct HomographyFit {
  Homography homography;
  bool converged = true;
  int iterations = 0;
  double max_reprojection_error = 0.0;
};

/// Four-point homography: normalised DLT initial guess refined by
/// Levenberg-Marquardt on the corner reprojection residuals. Throws
/// DegenerateCorners when three source or destination corners are collinear.
/// A fit that hits the iteration cap is returned with converged == false.
HomographyFit estimate_homography(std::span<const Point2, 4> src, std::span<const Point2, 4> dst,
                                  const LmOptions& options = {});

/// Corners in (top-left, top-right, bottom-right, bottom-left) order.
std::array<Point2, 4> corners(const BoundingBox& box);

}  // namespace vtnk::geometry
