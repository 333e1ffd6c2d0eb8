// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/homography.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "core/error.hpp"

namespace vtnk::geometry {

namespace {

constexpr double kSingularDet = 1e-12;

using Matrix8d = Eigen::Matrix<double, 8, 8>;
using Vector8d = Eigen::Matrix<double, 8, 1>;

bool any_three_collinear(std::span<const Point2, 4> p) {
  double scale = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) scale = std::max(scale, std::hypot(p[i].x - p[j].x, p[i].y - p[j].y));
  }
  if (scale == 0.0) return true;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      for (int k = j + 1; k < 4; ++k) {
        const double cross = (p[j].x - p[i].x) * (p[k].y - p[i].y) - (p[j].y - p[i].y) * (p[k].x - p[i].x);
        if (std::abs(cross) <= 1e-9 * scale * scale) return true;
      }
    }
  }
  return false;
}

// Hartley conditioning: centroid at origin, mean distance sqrt(2).
Eigen::Matrix3d conditioner(std::span<const Point2, 4> p) {
  double cx = 0, cy = 0;
  for (const auto& q : p) {
    cx += q.x;
    cy += q.y;
  }
  cx /= 4;
  cy /= 4;
  double mean = 0;
  for (const auto& q : p) mean += std::hypot(q.x - cx, q.y - cy);
  mean /= 4;
  const double s = std::sqrt(2.0) / mean;
  Eigen::Matrix3d t;
  t << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
  return t;
}

Eigen::Matrix3d dlt(std::span<const Point2, 4> src, std::span<const Point2, 4> dst) {
  const Eigen::Matrix3d ts = conditioner(src);
  const Eigen::Matrix3d td = conditioner(dst);
  Eigen::Matrix<double, 8, 9> a;
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector3d s = ts * Eigen::Vector3d(src[i].x, src[i].y, 1.0);
    const Eigen::Vector3d d = td * Eigen::Vector3d(dst[i].x, dst[i].y, 1.0);
    const double x = s.x() / s.z(), y = s.y() / s.z();
    const double u = d.x() / d.z(), v = d.y() / d.z();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 8, 9>> svd(a, Eigen::ComputeFullV);
  const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return td.inverse() * hn * ts;
}

Eigen::Matrix3d unpack(const Vector8d& p) {
  Eigen::Matrix3d m;
  m << p(0), p(1), p(2), p(3), p(4), p(5), p(6), p(7), 1.0;
  return m;
}

Vector8d residuals(const Vector8d& p, std::span<const Point2, 4> src, std::span<const Point2, 4> dst) {
  Vector8d r;
  for (int i = 0; i < 4; ++i) {
    const double w = p(6) * src[i].x + p(7) * src[i].y + 1.0;
    r(2 * i) = (p(0) * src[i].x + p(1) * src[i].y + p(2)) / w - dst[i].x;
    r(2 * i + 1) = (p(3) * src[i].x + p(4) * src[i].y + p(5)) / w - dst[i].y;
  }
  return r;
}

Matrix8d jacobian(const Vector8d& p, std::span<const Point2, 4> src) {
  Matrix8d j = Matrix8d::Zero();
  for (int i = 0; i < 4; ++i) {
    const double x = src[i].x, y = src[i].y;
    const double w = p(6) * x + p(7) * y + 1.0;
    const double u = (p(0) * x + p(1) * y + p(2)) / w;
    const double v = (p(3) * x + p(4) * y + p(5)) / w;
    j.row(2 * i) << x / w, y / w, 1 / w, 0, 0, 0, -u * x / w, -u * y / w;
    j.row(2 * i + 1) << 0, 0, 0, x / w, y / w, 1 / w, -v * x / w, -v * y / w;
  }
  return j;
}

}  // namespace

Homography::Homography() : m_(Eigen::Matrix3d::Identity()) {}

Homography Homography::from_matrix(const Eigen::Matrix3d& m) {
  if (!m.allFinite()) fail(ErrorCode::DegenerateCorners, "homography has non-finite entries");
  if (std::abs(m(2, 2)) <= 1e-12 * m.cwiseAbs().maxCoeff()) {
    fail(ErrorCode::DegenerateCorners, "homography maps the origin to infinity and cannot be normalised");
  }
  const Eigen::Matrix3d n = m / m(2, 2);
  if (std::abs(n.determinant()) <= kSingularDet) fail(ErrorCode::DegenerateCorners, "homography is singular");
  return Homography(n);
}

Homography Homography::translation(double tx, double ty) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 2) = tx;
  m(1, 2) = ty;
  return Homography(m);
}

Point2 Homography::apply(Point2 p) const {
  const Eigen::Vector3d q = m_ * Eigen::Vector3d(p.x, p.y, 1.0);
  return {q.x() / q.z(), q.y() / q.z()};
}

Homography Homography::inverse() const { return from_matrix(m_.inverse()); }

Homography Homography::compose(const Homography& other) const { return from_matrix(m_ * other.m_); }

std::array<Point2, 4> corners(const BoundingBox& box) {
  return {Point2{box.x_min, box.y_min}, Point2{box.x_max, box.y_min}, Point2{box.x_max, box.y_max},
          Point2{box.x_min, box.y_max}};
}

HomographyFit estimate_homography(std::span<const Point2, 4> src, std::span<const Point2, 4> dst,
                                  const LmOptions& options) {
  for (int i = 0; i < 4; ++i) {
    if (!std::isfinite(src[i].x) || !std::isfinite(src[i].y) || !std::isfinite(dst[i].x) ||
        !std::isfinite(dst[i].y)) {
      fail(ErrorCode::InvalidArgument, "homography corners must be finite");
    }
  }
  if (any_three_collinear(src)) fail(ErrorCode::DegenerateCorners, "three source corners are collinear");
  if (any_three_collinear(dst)) fail(ErrorCode::DegenerateCorners, "three destination corners are collinear");

  const Homography init = Homography::from_matrix(dlt(src, dst));
  const Eigen::Matrix3d& m0 = init.matrix();
  Vector8d p;
  p << m0(0, 0), m0(0, 1), m0(0, 2), m0(1, 0), m0(1, 1), m0(1, 2), m0(2, 0), m0(2, 1);

  HomographyFit fit;
  double cost = residuals(p, src, dst).squaredNorm();
  double damping = options.initial_damping;
  fit.converged = false;
  // An exact DLT solution leaves nothing for LM to improve.
  if (cost <= 1e-24) fit.converged = true;

  while (!fit.converged && fit.iterations < options.max_iterations) {
    ++fit.iterations;
    const Vector8d r = residuals(p, src, dst);
    const Matrix8d j = jacobian(p, src);
    const Matrix8d jtj = j.transpose() * j;
    const Vector8d g = j.transpose() * r;

    bool accepted = false;
    while (!accepted && damping < 1e12) {
      Matrix8d a = jtj;
      a.diagonal() += damping * jtj.diagonal().cwiseMax(1e-12);
      const Vector8d step = a.ldlt().solve(-g);
      const Vector8d candidate = p + step;
      const double candidate_cost = residuals(candidate, src, dst).squaredNorm();
      if (std::isfinite(candidate_cost) && candidate_cost < cost) {
        const double change = cost - candidate_cost;
        p = candidate;
        cost = candidate_cost;
        damping /= 10.0;
        accepted = true;
        if (change < options.cost_tolerance) fit.converged = true;
      } else {
        damping *= 10.0;
      }
    }
    // No descent direction left: the iterate is a local minimum.
    if (!accepted) fit.converged = true;
  }

  fit.homography = Homography::from_matrix(unpack(p));
  const Vector8d r = residuals(p, src, dst);
  for (int i = 0; i < 4; ++i) {
    fit.max_reprojection_error = std::max(fit.max_reprojection_error, std::hypot(r(2 * i), r(2 * i + 1)));
  }
  return fit;
}

}  // namespace vtnk::geometry
