// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic stick-figure people and small random helpers shared by tests.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>

#include "core/geometry.hpp"
#include "core/tensor.hpp"
#include "core/tryon.hpp"

namespace fixtures {

using vtnk::Image;
using vtnk::ImageSize;
using vtnk::Mask;
using namespace vtnk::geometry;

struct Rng {
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(eng); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng); }
  std::mt19937_64 eng;
};

using Pose = std::map<int, std::array<double, 2>>;

inline constexpr ImageSize kBodySize{128, 96};

/// Arms hanging slightly outwards, legs straight.
inline Pose canonical_pose() {
  return {{Nose, {48, 16}},      {Neck, {48, 30}},      {RShoulder, {35, 32}}, {LShoulder, {61, 32}},
          {RElbow, {27, 55}},    {LElbow, {69, 55}},    {RWrist, {22, 76}},    {LWrist, {74, 76}},
          {MidHip, {48, 78}},    {RHip, {40, 78}},      {LHip, {56, 78}},      {RKnee, {39, 101}},
          {LKnee, {57, 101}},    {RAnkle, {38, 122}},   {LAnkle, {58, 122}},   {REye, {45, 13}},
          {LEye, {51, 13}}};
}

/// A different body: wider stance, raised elbows, slight shift.
inline Pose target_pose() {
  return {{Nose, {50, 18}},      {Neck, {50, 33}},      {RShoulder, {36, 35}}, {LShoulder, {64, 35}},
          {RElbow, {23, 54}},    {LElbow, {77, 52}},    {RWrist, {15, 70}},    {LWrist, {84, 66}},
          {MidHip, {50, 82}},    {RHip, {41, 82}},      {LHip, {59, 82}},      {RKnee, {38, 104}},
          {LKnee, {62, 104}},    {RAnkle, {36, 124}},   {LAnkle, {64, 124}},   {REye, {47, 15}},
          {LEye, {53, 15}}};
}

inline Pose translated(const Pose& p, double dx, double dy) {
  Pose out;
  for (const auto& [k, v] : p) out[k] = {v[0] + dx, v[1] + dy};
  return out;
}

inline Skeleton skeleton_of(const Pose& pose, ImageSize size = kBodySize) {
  std::array<Keypoint, kNumKeypoints> kps{};
  for (const auto& [k, v] : pose) kps[static_cast<std::size_t>(k)] = {v[0], v[1], 0.9};
  return Skeleton(kps, size);
}

inline double segment_distance(double px, double py, std::array<double, 2> a, std::array<double, 2> b) {
  const double vx = b[0] - a[0], vy = b[1] - a[1];
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((px - a[0]) * vx + (py - a[1]) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (a[0] + t * vx), dy = py - (a[1] + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

inline bool in_convex_quad(double px, double py, const std::array<std::array<double, 2>, 4>& q) {
  int sign = 0;
  for (int i = 0; i < 4; ++i) {
    const auto& a = q[static_cast<std::size_t>(i)];
    const auto& b = q[static_cast<std::size_t>((i + 1) % 4)];
    const double cross = (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0]);
    const int s = cross > 0 ? 1 : (cross < 0 ? -1 : 0);
    if (s == 0) continue;
    if (sign == 0) sign = s;
    else if (s != sign) return false;
  }
  return true;
}

/// Part-label map of a stick figure: limbs are thick segments painted over
/// the torso quad, head a disk.
inline SegmentationMap parsing_of(const Pose& p, ImageSize size = kBodySize) {
  std::vector<int> labels(static_cast<std::size_t>(size.height) * size.width, Background);
  const std::array<std::array<double, 2>, 4> torso = {p.at(RShoulder), p.at(LShoulder), p.at(LHip), p.at(RHip)};
  struct Limb {
    int a, b, label;
    double radius;
  };
  const Limb legs[] = {{RHip, RKnee, RightUpperLeg, 4.5}, {LHip, LKnee, LeftUpperLeg, 4.5},
                       {RKnee, RAnkle, RightLowerLeg, 3.5}, {LKnee, LAnkle, LeftLowerLeg, 3.5}};
  const Limb arms[] = {{RShoulder, RElbow, RightUpperArm, 4.0}, {LShoulder, LElbow, LeftUpperArm, 4.0},
                       {RElbow, RWrist, RightLowerArm, 3.0}, {LElbow, LWrist, LeftLowerArm, 3.0}};
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      int l = Background;
      if (in_convex_quad(x, y, torso)) l = Torso;
      if (y >= p.at(MidHip)[1] - 4 && y <= p.at(MidHip)[1] + 8 && x >= p.at(RHip)[0] - 5 && x <= p.at(LHip)[0] + 5) l = Hip;
      for (const auto& limb : legs) {
        if (segment_distance(x, y, p.at(limb.a), p.at(limb.b)) <= limb.radius) l = limb.label;
      }
      for (const auto& limb : arms) {
        if (segment_distance(x, y, p.at(limb.a), p.at(limb.b)) <= limb.radius) l = limb.label;
      }
      for (int w : {RWrist, LWrist}) {
        const auto& c = p.at(w);
        if (std::hypot(x - c[0], y - c[1]) <= 3.0) l = Hands;
      }
      const auto& n = p.at(Nose);
      if (std::hypot(x - n[0], y - n[1] + 2) <= 9.0) l = Head;
      labels[static_cast<std::size_t>(y) * size.width + x] = l;
    }
  }
  return SegmentationMap(size.height, size.width, std::move(labels));
}

struct Palette {
  std::array<double, 3> background{0.92, 0.92, 0.90};
  std::array<double, 3> skin{0.85, 0.68, 0.55};
  std::array<double, 3> shirt{0.20, 0.35, 0.75};
  std::array<double, 3> sleeve{0.80, 0.25, 0.20};
  std::array<double, 3> trousers{0.25, 0.25, 0.30};
};

inline bool is_upper_label(int l) {
  return l == Torso || l == LeftUpperArm || l == RightUpperArm || l == LeftLowerArm || l == RightLowerArm;
}

/// Flat-shaded rendering: torso in shirt colour, arms in sleeve colour (the
/// two garment patches), legs and hip in trousers colour.
inline Image render(const SegmentationMap& parsing, const Palette& pal = {}) {
  Image img(parsing.height(), parsing.width());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const int l = parsing.label(y, x);
      std::array<double, 3> c = pal.background;
      if (l == Torso) c = pal.shirt;
      else if (l >= LeftUpperArm && l <= RightLowerArm) c = pal.sleeve;
      else if (l == Hip || (l >= LeftUpperLeg && l <= RightLowerLeg)) c = pal.trousers;
      else if (l == Head || l == Hands || l == Feet) c = pal.skin;
      for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = c[static_cast<std::size_t>(ch)];
    }
  }
  return img;
}

/// Upper-garment pixels grown by `grow` pixels (Chebyshev).
inline Mask agnostic_mask_of(const SegmentationMap& parsing, int grow = 3) {
  Mask m(parsing.height(), parsing.width());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      bool hit = false;
      for (int dy = -grow; dy <= grow && !hit; ++dy) {
        for (int dx = -grow; dx <= grow && !hit; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy >= 0 && yy < m.height() && xx >= 0 && xx < m.width()) hit = is_upper_label(parsing.label(yy, xx));
        }
      }
      m.at(y, x) = hit ? 1 : 0;
    }
  }
  return m;
}

inline Image grey_out(const Image& img, const Mask& mask, double value = 0.5) {
  Image out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!mask.test(y, x)) continue;
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = value;
    }
  }
  return out;
}

inline Mask upper_garment_mask(const SegmentationMap& parsing) {
  Mask m(parsing.height(), parsing.width());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) m.at(y, x) = is_upper_label(parsing.label(y, x)) ? 1 : 0;
  }
  return m;
}

/// Pixels of the agnostic region within `radius` of a pixel of a different
/// colour in the garment-infused image: the stitching seams.
inline Mask seam_band(const Image& infused, const Mask& agnostic, int radius = 4) {
  Mask band(infused.height(), infused.width());
  auto differs = [&](int y0, int x0, int y1, int x1) {
    for (int c = 0; c < 3; ++c) {
      if (std::abs(infused.at(y0, x0, c) - infused.at(y1, x1, c)) > 1e-9) return true;
    }
    return false;
  };
  for (int y = 0; y < infused.height(); ++y) {
    for (int x = 0; x < infused.width(); ++x) {
      if (!agnostic.test(y, x)) continue;
      bool hit = false;
      for (int dy = -radius; dy <= radius && !hit; ++dy) {
        for (int dx = -radius; dx <= radius && !hit; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy >= 0 && yy < infused.height() && xx >= 0 && xx < infused.width()) hit = differs(y, x, yy, xx);
        }
      }
      band.at(y, x) = hit ? 1 : 0;
    }
  }
  return band;
}

/// Garment worn by a model (canonical pose) transferred onto a target
/// person (target pose): the two-patch (shirt + sleeves) stitching setup.
struct TryOnScene {
  vtnk::pipeline::TryOnInputs inputs;
  Pose model_pose;
  Pose person_pose;
};

inline TryOnScene two_patch_scene() {
  TryOnScene s;
  s.model_pose = canonical_pose();
  s.person_pose = target_pose();
  Palette person_palette;
  person_palette.shirt = {0.55, 0.55, 0.35};
  person_palette.sleeve = {0.55, 0.55, 0.35};
  const auto person_parse = parsing_of(s.person_pose);
  const auto model_parse = parsing_of(s.model_pose);
  auto& in = s.inputs;
  in.person = render(person_parse, person_palette);
  in.agnostic_mask = agnostic_mask_of(person_parse);
  in.agnostic = grey_out(in.person, in.agnostic_mask);
  in.person_annotation = {skeleton_of(s.person_pose), person_parse};
  in.garment = render(model_parse);
  in.garment_mask = upper_garment_mask(model_parse);
  in.garment_annotation = vtnk::pipeline::Annotation{skeleton_of(s.model_pose), model_parse};
  return s;
}

/// Writes a keypoint document for one person.
inline std::string keypoint_json(const Pose& pose) {
  std::string s = "{\"version\": 1.3, \"people\": [{\"pose_keypoints_2d\": [";
  for (int i = 0; i < kNumKeypoints; ++i) {
    const auto it = pose.find(i);
    const double x = it == pose.end() ? 0.0 : it->second[0];
    const double y = it == pose.end() ? 0.0 : it->second[1];
    const double c = it == pose.end() ? 0.0 : 0.9;
    s += (i ? ", " : "") + std::to_string(x) + ", " + std::to_string(y) + ", " + std::to_string(c);
  }
  return s + "]}]}";
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("vtnk_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
