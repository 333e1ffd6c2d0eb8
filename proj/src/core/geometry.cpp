// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "core/error.hpp"

namespace vtnk::geometry {

namespace {

bool inside_image(double x, double y, ImageSize size) {
  return x >= 0.0 && y >= 0.0 && x <= size.width - 1 && y <= size.height - 1;
}

RegionSpec make_upper(RegionCategory category) {
  RegionSpec spec;
  spec.category = category;
  spec.regions = {
      {1, {Neck, RShoulder, LShoulder, MidHip, RHip, LHip}, {Torso}},
      {2, {LShoulder, LElbow}, {LeftUpperArm}},
      {3, {RShoulder, RElbow}, {RightUpperArm}},
      {4, {LElbow, LWrist}, {LeftLowerArm}},
      {5, {RElbow, RWrist}, {RightLowerArm}},
  };
  return spec;
}

RegionSpec make_lower(RegionCategory category) {
  RegionSpec spec;
  spec.category = category;
  // The hip keypoints are nearly collinear; the knees give the region a
  // vertical extent and the parsing label keeps only hip pixels.
  spec.regions = {
      {6, {MidHip, RHip, LHip, RKnee, LKnee}, {Hip}},
      {7, {LHip, LKnee}, {LeftUpperLeg}},
      {8, {RHip, RKnee}, {RightUpperLeg}},
      {9, {LKnee, LAnkle}, {LeftLowerLeg}},
      {10, {RKnee, RAnkle}, {RightLowerLeg}},
  };
  return spec;
}

}  // namespace

// -----------------------------------------------------------------------------
// Skeleton
// -----------------------------------------------------------------------------

Skeleton::Skeleton(std::array<Keypoint, kNumKeypoints> keypoints, ImageSize image_size)
    : keypoints_(keypoints), image_size_(image_size) {
  if (image_size.height <= 0 || image_size.width <= 0) {
    fail(ErrorCode::InvalidArgument, "skeleton image size must be positive");
  }
  for (auto& kp : keypoints_) {
    if (!std::isfinite(kp.x) || !std::isfinite(kp.y) || !std::isfinite(kp.confidence)) {
      fail(ErrorCode::InvalidArgument, "keypoint coordinates must be finite");
    }
    if (kp.confidence < 0.0 || kp.confidence > 1.0) {
      fail(ErrorCode::InvalidArgument, "keypoint confidence must lie in [0, 1]");
    }
    if (!inside_image(kp.x, kp.y, image_size)) kp.confidence = 0.0;
  }
}

Skeleton Skeleton::translated(double dx, double dy) const {
  auto moved = keypoints_;
  for (auto& kp : moved) {
    kp.x += dx;
    kp.y += dy;
  }
  return Skeleton(moved, image_size_);
}

// -----------------------------------------------------------------------------
// Legend and region specs
// -----------------------------------------------------------------------------

std::map<int, std::string> default_part_legend() {
  return {
      {Background, "background"},       {Torso, "torso"},
      {LeftUpperArm, "left_upper_arm"}, {RightUpperArm, "right_upper_arm"},
      {LeftLowerArm, "left_lower_arm"}, {RightLowerArm, "right_lower_arm"},
      {Hip, "hip"},                     {LeftUpperLeg, "left_upper_leg"},
      {RightUpperLeg, "right_upper_leg"}, {LeftLowerLeg, "left_lower_leg"},
      {RightLowerLeg, "right_lower_leg"}, {Head, "head"},
      {Hands, "hands"},                 {Feet, "feet"},
  };
}

std::optional<GarmentCategory> parse_garment_category(std::string_view name) {
  if (name == "upper") return GarmentCategory::Upper;
  if (name == "lower") return GarmentCategory::Lower;
  if (name == "dress" || name == "dresses") return GarmentCategory::Dress;
  return std::nullopt;
}

std::string_view to_string(GarmentCategory category) {
  switch (category) {
    case GarmentCategory::Upper: return "upper";
    case GarmentCategory::Lower: return "lower";
    case GarmentCategory::Dress: return "dress";
  }
  return "upper";
}

const RegionDef* RegionSpec::find(int region_id) const {
  for (const auto& r : regions) {
    if (r.region_id == region_id) return &r;
  }
  return nullptr;
}

void validate(const RegionSpec& spec) {
  const bool five_region =
      spec.category == RegionCategory::Upper || spec.category == RegionCategory::Lower;
  if (five_region && spec.regions.size() != 5) {
    fail(ErrorCode::InvalidArgument, "upper and lower region specs must define exactly 5 regions");
  }
  if (spec.regions.empty()) fail(ErrorCode::InvalidArgument, "region spec has no regions");
  std::set<int> ids;
  for (const auto& r : spec.regions) {
    if (!ids.insert(r.region_id).second) {
      fail(ErrorCode::InvalidArgument, "duplicate region id " + std::to_string(r.region_id));
    }
    for (int k : r.keypoints) {
      if (k < 0 || k >= kNumKeypoints) {
        fail(ErrorCode::InvalidArgument, "keypoint index out of range in region " + std::to_string(r.region_id));
      }
    }
  }
}

RegionSpec region_spec(RegionCategory category) {
  switch (category) {
    case RegionCategory::Upper:
    case RegionCategory::DressUpperSection:
      return make_upper(category);
    case RegionCategory::Lower:
    case RegionCategory::DressLowerSection:
      return make_lower(category);
  }
  return make_upper(RegionCategory::Upper);
}

std::vector<RegionSpec> region_specs_for(GarmentCategory category) {
  switch (category) {
    case GarmentCategory::Upper: return {region_spec(RegionCategory::Upper)};
    case GarmentCategory::Lower: return {region_spec(RegionCategory::Lower)};
    case GarmentCategory::Dress:
      return {region_spec(RegionCategory::DressUpperSection), region_spec(RegionCategory::DressLowerSection)};
  }
  return {};
}

// -----------------------------------------------------------------------------
// Boxes
// -----------------------------------------------------------------------------

const RegionBox* RegionBoxes::find(int region_id) const {
  for (const auto& b : boxes) {
    if (b.region_id == region_id) return &b;
  }
  return nullptr;
}

RegionBoxes build_region_boxes(const Skeleton& skeleton, const RegionSpec& spec, double confidence_threshold,
                               double padding) {
  if (!(confidence_threshold >= 0.0 && confidence_threshold < 1.0)) {
    fail(ErrorCode::InvalidArgument, "confidence threshold must lie in [0, 1)");
  }
  if (!(padding >= 0.0)) fail(ErrorCode::InvalidArgument, "box padding must be non-negative");
  validate(spec);

  const ImageSize size = skeleton.image_size();
  RegionBoxes out;
  out.image_size = size;
  for (const auto& region : spec.regions) {
    BoundingBox box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    int valid = 0;
    for (int k : region.keypoints) {
      const Keypoint& kp = skeleton[k];
      if (!(kp.confidence > confidence_threshold)) continue;
      ++valid;
      box.x_min = std::min(box.x_min, kp.x);
      box.y_min = std::min(box.y_min, kp.y);
      box.x_max = std::max(box.x_max, kp.x);
      box.y_max = std::max(box.y_max, kp.y);
    }
    if (valid < 2) {
      out.absent.push_back(region.region_id);
      continue;
    }
    box.x_min = std::max(0.0, box.x_min - padding);
    box.y_min = std::max(0.0, box.y_min - padding);
    box.x_max = std::min(static_cast<double>(size.width - 1), box.x_max + padding);
    box.y_max = std::min(static_cast<double>(size.height - 1), box.y_max + padding);
    out.boxes.push_back({region.region_id, box});
  }
  if (out.boxes.empty()) {
    fail(ErrorCode::AllRegionsAbsent, "no region has at least two keypoints above confidence " +
                                          std::to_string(confidence_threshold));
  }
  return out;
}

// -----------------------------------------------------------------------------
// Segmentation and region masks
// -----------------------------------------------------------------------------

SegmentationMap::SegmentationMap(int height, int width, std::vector<int> labels, std::map<int, std::string> legend)
    : height_(height), width_(width), labels_(std::move(labels)), legend_(std::move(legend)) {
  if (height <= 0 || width <= 0) fail(ErrorCode::InvalidArgument, "segmentation map dims must be positive");
  if (labels_.size() != static_cast<std::size_t>(height) * width) {
    fail(ErrorCode::DimensionMismatch, "segmentation label count does not match its dims");
  }
  for (int label : labels_) {
    if (label != Background && !legend_.contains(label)) {
      fail(ErrorCode::InvalidArgument, "segmentation label " + std::to_string(label) + " is not in the legend");
    }
  }
}

std::vector<RegionMask> region_masks(const SegmentationMap& parsing, const RegionBoxes& boxes,
                                     const RegionSpec& spec) {
  if (parsing.size() != boxes.image_size) {
    fail(ErrorCode::DimensionMismatch, "parsing map is " + std::to_string(parsing.height()) + "x" +
                                           std::to_string(parsing.width()) + " but boxes were built on " +
                                           std::to_string(boxes.image_size.height) + "x" +
                                           std::to_string(boxes.image_size.width));
  }
  std::vector<RegionMask> out;
  out.reserve(boxes.boxes.size());
  for (const auto& rb : boxes.boxes) {
    const RegionDef* def = spec.find(rb.region_id);
    if (def == nullptr) fail(ErrorCode::InvalidArgument, "box for unknown region " + std::to_string(rb.region_id));

    RegionMask rm{rb.region_id, Mask(parsing.height(), parsing.width())};
    const int x0 = std::max(0, static_cast<int>(std::ceil(rb.box.x_min)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(rb.box.y_min)));
    const int x1 = std::min(parsing.width() - 1, static_cast<int>(std::floor(rb.box.x_max)));
    const int y1 = std::min(parsing.height() - 1, static_cast<int>(std::floor(rb.box.y_max)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const int label = parsing.label(y, x);
        if (std::find(def->part_labels.begin(), def->part_labels.end(), label) != def->part_labels.end()) {
          rm.mask.at(y, x) = 1;
        }
      }
    }
    out.push_back(std::move(rm));
  }
  return out;
}

// -----------------------------------------------------------------------------
// Relocation
// -----------------------------------------------------------------------------

BoundingBox mask_bounds(const Mask& mask) {
  int x0 = mask.width(), y0 = mask.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.test(y, x)) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) fail(ErrorCode::EmptyMask, "mask has no set pixels");
  return {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x1), static_cast<double>(y1)};
}

Relocation relocate_garment(const Image& garment_image, const Mask& garment_mask, const Mask& agnostic_mask) {
  if (garment_image.size() != garment_mask.size()) {
    fail(ErrorCode::DimensionMismatch, "garment image and garment mask dims differ");
  }
  const BoundingBox g = mask_bounds(garment_mask);
  const BoundingBox a = mask_bounds(agnostic_mask);

  // Pixel extents: pixel i covers [i - 0.5, i + 0.5].
  const double gw = g.width() + 1.0, gh = g.height() + 1.0;
  const double aw = a.width() + 1.0, ah = a.height() + 1.0;
  Relocation out;
  out.scale = std::min(aw / gw, ah / gh);
  const double gcx = 0.5 * (g.x_min + g.x_max), gcy = 0.5 * (g.y_min + g.y_max);
  const double acx = 0.5 * (a.x_min + a.x_max), acy = 0.5 * (a.y_min + a.y_max);
  out.tx = acx - out.scale * gcx;
  out.ty = acy - out.scale * gcy;

  const int H = agnostic_mask.height(), W = agnostic_mask.width();
  const int sh = garment_image.height(), sw = garment_image.width();
  out.image = Image(H, W, 0.0);
  out.mask = Mask(H, W);
  for (int y = 0; y < H; ++y) {
    const double sy = (y - out.ty) / out.scale;
    for (int x = 0; x < W; ++x) {
      const double sx = (x - out.tx) / out.scale;
      const int nx = static_cast<int>(std::floor(sx + 0.5));
      const int ny = static_cast<int>(std::floor(sy + 0.5));
      if (nx >= 0 && ny >= 0 && nx < sw && ny < sh && garment_mask.test(ny, nx)) out.mask.at(y, x) = 1;

      const double cx = std::clamp(sx, 0.0, static_cast<double>(sw - 1));
      const double cy = std::clamp(sy, 0.0, static_cast<double>(sh - 1));
      if (sx < -0.5 || sy < -0.5 || sx > sw - 0.5 || sy > sh - 0.5) continue;
      const int x0 = std::min(static_cast<int>(cx), sw - 1), y0 = std::min(static_cast<int>(cy), sh - 1);
      const int x1 = std::min(x0 + 1, sw - 1), y1 = std::min(y0 + 1, sh - 1);
      const double fx = cx - x0, fy = cy - y0;
      for (int c = 0; c < Image::kChannels; ++c) {
        out.image.at(y, x, c) = garment_image.at(y0, x0, c) * (1 - fx) * (1 - fy) +
                                garment_image.at(y0, x1, c) * fx * (1 - fy) +
                                garment_image.at(y1, x0, c) * (1 - fx) * fy + garment_image.at(y1, x1, c) * fx * fy;
      }
    }
  }
  return out;
}

}  // namespace vtnk::geometry
