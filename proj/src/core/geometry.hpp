// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/tensor.hpp"

namespace vtnk::geometry {

// =============================================================================
// Pose input
// =============================================================================

inline constexpr int kNumKeypoints = 25;

/// BODY_25 keypoint indices.
enum Body25 : int {
  Nose = 0,
  Neck = 1,
  RShoulder = 2,
  RElbow = 3,
  RWrist = 4,
  LShoulder = 5,
  LElbow = 6,
  LWrist = 7,
  MidHip = 8,
  RHip = 9,
  RKnee = 10,
  RAnkle = 11,
  LHip = 12,
  LKnee = 13,
  LAnkle = 14,
  REye = 15,
  LEye = 16,
  REar = 17,
  LEar = 18,
  LBigToe = 19,
  LSmallToe = 20,
  LHeel = 21,
  RBigToe = 22,
  RSmallToe = 23,
  RHeel = 24,
};

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;

  bool valid() const { return confidence > 0.0; }
};

/// A 25-keypoint pose. Keypoints outside the image are stored with
/// confidence 0 so every valid keypoint lies inside the image.
class Skeleton {
 public:
  Skeleton() = default;
  Skeleton(std::array<Keypoint, kNumKeypoints> keypoints, ImageSize image_size);

  const std::array<Keypoint, kNumKeypoints>& keypoints() const { return keypoints_; }
  const Keypoint& operator[](int i) const { return keypoints_[static_cast<std::size_t>(i)]; }
  ImageSize image_size() const { return image_size_; }

  /// Same pose shifted by (dx, dy); points pushed off-image become invalid.
  Skeleton translated(double dx, double dy) const;

 private:
  std::array<Keypoint, kNumKeypoints> keypoints_{};
  ImageSize image_size_{};
};

// =============================================================================
// Body part legend and region definitions
// =============================================================================

/// Part labels of a human-parsing map. Parsers with other label sets are
/// remapped to these ids before use.
enum PartLabel : int {
  Background = 0,
  Torso = 1,
  LeftUpperArm = 2,
  RightUpperArm = 3,
  LeftLowerArm = 4,
  RightLowerArm = 5,
  Hip = 6,
  LeftUpperLeg = 7,
  RightUpperLeg = 8,
  LeftLowerLeg = 9,
  RightLowerLeg = 10,
  Head = 11,
  Hands = 12,
  Feet = 13,
};

std::map<int, std::string> default_part_legend();

enum class RegionCategory { Upper, Lower, DressUpperSection, DressLowerSection };

enum class GarmentCategory { Upper, Lower, Dress };

std::optional<GarmentCategory> parse_garment_category(std::string_view name);
std::string_view to_string(GarmentCategory category);

struct RegionDef {
  int region_id = 0;
  std::vector<int> keypoints;
  std::vector<int> part_labels;
};

/// Regions in precedence order: earlier regions are overwritten by later
/// ones where warped regions overlap.
struct RegionSpec {
  RegionCategory category = RegionCategory::Upper;
  std::vector<RegionDef> regions;

  const RegionDef* find(int region_id) const;
};

/// Throws InvalidArgument if the spec violates its invariants.
void validate(const RegionSpec& spec);

RegionSpec region_spec(RegionCategory category);

/// Specs processed for a garment category; dresses are split into an upper
/// and a lower section.
std::vector<RegionSpec> region_specs_for(GarmentCategory category);

// =============================================================================
// Boxes and masks
// =============================================================================

struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  bool contains(double x, double y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct RegionBox {
  int region_id = 0;
  BoundingBox box;
};

struct RegionBoxes {
  ImageSize image_size;
  std::vector<RegionBox> boxes;  // spec order
  std::vector<int> absent;       // regions with fewer than 2 valid keypoints

  const RegionBox* find(int region_id) const;
};

inline constexpr double kDefaultConfidenceThreshold = 0.3;

/// One box per region enclosing its keypoints with confidence above the
/// threshold, grown by `padding` pixels and clipped to the image.
/// Throws AllRegionsAbsent when no region has two valid keypoints.
RegionBoxes build_region_boxes(const Skeleton& skeleton, const RegionSpec& spec,
                               double confidence_threshold = kDefaultConfidenceThreshold,
                               double padding = 0.0);

class SegmentationMap {
 public:
  SegmentationMap() = default;
  SegmentationMap(int height, int width, std::vector<int> labels,
                  std::map<int, std::string> legend = default_part_legend());

  int height() const { return height_; }
  int width() const { return width_; }
  ImageSize size() const { return {height_, width_}; }
  int label(int y, int x) const { return labels_[static_cast<std::size_t>(y) * width_ + x]; }
  const std::vector<int>& labels() const { return labels_; }
  const std::map<int, std::string>& legend() const { return legend_; }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<int> labels_;
  std::map<int, std::string> legend_;
};

struct RegionMask {
  int region_id = 0;
  Mask mask;
};

/// Per-region indicator: pixel is set iff its part label belongs to the
/// region and it lies inside the region's box.
std::vector<RegionMask> region_masks(const SegmentationMap& parsing, const RegionBoxes& boxes,
                                     const RegionSpec& spec);

// =============================================================================
// Garment relocation
// =============================================================================

struct Relocation {
  Image image;
  Mask mask;
  double scale = 1.0;
  double tx = 0.0;  // output = scale * input + t
  double ty = 0.0;
};

/// Tight pixel bounding box of the set pixels of a mask, inclusive.
/// Throws EmptyMask for an all-zero mask.
BoundingBox mask_bounds(const Mask& mask);

/// Scales the garment (aspect preserved) and centres it inside the agnostic
/// region's bounding box. Output is sized like the agnostic mask.
Relocation relocate_garment(const Image& garment_image, const Mask& garment_mask, const Mask& agnostic_mask);

}  // namespace vtnk::geometry
