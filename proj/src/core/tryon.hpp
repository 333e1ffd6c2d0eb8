// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "core/codec.hpp"
#include "core/ddim.hpp"
#include "core/denoiser.hpp"
#include "core/geometry.hpp"
#include "core/warp.hpp"

namespace vtnk::pipeline {

enum class NoiseInit {
  Spectral,   // low band from the inverted person, high band from fresh noise
  Inversion,  // inverted person latent only
  Random,     // fresh noise only
};

struct TryOnConfig {
  double tau = 0.1;
  int num_steps = kDefaultSteps;
  geometry::GarmentCategory category = geometry::GarmentCategory::Upper;
  double confidence_threshold = geometry::kDefaultConfidenceThreshold;
  double box_padding = 0.0;
  std::vector<int> hook_layers;  // empty: every self-attention layer
  std::uint64_t seed = 0;        // pseudo-person noise
  std::uint64_t spi_seed = 1;    // fresh noise fused by SPI
  NoiseInit noise_init = NoiseInit::Spectral;
  bool person_injection = true;  // pseudo-person extended attention
  bool cbs = true;
  bool paste_back = true;  // keep pixels outside the agnostic mask

  /// Throws NonPositiveTau, InvalidSteps or InvalidArgument.
  void validate() const;
  bool hooks_layer(int layer_id) const;
};

/// Conditioning bundle (image latent, mask latent) for one branch.
ConditioningBundle make_conditioning(const Image& image, const Mask& mask, std::vector<double> prompt_embedding = {});

struct PseudoPersonResult {
  geometry::Relocation relocated;
  Image image;  // decoded garment branch (I_o)
  LatentTensor latent;
};

/// Relocates the garment into the agnostic region, then denoises the garment
/// branch (garment, inverted garment mask) and the person branch (agnostic
/// image, agnostic mask) in lockstep from shared noise. At hooked layers the
/// garment branch attends over the person branch's keys and values.
PseudoPersonResult generate_pseudo_person(const Image& garment_image, const Mask& garment_mask,
                                          const Image& agnostic_image, const Mask& agnostic_mask,
                                          const Denoiser& denoiser, const TryOnConfig& config,
                                          const std::vector<double>& prompt_embedding = {},
                                          const AttentionTap* tap = nullptr);

/// Region-wise homographies from pseudo-person boxes to target boxes, applied
/// piecewise to the pseudo-person image. Dresses merge an upper and a lower
/// pass. Regions missing on either side are reported Absent.
geometry::WarpResult morph_garment(const Image& pseudo_image, const geometry::Skeleton& pseudo_skeleton,
                                   const geometry::SegmentationMap& pseudo_parsing,
                                   const geometry::Skeleton& target_skeleton,
                                   const geometry::SegmentationMap& target_parsing, const TryOnConfig& config);

/// Agnostic image where coverage is 0, warped garment where it is 1.
Image compose_garment_infused(const Image& agnostic_image, const geometry::WarpResult& warp);

struct Annotation {
  geometry::Skeleton skeleton;
  geometry::SegmentationMap parsing;
};

/// Pose and parsing extraction for a synthesized pseudo-person image.
using Annotator = std::function<Annotation(const Image&)>;

struct TryOnInputs {
  Image person;  // source person, inverted for SPI
  Image agnostic;
  Mask agnostic_mask;
  Annotation person_annotation;
  Image garment;
  Mask garment_mask;
  /// Set when the garment is worn by a model (Non-Shop-to-X); the pseudo-person
  /// stage is then skipped and `garment` is morphed directly.
  std::optional<Annotation> garment_annotation;
  std::vector<double> prompt_embedding;
};

struct TryOnResult {
  std::optional<Image> pseudo_person;
  geometry::WarpResult warp;
  Image garment_infused;
  LatentTensor initial_noise;
  LatentTensor latent;
  Image image;
};

/// Full chain. Errors are rethrown with the failing stage attached.
TryOnResult run_tryon(const TryOnInputs& inputs, const Denoiser& denoiser, const TryOnConfig& config,
                      const Annotator& annotator = {}, const AttentionTap* tap = nullptr);

/// Population variance of per-pixel luminance over a band.
double seam_variance(const Image& image, const Mask& band);

}  // namespace vtnk::pipeline
