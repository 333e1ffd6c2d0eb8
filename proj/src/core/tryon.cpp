// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/tryon.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "core/attention.hpp"
#include "core/error.hpp"
#include "core/homography.hpp"
#include "core/spectral.hpp"

namespace vtnk::pipeline {

namespace {

using attention::AttentionTensors;
using attention::Matrix;

template <typename F>
auto staged(const char* stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Internal, e.what()).with_stage(stage);
  }
}

void require_same_size(ImageSize a, ImageSize b, const char* what) {
  if (!(a == b)) {
    fail(ErrorCode::DimensionMismatch, std::string(what) + ": " + std::to_string(a.height) + "x" +
                                           std::to_string(a.width) + " vs " + std::to_string(b.height) + "x" +
                                           std::to_string(b.width));
  }
}

std::vector<Matrix> plain_attention(std::span<const AttentionTensors> tensors) {
  std::vector<Matrix> outs;
  for (const auto& t : tensors) outs.push_back(attention::self_attention(t));
  return outs;
}

AttentionHook with_tap(AttentionHook hook, const AttentionTap* tap) {
  if (tap == nullptr || !*tap) return hook;
  return [hook = std::move(hook), tap](const HookContext& ctx, std::span<const AttentionTensors> tensors) {
    auto outs = hook ? hook(ctx, tensors) : plain_attention(tensors);
    (*tap)(ctx, tensors, outs);
    return outs;
  };
}

}  // namespace

void TryOnConfig::validate() const {
  if (!(tau > 0.0) || std::isnan(tau)) fail(ErrorCode::NonPositiveTau, "tau must be positive");
  if (num_steps < 1 || num_steps > kTrainTimesteps) {
    fail(ErrorCode::InvalidSteps, "steps must lie in [1, " + std::to_string(kTrainTimesteps) + "]");
  }
  if (!(confidence_threshold >= 0.0 && confidence_threshold < 1.0)) {
    fail(ErrorCode::InvalidArgument, "confidence threshold must lie in [0, 1)");
  }
  if (!(box_padding >= 0.0) || !std::isfinite(box_padding)) fail(ErrorCode::InvalidArgument, "box padding must be >= 0");
}

bool TryOnConfig::hooks_layer(int layer_id) const {
  return hook_layers.empty() || std::find(hook_layers.begin(), hook_layers.end(), layer_id) != hook_layers.end();
}

ConditioningBundle make_conditioning(const Image& image, const Mask& mask, std::vector<double> prompt_embedding) {
  require_same_size(image.size(), mask.size(), "conditioning image and mask");
  const LatentCodec codec;
  return {concat_channels(codec.encode(image), codec.encode_mask(mask)), std::move(prompt_embedding)};
}

PseudoPersonResult generate_pseudo_person(const Image& garment_image, const Mask& garment_mask,
                                          const Image& agnostic_image, const Mask& agnostic_mask,
                                          const Denoiser& denoiser, const TryOnConfig& config,
                                          const std::vector<double>& prompt_embedding, const AttentionTap* tap) {
  config.validate();
  require_same_size(garment_image.size(), garment_mask.size(), "garment image and mask");
  require_same_size(agnostic_image.size(), agnostic_mask.size(), "agnostic image and mask");

  PseudoPersonResult result;
  result.relocated = geometry::relocate_garment(garment_image, garment_mask, agnostic_mask);
  const std::vector<ConditioningBundle> cond = {
      make_conditioning(result.relocated.image, result.relocated.mask.inverted(), prompt_embedding),
      make_conditioning(agnostic_image, agnostic_mask, prompt_embedding)};

  const LatentCodec codec;
  const ImageSize ls = codec.latent_size(agnostic_image.size());
  const LatentTensor noise = gaussian_noise(LatentCodec::kLatentChannels, ls.height, ls.width, config.seed);
  const std::vector<LatentTensor> init = {noise, noise};

  AttentionHook inject;
  if (config.person_injection) {
    inject = [&config](const HookContext& ctx, std::span<const AttentionTensors> t) {
      if (t.size() != 2) fail(ErrorCode::HookMismatch, "pseudo-person hook expects two branches");
      if (!config.hooks_layer(ctx.layer.layer_id)) return plain_attention(t);
      return std::vector<Matrix>{attention::extended_attention(t[0], t[1].k, t[1].v), attention::self_attention(t[1])};
    };
  }
  const AttentionHook hook = with_tap(inject, tap);
  const DdimSchedule schedule = make_ddim_schedule(config.num_steps);
  auto out = ddim_sample_branches(init, denoiser, schedule, cond, hook ? &hook : nullptr);
  result.latent = std::move(out[0]);
  result.image = codec.decode(result.latent);
  return result;
}

geometry::WarpResult morph_garment(const Image& pseudo_image, const geometry::Skeleton& pseudo_skeleton,
                                   const geometry::SegmentationMap& pseudo_parsing,
                                   const geometry::Skeleton& target_skeleton,
                                   const geometry::SegmentationMap& target_parsing, const TryOnConfig& config) {
  config.validate();
  require_same_size(pseudo_image.size(), pseudo_parsing.size(), "pseudo-person image and parsing");
  require_same_size(pseudo_skeleton.image_size(), pseudo_parsing.size(), "pseudo-person pose and parsing");
  require_same_size(target_skeleton.image_size(), target_parsing.size(), "target pose and parsing");

  std::optional<geometry::WarpResult> merged;
  for (const auto& spec : geometry::region_specs_for(config.category)) {
    const auto src_boxes =
        geometry::build_region_boxes(pseudo_skeleton, spec, config.confidence_threshold, config.box_padding);
    const auto dst_boxes =
        geometry::build_region_boxes(target_skeleton, spec, config.confidence_threshold, config.box_padding);
    const auto masks = geometry::region_masks(pseudo_parsing, src_boxes, spec);

    std::vector<geometry::RegionMask> used;
    std::vector<geometry::RegionTransform> transforms;
    std::vector<geometry::RegionOutcome> skipped;
    for (const auto& rm : masks) {
      const auto* src = src_boxes.find(rm.region_id);
      const auto* dst = dst_boxes.find(rm.region_id);
      if (src == nullptr || dst == nullptr) {
        skipped.push_back({rm.region_id, geometry::RegionStatus::Absent});
        continue;
      }
      const auto s = geometry::corners(src->box);
      const auto d = geometry::corners(dst->box);
      try {
        const auto fit = geometry::estimate_homography(s, d);
        transforms.push_back({rm.region_id, fit.homography.matrix()});
        used.push_back(rm);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateCorners) throw;
        skipped.push_back({rm.region_id, geometry::RegionStatus::Degenerate});
      }
    }
    auto warp = geometry::piecewise_warp(pseudo_image, used, transforms, target_parsing.size());
    warp.per_region_status.insert(warp.per_region_status.end(), skipped.begin(), skipped.end());
    merged = merged ? geometry::merge_warps(*merged, warp) : std::move(warp);
  }
  return std::move(*merged);
}

Image compose_garment_infused(const Image& agnostic_image, const geometry::WarpResult& warp) {
  if (!(agnostic_image.size() == warp.image.size()) || !(agnostic_image.size() == warp.coverage.size())) {
    fail(ErrorCode::DimMismatch, "agnostic image and warp result differ in size");
  }
  Image out = agnostic_image;
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      if (!warp.coverage.test(y, x)) continue;
      for (int c = 0; c < Image::kChannels; ++c) out.at(y, x, c) = warp.image.at(y, x, c);
    }
  }
  return out;
}

TryOnResult run_tryon(const TryOnInputs& in, const Denoiser& denoiser, const TryOnConfig& config,
                      const Annotator& annotator, const AttentionTap* tap) {
  staged("config", [&] {
    config.validate();
    require_same_size(in.person.size(), in.agnostic.size(), "person and agnostic image");
    require_same_size(in.agnostic.size(), in.agnostic_mask.size(), "agnostic image and mask");
    require_same_size(in.person_annotation.parsing.size(), in.agnostic.size(), "person parsing and image");
    require_same_size(in.garment.size(), in.garment_mask.size(), "garment image and mask");
    if (!in.garment_annotation && !annotator) {
      fail(ErrorCode::InvalidArgument, "a shop garment needs an annotator for the pseudo-person image");
    }
  });

  TryOnResult result;
  const LatentCodec codec;
  Image source = in.garment;
  Annotation source_annotation;
  if (in.garment_annotation) {
    source_annotation = *in.garment_annotation;
  } else {
    auto pseudo = staged("pseudo", [&] {
      return generate_pseudo_person(in.garment, in.garment_mask, in.agnostic, in.agnostic_mask, denoiser, config,
                                    in.prompt_embedding);
    });
    source = pseudo.image;
    result.pseudo_person = pseudo.image;
    source_annotation = staged("annotate", [&] { return annotator(source); });
  }

  result.warp = staged("morph", [&] {
    return morph_garment(source, source_annotation.skeleton, source_annotation.parsing, in.person_annotation.skeleton,
                         in.person_annotation.parsing, config);
  });
  result.garment_infused = staged("compose", [&] { return compose_garment_infused(in.agnostic, result.warp); });

  const auto relocated =
      staged("relocate", [&] { return geometry::relocate_garment(in.garment, in.garment_mask, in.agnostic_mask); });
  const std::vector<ConditioningBundle> cond = staged("conditioning", [&] {
    return std::vector<ConditioningBundle>{
        make_conditioning(result.garment_infused, in.agnostic_mask, in.prompt_embedding),
        make_conditioning(relocated.image, relocated.mask.inverted(), in.prompt_embedding)};
  });
  const DdimSchedule schedule = make_ddim_schedule(config.num_steps);

  result.initial_noise = staged("noise", [&] {
    const ImageSize ls = codec.latent_size(in.person.size());
    LatentTensor fresh = gaussian_noise(LatentCodec::kLatentChannels, ls.height, ls.width, config.spi_seed);
    if (config.noise_init == NoiseInit::Random) return fresh;
    LatentTensor inverted = ddim_invert(codec.encode(in.person), denoiser, schedule, cond[0]);
    if (config.noise_init == NoiseInit::Inversion) return inverted;
    return spectral::spectral_pose_inject(inverted, fresh, config.tau);
  });

  result.latent = staged("sample", [&] {
    if (!config.cbs) {
      AttentionHook plain = with_tap({}, tap);
      auto out = ddim_sample_branches(std::span(&result.initial_noise, 1), denoiser, schedule,
                                      std::span(&cond[0], 1), plain ? &plain : nullptr);
      return std::move(out[0]);
    }
    std::map<int, attention::TokenMask> token_masks;
    AttentionHook stitch = [&](const HookContext& ctx, std::span<const AttentionTensors> t) {
      if (t.size() != 2) fail(ErrorCode::HookMismatch, "stitching hook expects two branches");
      if (!config.hooks_layer(ctx.layer.layer_id)) return plain_attention(t);
      auto it = token_masks.find(ctx.layer.layer_id);
      if (it == token_masks.end()) {
        it = token_masks
                 .emplace(ctx.layer.layer_id, attention::downsample_token_mask(relocated.mask, ctx.layer.grid_height,
                                                                               ctx.layer.grid_width))
                 .first;
      }
      return std::vector<Matrix>{attention::cbs_person_path(t[0], t[1], it->second),
                                 attention::cbs_garment_path(t[1], t[0].k)};
    };
    const AttentionHook hook = with_tap(stitch, tap);
    const std::vector<LatentTensor> init = {result.initial_noise, result.initial_noise};
    auto out = ddim_sample_branches(init, denoiser, schedule, cond, &hook);
    return std::move(out[0]);
  });

  result.image = staged("decode", [&] {
    Image img = codec.decode(result.latent);
    if (config.paste_back) {
      for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
          if (in.agnostic_mask.test(y, x)) continue;
          for (int c = 0; c < Image::kChannels; ++c) img.at(y, x, c) = in.agnostic.at(y, x, c);
        }
      }
    }
    return img;
  });
  return result;
}

double seam_variance(const Image& image, const Mask& band) {
  require_same_size(image.size(), band.size(), "image and seam band");
  double sum = 0.0, sum_sq = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (!band.test(y, x)) continue;
      const double l = 0.299 * image.at(y, x, 0) + 0.587 * image.at(y, x, 1) + 0.114 * image.at(y, x, 2);
      sum += l;
      sum_sq += l * l;
      ++n;
    }
  }
  if (n == 0) fail(ErrorCode::EmptyMask, "seam band is empty");
  const double mean = sum / static_cast<double>(n);
  return std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);
}

}  // namespace vtnk::pipeline
