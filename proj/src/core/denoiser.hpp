// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "core/attention.hpp"
#include "core/tensor.hpp"

namespace vtnk::pipeline {

/// Conditioning of one denoising branch: image channels concatenated to the
/// noisy latent, plus an opaque prompt embedding.
struct ConditioningBundle {
  LatentTensor concat;
  std::vector<double> prompt_embedding;
};

/// A self-attention layer of the denoiser as seen by hooks.
struct LayerInfo {
  int layer_id = 0;
  int grid_height = 0;  // tokens are laid out row-major on this grid
  int grid_width = 0;
  int heads = 1;
  int head_dim = 0;

  int tokens() const { return grid_height * grid_width; }
};

struct StepInfo {
  int step_index = 0;  // position in the schedule, 0 = first sampling step
  int timestep = 0;    // training timestep
};

struct HookContext {
  LayerInfo layer;
  int head = 0;
  StepInfo step;
};

/// Replaces per-head self-attention at a layer. Receives one tensor set per
/// branch (branches in lockstep) and returns one n x d output per branch.
using AttentionHook = std::function<std::vector<attention::Matrix>(
    const HookContext&, std::span<const attention::AttentionTensors>)>;

/// Observes hook inputs and outputs at every layer/head/step.
using AttentionTap = std::function<void(const HookContext&, std::span<const attention::AttentionTensors>,
                                        std::span<const attention::Matrix>)>;

/// Per-step noise predictor. Branches are evaluated together so that hooks
/// see same-step, same-layer tensors of every branch. Implementations must be
/// deterministic and return one prediction per branch shaped like its input.
class Denoiser {
 public:
  virtual ~Denoiser() = default;

  virtual std::vector<LayerInfo> layer_registry() const = 0;

  /// With a null hook every branch runs plain self-attention.
  virtual std::vector<LatentTensor> predict(std::span<const LatentTensor> latents, StepInfo step,
                                            std::span<const ConditioningBundle> conditioning,
                                            const AttentionHook* hook) const = 0;

  LatentTensor predict_one(const LatentTensor& latent, StepInfo step, const ConditioningBundle& conditioning) const;
};

/// Predicts zero noise; has no attention layers.
class ZeroDenoiser final : public Denoiser {
 public:
  std::vector<LayerInfo> layer_registry() const override { return {}; }
  std::vector<LatentTensor> predict(std::span<const LatentTensor> latents, StepInfo step,
                                    std::span<const ConditioningBundle> conditioning,
                                    const AttentionHook* hook) const override;
};

/// Predicts A x for a fixed matrix A acting on the flattened latent.
class LinearDenoiser final : public Denoiser {
 public:
  explicit LinearDenoiser(attention::Matrix a) : a_(std::move(a)) {}

  /// Random matrix with spectral norm `contraction`.
  static LinearDenoiser random_contraction(int size, double contraction, std::uint64_t seed);

  const attention::Matrix& matrix() const { return a_; }

  std::vector<LayerInfo> layer_registry() const override { return {}; }
  std::vector<LatentTensor> predict(std::span<const LatentTensor> latents, StepInfo step,
                                    std::span<const ConditioningBundle> conditioning,
                                    const AttentionHook* hook) const override;

 private:
  attention::Matrix a_;
};

}  // namespace vtnk::pipeline
