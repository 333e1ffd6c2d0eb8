// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "core/denoiser.hpp"

namespace vtnk::pipeline {

struct ToyDenoiserOptions {
  int latent_channels = 4;
  int cond_channels = 5;
  int latent_height = 8;
  int latent_width = 8;
  /// Hidden width; the first latent_channels + 2 features form the
  /// similarity head, so hidden / heads must be at least that.
  int hidden = 12;
  int heads = 2;
  double gain = 0.1;
  /// Weight of the analytic pull towards the smoothed conditioning latent.
  double prior_weight = 0.95;
  /// Inverse squared kernel width of the similarity head.
  double sharpness = 30.0;
  /// Share of each token replaced by its attention average per layer.
  double mixing = 0.5;
  std::uint64_t seed = 20240611;
};

/// Noise predictor built from fixed weights:
///
///   features = [m, -|m|^2 / 2, 1, tanh(conv3x3([x; cond]) + time/prompt)]
///
/// where m is the leading latent_channels of the conditioning concat. Head 0
/// of every attention layer (full and half resolution) has query [m, 1] and
/// key [m, -|m|^2 / 2] scaled by the sharpness, so its logits are negative
/// squared distances between conditioning tokens and it behaves as non-local
/// means; its output replaces a `mixing` share of m. The other heads use
/// random projections of the remaining features. The prediction is
///
///   gain * conv3x3(features) + prior_weight * sqrt(1 - a_t) * (x - sqrt(a_t) * m')
///
/// with m' the smoothed m, so the clean-sample estimate drifts towards it.
/// m' does not depend on x; prior_weight < 1 and a small gain keep the
/// latent-to-noise map contractive.
class ToyDenoiser final : public Denoiser {
 public:
  explicit ToyDenoiser(const ToyDenoiserOptions& options);

  const ToyDenoiserOptions& options() const { return options_; }

  std::vector<LayerInfo> layer_registry() const override { return layers_; }
  std::vector<LatentTensor> predict(std::span<const LatentTensor> latents, StepInfo step,
                                    std::span<const ConditioningBundle> conditioning,
                                    const AttentionHook* hook) const override;

 private:
  struct Conv {
    int out = 0;
    int in = 0;
    std::vector<double> weights;  // out x in x 3 x 3
    std::vector<double> bias;
  };
  struct AttentionLayer {
    attention::Matrix wq, wk, wv;  // hidden x hidden, head h uses columns [h*d, (h+1)*d)
    attention::Matrix wo;          // applied to heads other than 0
  };

  LatentTensor conv3x3(const Conv& conv, const LatentTensor& input) const;
  void refresh_similarity_features(LatentTensor& features) const;
  std::vector<double> conditioning_bias(const std::vector<double>& prompt, int timestep) const;

  ToyDenoiserOptions options_;
  std::vector<LayerInfo> layers_;
  Conv conv_in_;
  Conv conv_out_;
  std::vector<AttentionLayer> attention_;
  std::vector<double> time_freq_;
  std::vector<double> time_phase_;
  std::vector<double> alphas_cumprod_;
};

}  // namespace vtnk::pipeline
