// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "core/denoiser.hpp"

namespace vtnk::pipeline {

inline constexpr int kTrainTimesteps = 1000;
inline constexpr int kDefaultSteps = 50;

/// Deterministic (eta = 0) DDIM schedule.
struct DdimSchedule {
  /// Sampling order, descending.
  std::vector<int> timesteps;
  /// alpha-bar at the scheduled timesteps in ascending timestep order, so the
  /// sequence is strictly decreasing.
  std::vector<double> alphas_cumprod;
  /// alpha-bar after the last sampling step (the clean sample).
  double final_alpha_cumprod = 1.0;

  int num_steps() const { return static_cast<int>(timesteps.size()); }
  /// alpha-bar at timesteps[k].
  double alpha_at(int k) const { return alphas_cumprod[alphas_cumprod.size() - 1 - static_cast<std::size_t>(k)]; }
  /// alpha-bar the k-th sampling step moves to.
  double alpha_after(int k) const { return k + 1 < num_steps() ? alpha_at(k + 1) : final_alpha_cumprod; }
};

/// Cumulative alpha products of a linear beta schedule.
std::vector<double> linear_alphas_cumprod(int train_steps = kTrainTimesteps, double beta_start = 1e-4,
                                          double beta_end = 2e-2);

/// Evenly spaced ("trailing") subsampling of a training profile; the first
/// sampling step is always the last training timestep. An empty profile means
/// the 1000-step linear beta profile. Throws InvalidSteps for num_steps < 1 or
/// more steps than the profile has.
DdimSchedule make_ddim_schedule(int num_steps, std::span<const double> alpha_profile = {});

/// Lockstep DDIM sampling of several branches sharing one denoiser call per
/// step, so hooks can exchange attention tensors between branches.
std::vector<LatentTensor> ddim_sample_branches(std::span<const LatentTensor> initial_noise, const Denoiser& denoiser,
                                               const DdimSchedule& schedule,
                                               std::span<const ConditioningBundle> conditioning,
                                               const AttentionHook* hook = nullptr);

LatentTensor ddim_sample(const LatentTensor& initial_noise, const Denoiser& denoiser, const DdimSchedule& schedule,
                         const ConditioningBundle& conditioning);

struct InversionOptions {
  /// Fixed-point refinements per step; 0 gives the plain recursion.
  int max_iterations = 50;
  /// Stop refining once the largest update falls below this (relative to
  /// max(1, |x|)).
  double tolerance = 1e-9;
};

/// Reverse DDIM recursion from a clean latent to its noise latent. Each step
/// starts from the prediction at the current (less noisy) latent, then
/// solves x_t = step(x_prev, eps(x_t)) by fixed-point iteration, which makes
/// the sampler an exact inverse whenever the denoiser is a contraction.
LatentTensor ddim_invert(const LatentTensor& latent0, const Denoiser& denoiser, const DdimSchedule& schedule,
                         const ConditioningBundle& conditioning, const InversionOptions& options = {});

}  // namespace vtnk::pipeline
