// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/ddim.hpp"

#include <cmath>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "core/error.hpp"

namespace vtnk::pipeline {

namespace {

// x_next = sqrt(a_next) * x0 + sqrt(1 - a_next) * eps,
// x0     = (x - sqrt(1 - a_cur) * eps) / sqrt(a_cur).
void ddim_update(LatentTensor& x, const LatentTensor& eps, double a_cur, double a_next) {
  const double s_cur = std::sqrt(a_cur), n_cur = std::sqrt(1.0 - a_cur);
  const double s_next = std::sqrt(a_next), n_next = std::sqrt(1.0 - a_next);
  auto& xd = x.data();
  const auto& ed = eps.data();
  for (std::size_t i = 0; i < xd.size(); ++i) {
    const double x0 = (xd[i] - n_cur * ed[i]) / s_cur;
    xd[i] = s_next * x0 + n_next * ed[i];
  }
}

void check_prediction(const LatentTensor& pred, const LatentTensor& x) {
  if (!pred.same_shape(x)) fail(ErrorCode::ShapeMismatch, "denoiser output shape differs from its input");
  if (!pred.all_finite()) fail(ErrorCode::Internal, "denoiser produced non-finite values");
}

}  // namespace

// -----------------------------------------------------------------------------
// Denoiser helpers
// -----------------------------------------------------------------------------

LatentTensor Denoiser::predict_one(const LatentTensor& latent, StepInfo step,
                                   const ConditioningBundle& conditioning) const {
  auto out = predict(std::span(&latent, 1), step, std::span(&conditioning, 1), nullptr);
  return std::move(out.at(0));
}

std::vector<LatentTensor> ZeroDenoiser::predict(std::span<const LatentTensor> latents, StepInfo,
                                                std::span<const ConditioningBundle>, const AttentionHook*) const {
  std::vector<LatentTensor> out;
  out.reserve(latents.size());
  for (const auto& x : latents) out.emplace_back(x.channels(), x.height(), x.width(), 0.0);
  return out;
}

LinearDenoiser LinearDenoiser::random_contraction(int size, double contraction, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  attention::Matrix a(size, size);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  const Eigen::JacobiSVD<attention::Matrix> svd(a);
  a *= contraction / svd.singularValues()(0);
  return LinearDenoiser(std::move(a));
}

std::vector<LatentTensor> LinearDenoiser::predict(std::span<const LatentTensor> latents, StepInfo,
                                                  std::span<const ConditioningBundle>, const AttentionHook*) const {
  std::vector<LatentTensor> out;
  for (const auto& x : latents) {
    if (static_cast<Eigen::Index>(x.size()) != a_.cols()) fail(ErrorCode::ShapeMismatch, "latent size does not match matrix");
    LatentTensor y(x.channels(), x.height(), x.width());
    Eigen::Map<Eigen::VectorXd>(y.data().data(), a_.rows()) =
        a_ * Eigen::Map<const Eigen::VectorXd>(x.data().data(), a_.cols());
    out.push_back(std::move(y));
  }
  return out;
}

// -----------------------------------------------------------------------------
// Schedule
// -----------------------------------------------------------------------------

std::vector<double> linear_alphas_cumprod(int train_steps, double beta_start, double beta_end) {
  if (train_steps < 1) fail(ErrorCode::InvalidSteps, "training profile needs at least one step");
  std::vector<double> out(static_cast<std::size_t>(train_steps));
  double prod = 1.0;
  for (int t = 0; t < train_steps; ++t) {
    const double beta =
        train_steps == 1 ? beta_start : beta_start + (beta_end - beta_start) * t / (train_steps - 1.0);
    prod *= 1.0 - beta;
    out[static_cast<std::size_t>(t)] = prod;
  }
  return out;
}

DdimSchedule make_ddim_schedule(int num_steps, std::span<const double> alpha_profile) {
  std::vector<double> profile(alpha_profile.begin(), alpha_profile.end());
  if (profile.empty()) profile = linear_alphas_cumprod();
  const int train = static_cast<int>(profile.size());
  if (num_steps < 1 || num_steps > train) {
    fail(ErrorCode::InvalidSteps, "number of steps must lie in [1, " + std::to_string(train) + "], got " +
                                      std::to_string(num_steps));
  }
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (!(profile[i] > 0.0 && profile[i] <= 1.0) || (i > 0 && !(profile[i] < profile[i - 1]))) {
      fail(ErrorCode::InvalidArgument, "alpha profile must be strictly decreasing in (0, 1]");
    }
  }

  DdimSchedule s;
  const double ratio = static_cast<double>(train) / num_steps;
  for (int k = 0; k < num_steps; ++k) {
    s.timesteps.push_back(static_cast<int>(std::lround(train - k * ratio)) - 1);
  }
  for (int k = num_steps - 1; k >= 0; --k) {
    s.alphas_cumprod.push_back(profile[static_cast<std::size_t>(s.timesteps[static_cast<std::size_t>(k)])]);
  }
  s.final_alpha_cumprod = 1.0;
  return s;
}

// -----------------------------------------------------------------------------
// Sampling and inversion
// -----------------------------------------------------------------------------

std::vector<LatentTensor> ddim_sample_branches(std::span<const LatentTensor> initial_noise, const Denoiser& denoiser,
                                               const DdimSchedule& schedule,
                                               std::span<const ConditioningBundle> conditioning,
                                               const AttentionHook* hook) {
  if (initial_noise.size() != conditioning.size()) {
    fail(ErrorCode::ShapeMismatch, "one conditioning bundle per branch is required");
  }
  if (schedule.num_steps() < 1) fail(ErrorCode::InvalidSteps, "empty schedule");
  std::vector<LatentTensor> x(initial_noise.begin(), initial_noise.end());
  for (int k = 0; k < schedule.num_steps(); ++k) {
    const StepInfo step{k, schedule.timesteps[static_cast<std::size_t>(k)]};
    const auto eps = denoiser.predict(x, step, conditioning, hook);
    if (eps.size() != x.size()) fail(ErrorCode::Internal, "denoiser returned the wrong number of branches");
    for (std::size_t b = 0; b < x.size(); ++b) {
      check_prediction(eps[b], x[b]);
      ddim_update(x[b], eps[b], schedule.alpha_at(k), schedule.alpha_after(k));
    }
  }
  return x;
}

LatentTensor ddim_sample(const LatentTensor& initial_noise, const Denoiser& denoiser, const DdimSchedule& schedule,
                         const ConditioningBundle& conditioning) {
  auto out = ddim_sample_branches(std::span(&initial_noise, 1), denoiser, schedule, std::span(&conditioning, 1));
  return std::move(out.front());
}

LatentTensor ddim_invert(const LatentTensor& latent0, const Denoiser& denoiser, const DdimSchedule& schedule,
                         const ConditioningBundle& conditioning, const InversionOptions& options) {
  if (schedule.num_steps() < 1) fail(ErrorCode::InvalidSteps, "empty schedule");
  if (options.max_iterations < 0 || !(options.tolerance >= 0.0)) {
    fail(ErrorCode::InvalidArgument, "bad inversion options");
  }
  LatentTensor x = latent0;
  for (int k = schedule.num_steps() - 1; k >= 0; --k) {
    const StepInfo step{k, schedule.timesteps[static_cast<std::size_t>(k)]};
    const double a_from = schedule.alpha_after(k), a_to = schedule.alpha_at(k);
    LatentTensor eps = denoiser.predict_one(x, step, conditioning);
    check_prediction(eps, x);
    LatentTensor next = x;
    ddim_update(next, eps, a_from, a_to);
    for (int it = 0; it < options.max_iterations; ++it) {
      eps = denoiser.predict_one(next, step, conditioning);
      check_prediction(eps, next);
      LatentTensor refined = x;
      ddim_update(refined, eps, a_from, a_to);
      double change = 0.0, scale = 1.0;
      for (std::size_t i = 0; i < refined.size(); ++i) {
        change = std::max(change, std::abs(refined.data()[i] - next.data()[i]));
        scale = std::max(scale, std::abs(refined.data()[i]));
      }
      next = std::move(refined);
      if (change <= options.tolerance * scale) break;
    }
    x = std::move(next);
  }
  return x;
}

}  // namespace vtnk::pipeline
