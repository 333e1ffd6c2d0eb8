// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/toy_denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "core/ddim.hpp"
#include "core/error.hpp"

namespace vtnk::pipeline {

namespace {

using attention::AttentionTensors;
using attention::Matrix;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic value in [-1, 1) keyed by (seed, a, b).
double hashed_unit(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  const std::uint64_t h = splitmix64(seed ^ splitmix64(a * 0x100000001b3ULL + b));
  return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
}

Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

// Tokens (grid row-major) x hidden.
Matrix to_tokens(const LatentTensor& t) {
  Matrix m(static_cast<Eigen::Index>(t.plane()), t.channels());
  for (int c = 0; c < t.channels(); ++c) {
    for (int y = 0; y < t.height(); ++y) {
      for (int x = 0; x < t.width(); ++x) m(y * t.width() + x, c) = t.at(c, y, x);
    }
  }
  return m;
}

Matrix pool2_tokens(const LatentTensor& t) {
  const int h = t.height() / 2, w = t.width() / 2;
  Matrix m(h * w, t.channels());
  for (int c = 0; c < t.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        m(y * w + x, c) = 0.25 * (t.at(c, 2 * y, 2 * x) + t.at(c, 2 * y + 1, 2 * x) + t.at(c, 2 * y, 2 * x + 1) +
                                  t.at(c, 2 * y + 1, 2 * x + 1));
      }
    }
  }
  return m;
}

}  // namespace

ToyDenoiser::ToyDenoiser(const ToyDenoiserOptions& options) : options_(options) {
  const auto& o = options_;
  if (o.latent_channels < 1 || o.cond_channels < o.latent_channels || o.latent_height < 1 || o.latent_width < 1 ||
      o.heads < 2 || o.hidden % o.heads != 0 || o.hidden / o.heads < o.latent_channels + 2 || !(o.sharpness > 0.0) ||
      !(o.mixing >= 0.0 && o.mixing <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "invalid toy denoiser options");
  }
  alphas_cumprod_ = linear_alphas_cumprod();
  std::mt19937_64 rng(o.seed);
  auto make_conv = [&](int out, int in) {
    Conv c;
    c.out = out;
    c.in = in;
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(9.0 * in));
    c.weights.resize(static_cast<std::size_t>(out) * in * 9);
    for (auto& w : c.weights) w = normal(rng);
    c.bias.resize(static_cast<std::size_t>(out));
    for (auto& b : c.bias) b = 0.1 * normal(rng);
    return c;
  };
  const int C = o.latent_channels;
  const int learned = o.hidden - C - 2;
  conv_in_ = make_conv(learned, o.latent_channels + o.cond_channels);
  conv_out_ = make_conv(o.latent_channels, o.hidden);

  const int head_dim = o.hidden / o.heads;
  layers_.push_back({0, o.latent_height, o.latent_width, o.heads, head_dim});
  if (o.latent_height % 2 == 0 && o.latent_width % 2 == 0) {
    layers_.push_back({1, o.latent_height / 2, o.latent_width / 2, o.heads, head_dim});
  }
  const double s = 1.0 / std::sqrt(static_cast<double>(o.hidden));
  // q.k / sqrt(d) = sharpness * (m_i.m_j - |m_j|^2 / 2)
  const double beta = std::sqrt(o.sharpness * std::sqrt(static_cast<double>(head_dim)));
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    // Sharper query/key projections so attention is not near-uniform.
    AttentionLayer w{random_matrix(rng, o.hidden, o.hidden, 3.0 * s), random_matrix(rng, o.hidden, o.hidden, 3.0 * s),
                     random_matrix(rng, o.hidden, o.hidden, s), random_matrix(rng, o.hidden, o.hidden, s)};
    w.wq.leftCols(head_dim).setZero();
    w.wk.leftCols(head_dim).setZero();
    w.wv.leftCols(head_dim).setZero();
    for (int c = 0; c < C; ++c) {
      w.wq(c, c) = beta;
      w.wk(c, c) = beta;
      w.wv(c, c) = 1.0;
    }
    w.wq(C + 1, C) = beta;  // constant feature
    w.wk(C, C) = beta;      // -|m|^2 / 2
    w.wo.topRows(head_dim).setZero();
    w.wo.leftCols(C + 2).setZero();
    attention_.push_back(std::move(w));
  }
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int f = 0; f < learned; ++f) {
    time_freq_.push_back(1e-3 * (1.0 + 9.0 * uni(rng)));
    time_phase_.push_back(6.283185307179586 * uni(rng));
  }
}

LatentTensor ToyDenoiser::conv3x3(const Conv& conv, const LatentTensor& input) const {
  const int H = input.height(), W = input.width();
  LatentTensor out(conv.out, H, W);
  for (int o = 0; o < conv.out; ++o) {
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        double acc = conv.bias[static_cast<std::size_t>(o)];
        for (int i = 0; i < conv.in; ++i) {
          const double* k = &conv.weights[(static_cast<std::size_t>(o) * conv.in + i) * 9];
          for (int dy = -1; dy <= 1; ++dy) {
            const int yy = y + dy;
            if (yy < 0 || yy >= H) continue;
            for (int dx = -1; dx <= 1; ++dx) {
              const int xx = x + dx;
              if (xx < 0 || xx >= W) continue;
              acc += k[(dy + 1) * 3 + (dx + 1)] * input.at(i, yy, xx);
            }
          }
        }
        out.at(o, y, x) = acc;
      }
    }
  }
  return out;
}

std::vector<double> ToyDenoiser::conditioning_bias(const std::vector<double>& prompt, int timestep) const {
  const std::size_t learned = time_freq_.size();
  std::vector<double> bias(learned);
  const double norm = prompt.empty() ? 0.0 : 0.1 / std::sqrt(static_cast<double>(prompt.size()));
  for (std::size_t f = 0; f < learned; ++f) {
    double b = 0.1 * std::sin(time_freq_[f] * timestep + time_phase_[f]);
    for (std::size_t j = 0; j < prompt.size(); ++j) b += norm * hashed_unit(options_.seed, f, j) * prompt[j];
    bias[f] = b;
  }
  return bias;
}

void ToyDenoiser::refresh_similarity_features(LatentTensor& features) const {
  const int C = options_.latent_channels;
  for (int y = 0; y < features.height(); ++y) {
    for (int x = 0; x < features.width(); ++x) {
      double sq = 0.0;
      for (int c = 0; c < C; ++c) sq += features.at(c, y, x) * features.at(c, y, x);
      features.at(C, y, x) = -0.5 * sq;
      features.at(C + 1, y, x) = 1.0;
    }
  }
}

std::vector<LatentTensor> ToyDenoiser::predict(std::span<const LatentTensor> latents, StepInfo step,
                                               std::span<const ConditioningBundle> conditioning,
                                               const AttentionHook* hook) const {
  const auto& o = options_;
  if (latents.size() != conditioning.size()) fail(ErrorCode::ShapeMismatch, "one conditioning bundle per branch required");
  const std::size_t branches = latents.size();

  std::vector<LatentTensor> features;
  features.reserve(branches);
  for (std::size_t b = 0; b < branches; ++b) {
    const LatentTensor& x = latents[b];
    const LatentTensor& c = conditioning[b].concat;
    if (x.channels() != o.latent_channels || x.height() != o.latent_height || x.width() != o.latent_width) {
      fail(ErrorCode::ShapeMismatch, "latent is " + std::to_string(x.channels()) + "x" + std::to_string(x.height()) +
                                         "x" + std::to_string(x.width()) + ", denoiser expects " +
                                         std::to_string(o.latent_channels) + "x" + std::to_string(o.latent_height) +
                                         "x" + std::to_string(o.latent_width));
    }
    if (c.channels() != o.cond_channels || c.height() != x.height() || c.width() != x.width()) {
      fail(ErrorCode::ShapeMismatch, "conditioning channel plan does not match the denoiser");
    }
    const LatentTensor learned = conv3x3(conv_in_, concat_channels(x, c));
    const auto bias = conditioning_bias(conditioning[b].prompt_embedding, step.timestep);
    const int C = o.latent_channels;
    LatentTensor h(o.hidden, x.height(), x.width());
    for (int ch = 0; ch < C; ++ch) {
      std::copy_n(c.data().begin() + static_cast<std::ptrdiff_t>(ch * c.plane()), c.plane(),
                  h.data().begin() + static_cast<std::ptrdiff_t>(ch * h.plane()));
    }
    for (int f = 0; f < learned.channels(); ++f) {
      for (std::size_t i = 0; i < h.plane(); ++i) {
        h.data()[(C + 2 + f) * h.plane() + i] = std::tanh(learned.data()[f * learned.plane() + i] + bias[static_cast<std::size_t>(f)]);
      }
    }
    refresh_similarity_features(h);
    features.push_back(std::move(h));
  }

  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const LayerInfo& layer = layers_[li];
    const AttentionLayer& w = attention_[li];
    const int d = layer.head_dim;
    std::vector<Matrix> tokens;
    for (const auto& f : features) tokens.push_back(li == 0 ? to_tokens(f) : pool2_tokens(f));

    std::vector<Matrix> merged(branches, Matrix::Zero(layer.tokens(), o.hidden));
    for (int head = 0; head < layer.heads; ++head) {
      std::vector<AttentionTensors> per_branch;
      for (const auto& t : tokens) {
        per_branch.push_back({t * w.wq.middleCols(head * d, d), t * w.wk.middleCols(head * d, d),
                              t * w.wv.middleCols(head * d, d)});
      }
      std::vector<Matrix> outs;
      if (hook != nullptr && *hook) {
        outs = (*hook)(HookContext{layer, head, step}, per_branch);
      } else {
        for (const auto& t : per_branch) outs.push_back(attention::self_attention(t));
      }
      if (outs.size() != branches) fail(ErrorCode::HookMismatch, "attention hook returned the wrong number of branches");
      for (std::size_t b = 0; b < branches; ++b) {
        if (outs[b].rows() != layer.tokens() || outs[b].cols() != d) {
          fail(ErrorCode::HookMismatch, "attention hook output shape does not match layer " + std::to_string(layer.layer_id));
        }
        merged[b].middleCols(head * d, d) = outs[b];
      }
    }
    const int C = o.latent_channels;
    for (std::size_t b = 0; b < branches; ++b) {
      Matrix rest = merged[b];
      rest.leftCols(d).setZero();
      const Matrix delta = rest * w.wo;
      LatentTensor& f = features[b];
      for (int y = 0; y < f.height(); ++y) {
        for (int x = 0; x < f.width(); ++x) {
          const int token = li == 0 ? y * f.width() + x : (y / 2) * layer.grid_width + (x / 2);
          for (int c = 0; c < C; ++c) f.at(c, y, x) = (1.0 - o.mixing) * f.at(c, y, x) + o.mixing * merged[b](token, c);
          for (int c = C + 2; c < o.hidden; ++c) f.at(c, y, x) += delta(token, c);
        }
      }
      refresh_similarity_features(f);
    }
  }

  if (step.timestep < 0 || step.timestep >= static_cast<int>(alphas_cumprod_.size())) {
    fail(ErrorCode::InvalidArgument, "timestep " + std::to_string(step.timestep) + " outside the training range");
  }
  const double a = alphas_cumprod_[static_cast<std::size_t>(step.timestep)];
  const double pull = o.prior_weight * std::sqrt(1.0 - a);
  const double sa = std::sqrt(a);
  std::vector<LatentTensor> out;
  out.reserve(branches);
  for (std::size_t b = 0; b < branches; ++b) {
    LatentTensor eps = conv3x3(conv_out_, features[b]);
    const auto& x = latents[b].data();
    const auto& m = features[b].data();  // smoothed conditioning latent leads the features
    for (std::size_t i = 0; i < eps.size(); ++i) eps.data()[i] = o.gain * eps.data()[i] + pull * (x[i] - sa * m[i]);
    out.push_back(std::move(eps));
  }
  return out;
}

}  // namespace vtnk::pipeline
