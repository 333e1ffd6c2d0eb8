// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <string>

#include "core/error.hpp"

namespace vtnk::spectral {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class Plan2d {
 public:
  Plan2d(int height, int width, int sign) : size_(static_cast<std::size_t>(height) * width) {
    buffer_ = fftw_alloc_complex(size_);
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_2d(height, width, buffer_, buffer_, sign, FFTW_ESTIMATE);
    if (plan_ == nullptr) fail(ErrorCode::Internal, "FFTW could not create a plan");
  }
  ~Plan2d() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(buffer_);
  }
  Plan2d(const Plan2d&) = delete;
  Plan2d& operator=(const Plan2d&) = delete;

  std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(buffer_); }
  void run() { fftw_execute(plan_); }

 private:
  std::size_t size_;
  fftw_complex* buffer_ = nullptr;
  fftw_plan plan_ = nullptr;
};

void check_shape_positive(int c, int h, int w) {
  if (c <= 0 || h <= 0 || w <= 0) fail(ErrorCode::InvalidArgument, "spectrum dims must be positive");
}

}  // namespace

Spectrum::Spectrum(int channels, int height, int width) : channels_(channels), height_(height), width_(width) {
  check_shape_positive(channels, height, width);
  data_.assign(static_cast<std::size_t>(channels) * height * width, {0.0, 0.0});
}

Spectrum fft_centered(const LatentTensor& latent) {
  if (!latent.all_finite()) fail(ErrorCode::InvalidArgument, "latent contains non-finite values");
  const int C = latent.channels(), H = latent.height(), W = latent.width();
  Spectrum out(C, H, W);
  Plan2d plan(H, W, FFTW_FORWARD);
  auto* buf = plan.data();
  const int sh = H / 2, sw = W / 2;
  for (int c = 0; c < C; ++c) {
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) buf[static_cast<std::size_t>(y) * W + x] = {latent.at(c, y, x), 0.0};
    }
    plan.run();
    for (int u = 0; u < H; ++u) {
      for (int v = 0; v < W; ++v) {
        out.at(c, (u + sh) % H, (v + sw) % W) = buf[static_cast<std::size_t>(u) * W + v];
      }
    }
  }
  return out;
}

LatentTensor ifft_centered(const Spectrum& spectrum, double& imaginary_ratio) {
  const int C = spectrum.channels(), H = spectrum.height(), W = spectrum.width();
  check_shape_positive(C, H, W);
  LatentTensor out(C, H, W);
  Plan2d plan(H, W, FFTW_BACKWARD);
  auto* buf = plan.data();
  const int sh = H / 2, sw = W / 2;
  const double scale = 1.0 / (static_cast<double>(H) * W);
  double real_sq = 0.0, imag_sq = 0.0;
  for (int c = 0; c < C; ++c) {
    for (int u = 0; u < H; ++u) {
      for (int v = 0; v < W; ++v) {
        buf[static_cast<std::size_t>(u) * W + v] = spectrum.at(c, (u + sh) % H, (v + sw) % W);
      }
    }
    plan.run();
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const std::complex<double> z = buf[static_cast<std::size_t>(y) * W + x] * scale;
        out.at(c, y, x) = z.real();
        real_sq += z.real() * z.real();
        imag_sq += z.imag() * z.imag();
      }
    }
  }
  const double real_norm = std::sqrt(real_sq), imag_norm = std::sqrt(imag_sq);
  imaginary_ratio = real_norm > 0.0 ? imag_norm / real_norm : (imag_norm > 0.0 ? INFINITY : 0.0);
  if (imag_norm > kMaxImaginaryResidual * real_norm) {
    fail(ErrorCode::ExcessiveImaginaryResidual,
         "inverse transform left an imaginary residual of " + std::to_string(imaginary_ratio) + " of the real part");
  }
  return out;
}

LatentTensor ifft_centered(const Spectrum& spectrum) {
  double ratio = 0.0;
  return ifft_centered(spectrum, ratio);
}

double normalized_frequency(int index, int n) { return static_cast<double>(index - n / 2) / n; }

GaussianMask gaussian_lowpass_mask(int height, int width, double tau) {
  if (!(tau > 0.0)) fail(ErrorCode::NonPositiveTau, "tau must be positive");
  if (height <= 0 || width <= 0) fail(ErrorCode::InvalidArgument, "mask dims must be positive");
  GaussianMask mask{height, width, tau, {}};
  mask.weights.resize(static_cast<std::size_t>(height) * width);
  const double denom = 2.0 * tau * tau;
  for (int u = 0; u < height; ++u) {
    const double fu = normalized_frequency(u, height);
    for (int v = 0; v < width; ++v) {
      const double fv = normalized_frequency(v, width);
      mask.weights[static_cast<std::size_t>(u) * width + v] = std::exp(-(fu * fu + fv * fv) / denom);
    }
  }
  return mask;
}

Spectrum fuse_spectra(const Spectrum& f_inv, const Spectrum& f_rand, const GaussianMask& mask) {
  if (!f_inv.same_shape(f_rand) || mask.height != f_inv.height() || mask.width != f_inv.width()) {
    fail(ErrorCode::ShapeMismatch, "spectra and mask shapes disagree");
  }
  Spectrum out(f_inv.channels(), f_inv.height(), f_inv.width());
  for (int c = 0; c < f_inv.channels(); ++c) {
    for (int u = 0; u < f_inv.height(); ++u) {
      for (int v = 0; v < f_inv.width(); ++v) {
        const double g = mask.at(u, v);
        out.at(c, u, v) = g * f_inv.at(c, u, v) + (1.0 - g) * f_rand.at(c, u, v);
      }
    }
  }
  return out;
}

LatentTensor spectral_pose_inject(const LatentTensor& z_inv, const LatentTensor& z_rand, double tau) {
  if (!z_inv.same_shape(z_rand)) fail(ErrorCode::ShapeMismatch, "inversion and random noise shapes disagree");
  const GaussianMask mask = gaussian_lowpass_mask(z_inv.height(), z_inv.width(), tau);
  return ifft_centered(fuse_spectra(fft_centered(z_inv), fft_centered(z_rand), mask));
}

double low_band_inversion_share(const LatentTensor& z_inv, const LatentTensor& z_rand, double tau) {
  if (!z_inv.same_shape(z_rand)) fail(ErrorCode::ShapeMismatch, "inversion and random noise shapes disagree");
  const GaussianMask mask = gaussian_lowpass_mask(z_inv.height(), z_inv.width(), tau);
  const Spectrum fi = fft_centered(z_inv);
  const Spectrum fr = fft_centered(z_rand);
  double from_inv = 0.0, from_rand = 0.0;
  for (int c = 0; c < fi.channels(); ++c) {
    for (int u = 0; u < fi.height(); ++u) {
      const double fu = normalized_frequency(u, fi.height());
      for (int v = 0; v < fi.width(); ++v) {
        const double fv = normalized_frequency(v, fi.width());
        if (fu * fu + fv * fv > tau * tau) continue;
        const double g = mask.at(u, v);
        from_inv += std::norm(g * fi.at(c, u, v));
        from_rand += std::norm((1.0 - g) * fr.at(c, u, v));
      }
    }
  }
  const double total = from_inv + from_rand;
  return total > 0.0 ? from_inv / total : 1.0;
}

}  // namespace vtnk::spectral
