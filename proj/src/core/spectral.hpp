// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <vector>

#include "core/tensor.hpp"

namespace vtnk::spectral {

/// Complex C x H x W spectrum with the zero-frequency bin of every channel at
/// (H/2, W/2) (integer division).
class Spectrum {
 public:
  Spectrum() = default;
  Spectrum(int channels, int height, int width);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t plane() const { return static_cast<std::size_t>(height_) * width_; }

  std::complex<double>& at(int c, int u, int v) { return data_[c * plane() + static_cast<std::size_t>(u) * width_ + v]; }
  const std::complex<double>& at(int c, int u, int v) const {
    return data_[c * plane() + static_cast<std::size_t>(u) * width_ + v];
  }
  std::vector<std::complex<double>>& data() { return data_; }
  const std::vector<std::complex<double>>& data() const { return data_; }

  bool same_shape(const Spectrum& o) const {
    return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
  }

 private:
  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<std::complex<double>> data_;
};

/// H x W low-pass weights, broadcast over channels.
struct GaussianMask {
  int height = 0;
  int width = 0;
  double tau = 0.0;
  std::vector<double> weights;

  double at(int u, int v) const { return weights[static_cast<std::size_t>(u) * width + v]; }
};

/// Relative bound on the imaginary part left after the inverse transform.
inline constexpr double kMaxImaginaryResidual = 1e-4;

/// Per-channel unnormalised 2-D DFT, then shift of the DC bin to the centre.
Spectrum fft_centered(const LatentTensor& latent);

/// Inverse shift, inverse DFT scaled by 1/(H*W), real part kept. Throws
/// ExcessiveImaginaryResidual when the dropped imaginary part exceeds
/// kMaxImaginaryResidual of the real part (2-norms).
LatentTensor ifft_centered(const Spectrum& spectrum);

/// Same as ifft_centered, also reporting ||imag|| / ||real||.
LatentTensor ifft_centered(const Spectrum& spectrum, double& imaginary_ratio);

/// Normalised frequency of centred bin index: (i - n/2) / n, in [-0.5, 0.5).
double normalized_frequency(int index, int n);

/// weights(u, v) = exp(-(fu^2 + fv^2) / (2 tau^2)) over normalised frequencies.
GaussianMask gaussian_lowpass_mask(int height, int width, double tau);

/// mask * f_inv + (1 - mask) * f_rand, element-wise per channel.
Spectrum fuse_spectra(const Spectrum& f_inv, const Spectrum& f_rand, const GaussianMask& mask);

/// Keeps the low band of the inversion noise and the high band of the random
/// noise.
LatentTensor spectral_pose_inject(const LatentTensor& z_inv, const LatentTensor& z_rand, double tau);

/// Share of the output's energy inside normalised radius <= tau that comes
/// from the mask-weighted inversion spectrum:
///   sum_low |G f_inv|^2 / (sum_low |G f_inv|^2 + sum_low |(1-G) f_rand|^2).
double low_band_inversion_share(const LatentTensor& z_inv, const LatentTensor& z_rand, double tau);

}  // namespace vtnk::spectral
