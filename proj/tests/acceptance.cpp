// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance [fixture_dir] [cli_path]

#include <sys/wait.h>

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "core/attention.hpp"
#include "core/ddim.hpp"
#include "core/denoiser.hpp"
#include "core/geometry.hpp"
#include "core/homography.hpp"
#include "core/spectral.hpp"
#include "core/toy_denoiser.hpp"
#include "core/tryon.hpp"
#include "core/warp.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace vtnk;
using attention::AttentionTensors;
using attention::Matrix;
using fixtures::Rng;
namespace fs = std::filesystem;

namespace {

fs::path g_fixtures = VTNK_FIXTURE_DIR;
std::string g_cli = VTNK_CLI_PATH;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- geometry

Eigen::Matrix3d random_homography(Rng& rng, double strength) {
  Eigen::Matrix3d h;
  h << 1 + rng.uniform(-strength, strength), rng.uniform(-strength, strength), rng.uniform(-20, 20),
      rng.uniform(-strength, strength), 1 + rng.uniform(-strength, strength), rng.uniform(-20, 20),
      rng.uniform(-strength, strength) * 1e-2, rng.uniform(-strength, strength) * 1e-2, 1.0;
  return h;
}

std::array<geometry::Point2, 4> project(const Eigen::Matrix3d& h, const std::array<geometry::Point2, 4>& pts) {
  std::array<geometry::Point2, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    const Eigen::Vector3d q = h * Eigen::Vector3d(pts[i].x, pts[i].y, 1.0);
    out[i] = {q.x() / q.z(), q.y() / q.z()};
  }
  return out;
}

double corner_error(const geometry::Homography& h, const std::array<geometry::Point2, 4>& src,
                    const std::array<geometry::Point2, 4>& dst) {
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto p = h.apply(src[i]);
    worst = std::max(worst, std::hypot(p.x - dst[i].x, p.y - dst[i].y));
  }
  return worst;
}

void homography_suite(Verdict& v) {
  using namespace geometry;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2026);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Matrix3d h = random_homography(rng, 0.3);
    const double x0 = rng.uniform(0, 100), y0 = rng.uniform(0, 100);
    const auto src = corners({x0, y0, x0 + rng.uniform(5, 80), y0 + rng.uniform(5, 80)});
    const auto dst = project(h, src);
    const auto fit = estimate_homography(src, dst);
    // Reprojection measured here, independently of the fit's own report.
    worst = std::max(worst, corner_error(fit.homography, src, dst));
  }
  v.detail << "200 instances, max corner error " << worst << " px";
  v.require(worst <= 1e-6, "corner error <= 1e-6 px");

  const std::array<Point2, 4> src = {Point2{10, 10}, Point2{50, 12}, Point2{48, 70}, Point2{8, 66}};
  const Eigen::Matrix3d id = estimate_homography(src, src).homography.matrix();
  std::array<Point2, 4> shifted{};
  for (std::size_t i = 0; i < 4; ++i) shifted[i] = {src[i].x + 10, src[i].y - 5};
  const auto tr = estimate_homography(src, shifted).homography;
  const double id_err = (id - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  const double tr_err = (tr.matrix() - Homography::translation(10, -5).matrix()).cwiseAbs().maxCoeff();
  v.detail << ", identity matrix error " << id_err << ", translation matrix error " << tr_err
           << ", translation corner error " << corner_error(tr, src, shifted);
  // Exact up to floating-point rounding at pixel scale.
  v.require(id_err <= 1e-12 && corner_error(estimate_homography(src, src).homography, src, src) <= 1e-12,
            "identity exact");
  v.require(tr_err <= 1e-12 && corner_error(tr, src, shifted) <= 1e-12, "translation exact");
  const double t = seconds_since(t0);
  v.detail << ", " << t << " s";
  v.require(t < 5.0, "runtime < 5 s");
}

void region_mask_suite(Verdict& v) {
  using namespace geometry;
  Rng rng(47);
  long mismatches = 0, pixels = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int h = rng.integer(1, 32), w = rng.integer(1, 32);
    const auto spec = region_spec(trial % 2 ? RegionCategory::Upper : RegionCategory::Lower);
    std::vector<int> labels(static_cast<std::size_t>(h) * w);
    for (auto& l : labels) l = rng.integer(0, 13);
    const SegmentationMap parsing(h, w, labels);
    RegionBoxes boxes;
    boxes.image_size = {h, w};
    for (const auto& r : spec.regions) {
      if (rng.uniform(0, 1) < 0.2) continue;
      const double x0 = rng.uniform(0, w - 1), x1 = rng.uniform(x0, w - 1);
      const double y0 = rng.uniform(0, h - 1), y1 = rng.uniform(y0, h - 1);
      boxes.boxes.push_back({r.region_id, {x0, y0, x1, y1}});
    }
    const auto masks = region_masks(parsing, boxes, spec);
    if (masks.size() != boxes.boxes.size()) {
      ++mismatches;
      continue;
    }
    for (const auto& rm : masks) {
      const auto* def = spec.find(rm.region_id);
      const auto* box = boxes.find(rm.region_id);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          ++pixels;
          mismatches += rm.mask.at(y, x) != oracle::region_indicator(parsing, *def, box->box, x, y) ? 1 : 0;
        }
      }
    }
  }
  v.detail << "50 fixtures, " << pixels << " mask pixels, " << mismatches << " mismatches";
  v.require(mismatches == 0, "exact match");
}

void warp_suite(Verdict& v) {
  using namespace geometry;
  Rng rng(53);
  double worst = 1.0;
  long pooled_covered = 0, pooled_agree = 0;
  for (int trial = 0; trial < 50; ++trial) {
    Image img(16, 16);
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) {
        img.at(y, x, 0) = x / 15.0;
        img.at(y, x, 1) = y / 15.0;
        img.at(y, x, 2) = x < 8 ? 0.25 : 0.75;
      }
    }
    Mask left(16, 16), right(16, 16);
    for (int y = 2; y < 14; ++y) {
      for (int x = 1; x < 15; ++x) (x < 8 ? left : right).at(y, x) = 1;
    }
    const std::vector<RegionMask> masks = {{1, left}, {2, right}};
    std::vector<RegionTransform> tf;
    std::vector<std::array<double, 9>> raw;
    for (int r = 1; r <= 2; ++r) {
      Eigen::Matrix3d h;
      const double a = rng.uniform(-0.15, 0.15), s = rng.uniform(0.9, 1.1);
      h << s * std::cos(a), -s * std::sin(a), rng.uniform(-2, 2), s * std::sin(a), s * std::cos(a), rng.uniform(-2, 2),
          rng.uniform(-2e-3, 2e-3), rng.uniform(-2e-3, 2e-3), 1.0;
      tf.push_back({r, h});
      raw.push_back({h(0, 0), h(0, 1), h(0, 2), h(1, 0), h(1, 1), h(1, 2), h(2, 0), h(2, 1), h(2, 2)});
    }
    const auto ours = piecewise_warp(img, masks, tf, {16, 16});
    const auto ref = oracle::forward_warp(img, {left, right}, raw, {16, 16});
    int covered = 0, agree = 0;
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) {
        if (!ref.coverage.test(y, x)) continue;
        ++covered;
        // Same region (channel 2) and the sampled source position within one pixel.
        bool ok = ours.coverage.test(y, x) && std::abs(ours.image.at(y, x, 2) - ref.image.at(y, x, 2)) <= 1e-9;
        for (int c = 0; c < 2 && ok; ++c) ok = std::abs(ours.image.at(y, x, c) - ref.image.at(y, x, c)) <= 1.0 / 15.0;
        agree += ok ? 1 : 0;
      }
    }
    worst = std::min(worst, covered ? static_cast<double>(agree) / covered : 0.0);
    pooled_covered += covered;
    pooled_agree += agree;
  }
  const double pooled = static_cast<double>(pooled_agree) / static_cast<double>(pooled_covered);
  v.detail << "50 fixtures, covered-pixel agreement " << 100.0 * pooled << "% (worst fixture " << 100.0 * worst << "%)";
  v.require(pooled >= 0.95, "covered-pixel agreement >= 95%");

  Image img(16, 16);
  for (std::size_t i = 0; i < img.data().size(); ++i) img.data()[i] = rng.integer(0, 255) / 255.0;
  Mask m(16, 16);
  for (auto& b : m.data()) b = rng.uniform(0, 1) < 0.6 ? 1 : 0;
  const std::vector<RegionMask> masks = {{1, m}};
  const std::vector<RegionTransform> tf = {{1, Eigen::Matrix3d::Identity()}};
  const auto out = piecewise_warp(img, masks, tf, img.size());
  int worst_lsb = 0;
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      if (!m.test(y, x)) continue;
      if (!out.coverage.test(y, x)) worst_lsb = 256;
      for (int c = 0; c < 3; ++c) {
        const int a = static_cast<int>(std::lround(out.image.at(y, x, c) * 255.0));
        const int b = static_cast<int>(std::lround(img.at(y, x, c) * 255.0));
        worst_lsb = std::max(worst_lsb, std::abs(a - b));
      }
    }
  }
  v.detail << ", identity warp max deviation " << worst_lsb << " LSB";
  v.require(worst_lsb <= 1, "identity warp within 1 LSB");
}

// ---------------------------------------------------------------- spectral

void spi_suite(Verdict& v) {
  using namespace spectral;
  const auto t0 = std::chrono::steady_clock::now();
  double round_trip = 0.0, parseval = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    const LatentTensor z = gaussian_noise(4, 64, 64, 300 + static_cast<std::uint64_t>(seed));
    const Spectrum f = fft_centered(z);
    const LatentTensor back = ifft_centered(f);
    double ze = 0.0, fe = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      round_trip = std::max(round_trip, std::abs(back.data()[i] - z.data()[i]));
      ze += z.data()[i] * z.data()[i];
    }
    for (const auto& c : f.data()) fe += std::norm(c);
    parseval = std::max(parseval, std::abs(ze - fe / (64.0 * 64.0)) / ze);
  }
  v.detail << "round trip " << round_trip << ", Parseval rel " << parseval;
  v.require(round_trip <= 1e-6, "FFT round trip <= 1e-6");
  v.require(parseval <= 1e-5, "Parseval <= 1e-5 relative");

  const LatentTensor a = gaussian_noise(4, 64, 64, 1), b = gaussian_noise(4, 64, 64, 2);
  const Spectrum fa = fft_centered(a), fb = fft_centered(b);
  GaussianMask ones = gaussian_lowpass_mask(64, 64, 0.1), zeros = ones;
  std::fill(ones.weights.begin(), ones.weights.end(), 1.0);
  std::fill(zeros.weights.begin(), zeros.weights.end(), 0.0);
  // Mask extremes select bitwise. Equal inputs mix to themselves up to rounding.
  const Spectrum same = fuse_spectra(fa, fa, gaussian_lowpass_mask(64, 64, 0.1));
  bool fixed = fuse_spectra(fa, fb, ones).data() == fa.data() && fuse_spectra(fa, fb, zeros).data() == fb.data();
  for (std::size_t i = 0; i < fa.data().size(); ++i) {
    fixed = fixed && std::abs(same.data()[i] - fa.data()[i]) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(fa.data()[i]);
  }
  v.detail << ", fusion fixed points " << (fixed ? "exact" : "inexact");
  v.require(fixed, "fusion fixed points exact");

  double share = 0.0, worst_share = 1.0, imag = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    const LatentTensor zi = gaussian_noise(4, 64, 64, 1000 + static_cast<std::uint64_t>(seed));
    const LatentTensor zr = gaussian_noise(4, 64, 64, 5000 + static_cast<std::uint64_t>(seed));
    const double s = low_band_inversion_share(zi, zr, 0.1);
    share += s / 100.0;
    worst_share = std::min(worst_share, s);
    double ratio = 1.0;
    ifft_centered(fuse_spectra(fft_centered(zi), fft_centered(zr), gaussian_lowpass_mask(64, 64, 0.1)), ratio);
    imag = std::max(imag, ratio);
  }
  v.detail << ", low-band inversion share mean " << share << " (min " << worst_share << ")"
           << ", imaginary residual " << imag;
  v.require(share >= 0.95, "low-band attribution >= 0.95");
  v.require(imag <= 1e-4, "imaginary residual <= 1e-4");

  // Normalized radius 0.1 lands on the grid for a 10-wide axis.
  const auto m10 = gaussian_lowpass_mask(10, 10, 0.1);
  const double mask_err = std::max(std::abs(m10.at(6, 5) - std::exp(-0.5)), std::abs(m10.at(5, 4) - std::exp(-0.5)));
  v.detail << ", mask error at r=0.1 " << mask_err;
  v.require(mask_err <= 1e-9, "mask exp(-0.5) at r=0.1 within 1e-9");
  const double t = seconds_since(t0);
  v.detail << ", " << t << " s";
  v.require(t < 10.0, "runtime < 10 s");
}

// ---------------------------------------------------------------- attention

Matrix random_matrix(Rng& rng, int rows, int cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

AttentionTensors random_tensors(Rng& rng, int n, int d, double scale = 1.0) {
  return {random_matrix(rng, n, d, scale), random_matrix(rng, n, d, scale), random_matrix(rng, n, d, scale)};
}

oracle::Dense to_dense(const Matrix& m) {
  oracle::Dense out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  }
  return out;
}

double max_diff(const Matrix& a, const oracle::Dense& b) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      m = std::max(m, std::abs(a(i, j) - b[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]));
    }
  }
  return m;
}

void attention_suite(Verdict& v) {
  using namespace attention;
  Rng rng(61);
  double ext = 0.0, person = 0.0, garment = 0.0, empty = 0.0, halving = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = rng.integer(1, 32), m = rng.integer(1, 32), d = rng.integer(1, 16);
    const auto g = random_tensors(rng, n, d, 1.5);
    const Matrix kp = random_matrix(rng, m, d, 1.5), vp = random_matrix(rng, m, d);
    ext = std::max(ext, max_diff(extended_attention(g, kp, vp), oracle::concat_attention(to_dense(g.q), to_dense(g.k),
                                                                                         to_dense(kp), to_dense(g.v),
                                                                                         to_dense(vp))));
    const auto p = random_tensors(rng, m, d, 1.5);
    TokenMask mask;
    oracle::Dense gated = to_dense(g.v);
    for (int i = 0; i < n; ++i) {
      mask.weights.push_back(rng.uniform(0, 1));
      for (auto& x : gated[static_cast<std::size_t>(i)]) x *= mask.weights.back();
    }
    person = std::max(person, max_diff(cbs_person_path(p, g, mask),
                                       oracle::concat_attention(to_dense(p.q), to_dense(p.k), to_dense(g.k),
                                                                to_dense(p.v), gated)));
    const Matrix kpp = random_matrix(rng, n, d, 1.5);
    garment = std::max(garment, max_diff(cbs_garment_path(g, kpp), oracle::truncated_attention(
                                                                         to_dense(g.q), to_dense(g.k), to_dense(kpp),
                                                                         to_dense(g.v))));
    const Matrix none(0, d);
    empty = std::max(empty, (extended_attention(g, none, none) - self_attention(g)).cwiseAbs().maxCoeff());
    halving = std::max(halving, (cbs_garment_path(g, g.k) - 0.5 * self_attention(g)).cwiseAbs().maxCoeff());
  }
  v.detail << "500 instances, extended " << ext << ", person path " << person << ", garment path " << garment
           << ", empty injection " << empty << ", halving " << halving;
  v.require(std::max({ext, person, garment}) <= 1e-6, "oracle agreement <= 1e-6");
  v.require(empty <= 1e-7, "empty injection <= 1e-7");
  v.require(halving <= 1e-6, "halving <= 1e-6");
}

// ---------------------------------------------------------------- ddim

double max_abs_diff(const LatentTensor& a, const LatentTensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

void ddim_suite(Verdict& v) {
  using namespace pipeline;
  const auto s = make_ddim_schedule(50);
  const ZeroDenoiser zero;
  const ConditioningBundle blank{LatentTensor(5, 8, 8), {}};
  const LatentTensor x = gaussian_noise(4, 8, 8, 71);
  const LatentTensor out = ddim_sample(x, zero, s, blank);
  const double a_t = oracle::linear_alpha_bar(999);
  double closed = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    closed = std::max(closed, std::abs(out.data()[i] - x.data()[i] / std::sqrt(a_t)) / (1.0 + std::abs(out.data()[i])));
  }
  v.detail << "zero-noise chain rel error " << closed;
  v.require(closed <= 1e-12, "closed-form chain exact");

  double round_trip = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto lin = LinearDenoiser::random_contraction(4 * 8 * 8, 0.5, seed);
    const LatentTensor x0 = gaussian_noise(4, 8, 8, 80 + seed);
    round_trip = std::max(round_trip, max_abs_diff(ddim_sample(ddim_invert(x0, lin, s, blank), lin, s, blank), x0));
  }
  ToyDenoiserOptions o;
  o.latent_height = 8;
  o.latent_width = 8;
  const ToyDenoiser toy(o);
  const ConditioningBundle cond{gaussian_noise(5, 8, 8, 90), {}};
  const LatentTensor x0 = gaussian_noise(4, 8, 8, 91);
  const LatentTensor inv = ddim_invert(x0, toy, s, cond);
  const double toy_trip = max_abs_diff(ddim_sample(inv, toy, s, cond), x0);
  v.detail << ", round trip linear " << round_trip << ", toy " << toy_trip;
  v.require(std::max(round_trip, toy_trip) <= 1e-3, "round trip <= 1e-3 over 50 steps");

  const bool same = ddim_sample(x, toy, s, cond) == ddim_sample(x, toy, s, cond) && ddim_invert(x0, toy, s, cond) == inv;
  v.detail << ", repeated runs " << (same ? "bitwise equal" : "differ");
  v.require(same, "bitwise determinism");
}

// ---------------------------------------------------------------- end to end

void end_to_end_suite(Verdict& v) {
  using namespace pipeline;
  const auto t0 = std::chrono::steady_clock::now();
  const auto scene = fixtures::two_patch_scene();
  ToyDenoiserOptions o;
  o.latent_height = 16;
  o.latent_width = 12;
  const ToyDenoiser toy(o);
  std::vector<double> on_v, off_v;
  bool contract = true, deterministic = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TryOnConfig cfg;
    cfg.spi_seed = seed;
    const auto on = run_tryon(scene.inputs, toy, cfg);
    cfg.cbs = false;
    const auto off = run_tryon(scene.inputs, toy, cfg);
    if (seed == 0) {
      cfg.cbs = true;
      deterministic = run_tryon(scene.inputs, toy, cfg).image == on.image;
    }
    for (const auto* r : {&on, &off}) {
      contract = contract && r->image.size() == scene.inputs.person.size();
      for (double px : r->image.data()) contract = contract && px >= 0.0 && px <= 1.0;
      for (int y = 0; y < r->image.height(); ++y) {
        for (int x = 0; x < r->image.width(); ++x) {
          if (scene.inputs.agnostic_mask.test(y, x)) continue;
          for (int c = 0; c < 3; ++c) contract = contract && r->image.at(y, x, c) == scene.inputs.person.at(y, x, c);
        }
      }
    }
    const Mask band = fixtures::seam_band(on.garment_infused, scene.inputs.agnostic_mask);
    on_v.push_back(seam_variance(on.image, band));
    off_v.push_back(seam_variance(off.image, band));
  }
  auto median = [](std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    return 0.5 * (xs[xs.size() / 2 - 1] + xs[xs.size() / 2]);
  };
  const double mon = median(on_v), moff = median(off_v);
  const double t = seconds_since(t0);
  v.detail << "20 seeds, median seam variance CBS on " << mon << ", off " << moff << ", "
           << (deterministic ? "deterministic" : "nondeterministic") << ", contract "
           << (contract ? "holds" : "broken") << ", " << t << " s";
  v.require(mon < moff, "CBS-on median < CBS-off median");
  v.require(deterministic, "deterministic output");
  v.require(contract, "shape/range contract");
  v.require(t < 60.0, "runtime < 60 s");
}

// ---------------------------------------------------------------- cli

struct Run {
  int code = -1;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Run run_cli(const std::string& args, const fs::path& stdout_file) {
  const fs::path err = stdout_file.string() + ".err";
  const std::string cmd = "'" + g_cli + "' " + args + " >'" + stdout_file.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

std::string fx(const char* name) { return "'" + (g_fixtures / name).string() + "'"; }

void cli_suite(Verdict& v) {
  const fs::path dir = fs::temp_directory_path() / "vtnk_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto out = [&](const std::string& name) { return (dir / name).string(); };

  struct Sub {
    std::string name;
    std::function<std::string(const std::string&)> args;  // output stem -> arguments
    std::string suffix;
  };
  const std::vector<Sub> subs = {
      {"morph",
       [&](const std::string& o) {
         return "morph --pseudo-img " + fx("model.png") + " --pseudo-pose " + fx("model_pose.json") +
                " --pseudo-parse " + fx("model_parse.png") + " --target-pose " + fx("person_pose.json") +
                " --target-parse " + fx("person_parse.png") + " --category upper --out " + o + ".png --out-mask " + o +
                "_mask.png";
       },
       ".png"},
      {"spi", [&](const std::string& o) { return "spi --inv-noise " + fx("inv.vtnk") + " --seed 5 --tau 0.1 --out " + o + ".vtnk"; },
       ".vtnk"},
      {"pseudo",
       [&](const std::string& o) {
         return "pseudo --garment " + fx("shop_garment.png") + " --garment-mask " + fx("shop_garment_mask.png") +
                " --agnostic " + fx("agnostic.png") + " --agnostic-mask " + fx("agnostic_mask.png") +
                " --seed 2 --steps 8 --out " + o + ".png";
       },
       ".png"},
      {"tryon", [&](const std::string& o) { return "tryon --config " + fx("tryon.json") + " --out " + o + ".png"; }, ".png"},
      {"tryon-shop", [&](const std::string& o) { return "tryon --config " + fx("tryon_shop.json") + " --out " + o + ".png"; },
       ".png"},
  };
  int identical = 0;
  for (const auto& s : subs) {
    const std::string a = out(s.name + "_a"), b = out(s.name + "_b");
    const Run ra = run_cli(s.args(a), a + ".stdout"), rb = run_cli(s.args(b), b + ".stdout");
    const bool ok = ra.code == 0 && rb.code == 0 && fs::exists(a + s.suffix) && slurp(a + s.suffix) == slurp(b + s.suffix);
    identical += ok ? 1 : 0;
    v.require(ok, s.name + " byte-identical rerun");
  }
  const bool mask_ok = slurp(out("morph_a_mask.png")) == slurp(g_fixtures / "morph_expected_mask.png");
  v.require(mask_ok, "morph mask equals fixture");
  const Run ia = run_cli("inspect " + fx("inv.vtnk"), out("inspect_a")), ib = run_cli("inspect " + fx("inv.vtnk"), out("inspect_b"));
  const bool inspect_ok = ia.code == 0 && ib.code == 0 && slurp(out("inspect_a")) == slurp(out("inspect_b")) &&
                          slurp(out("inspect_a")).rfind("dims=4x8x8 dtype=f32", 0) == 0;
  identical += inspect_ok ? 1 : 0;
  v.require(inspect_ok, "inspect stable");

  const std::vector<std::string> bad = {
      "",
      "frobnicate",
      "spi --tau 0.1",
      "spi --inv-noise " + fx("inv.vtnk") + " --seed 1 --tau 0 --out " + out("x.vtnk"),
      "spi --inv-noise " + fx("inv.vtnk") + " --seed 1 --tau 0.1 --out " + out("x.vtnk") + " --bogus",
      "spi --inv-noise /nonexistent.vtnk --seed 1 --tau 0.1 --out " + out("x.vtnk"),
      "inspect " + fx("person.png"),
      "morph --pseudo-img " + fx("model.png") + " --pseudo-pose " + fx("person.png") + " --pseudo-parse " +
          fx("model_parse.png") + " --target-pose " + fx("person_pose.json") + " --target-parse " +
          fx("person_parse.png") + " --out " + out("x.png"),
      "morph --pseudo-img " + fx("model.png") + " --pseudo-pose " + fx("model_pose.json") + " --pseudo-parse " +
          fx("model_parse.png") + " --target-pose " + fx("person_pose.json") + " --target-parse " +
          fx("person_parse.png") + " --category hat --out " + out("x.png"),
      "pseudo --garment " + fx("shop_garment.png") + " --garment-mask " + fx("shop_garment.png") + " --agnostic " +
          fx("agnostic.png") + " --agnostic-mask " + fx("agnostic_mask.png") + " --out " + out("x.png"),
      "pseudo --garment " + fx("shop_garment.png") + " --garment-mask " + fx("shop_garment_mask.png") + " --agnostic " +
          fx("agnostic.png") + " --agnostic-mask " + fx("agnostic_mask.png") + " --steps 0 --out " + out("x.png"),
      "tryon --config " + fx("tryon.json") + " --tau -1 --out " + out("x.png"),
      "tryon --config " + fx("tryon.json") + " --set nope=1 --out " + out("x.png"),
      "tryon --config /nonexistent.json --out " + out("x.png"),
  };
  int diagnosed = 0;
  for (std::size_t i = 0; i < bad.size(); ++i) {
    const Run r = run_cli(bad[i], out("bad_" + std::to_string(i)));
    const bool ok = r.code != 0 && r.err.rfind("error:", 0) == 0;
    diagnosed += ok ? 1 : 0;
    v.require(ok, "error path " + std::to_string(i));
  }
  v.detail << identical << "/" << subs.size() + 1 << " subcommand runs byte-identical, morph mask "
           << (mask_ok ? "matches" : "differs") << ", " << diagnosed << "/" << bad.size()
           << " error paths exit nonzero with error: diagnostics";
  fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_fixtures = argv[1];
  if (argc > 2) g_cli = argv[2];
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria = {
      {"homography oracle suite", homography_suite},
      {"region-mask brute-force equivalence", region_mask_suite},
      {"piecewise warp vs forward-mapping oracle", warp_suite},
      {"spectral pose injection suite", spi_suite},
      {"attention suite", attention_suite},
      {"DDIM suite", ddim_suite},
      {"end-to-end toy try-on", end_to_end_suite},
      {"CLI", cli_suite},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Verdict v;
    try {
      fn(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [exception: " << e.what() << "]";
    }
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.str().c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
