// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#include "vtnk/vtnk.h"

#include <cmath>
#include <new>
#include <sstream>
#include <string>

#include "core/config.hpp"
#include "core/error.hpp"
#include "core/exchange.hpp"
#include "core/io.hpp"
#include "core/spectral.hpp"
#include "core/toy_denoiser.hpp"
#include "core/tryon.hpp"

struct vtnk_tensor {
  vtnk::io::Tensor t;
};

struct vtnk_job {
  vtnk::config::JobDocument doc;
};

namespace {

thread_local std::string last_error;

vtnk_status to_status(vtnk::ErrorCode code) {
  // ErrorCode order matches vtnk_status, offset by VTNK_OK.
  return static_cast<vtnk_status>(static_cast<int>(code) + 1);
}

template <typename F>
vtnk_status guarded(F&& fn) {
  try {
    fn();
    return VTNK_OK;
  } catch (const vtnk::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return VTNK_INTERNAL;
}

void require(const void* p, const char* what) {
  if (p == nullptr) vtnk::fail(vtnk::ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

vtnk::LatentTensor latent_of(const vtnk_tensor* t, const char* what) {
  require(t, what);
  if (t->t.dims.size() != 3) vtnk::fail(vtnk::ErrorCode::ShapeMismatch, std::string(what) + " must be C x H x W");
  return vtnk::io::to_latent(t->t);
}

}  // namespace

extern "C" {

const char* vtnk_version(void) { return "0.1.0"; }

const char* vtnk_last_error(void) { return last_error.c_str(); }

const char* vtnk_status_name(vtnk_status status) {
  if (status == VTNK_OK) return "Ok";
  if (status < VTNK_OK || status > VTNK_INTERNAL) return "Unknown";
  return vtnk::to_string(static_cast<vtnk::ErrorCode>(status - 1)).data();
}

int vtnk_status_is_input_error(vtnk_status status) {
  if (status <= VTNK_OK || status > VTNK_INTERNAL) return 0;
  return vtnk::is_input_error(static_cast<vtnk::ErrorCode>(status - 1)) ? 1 : 0;
}

vtnk_status vtnk_tensor_create(uint32_t rank, const uint32_t* dims, vtnk_tensor** out) {
  return guarded([&] {
    require(out, "out");
    if (rank > 0) require(dims, "dims");
    if (rank > 255) vtnk::fail(vtnk::ErrorCode::InvalidArgument, "rank exceeds 255");
    auto* t = new vtnk_tensor;
    t->t.dims.assign(dims, dims + rank);
    t->t.data.assign(t->t.element_count(), 0.0f);
    *out = t;
  });
}

vtnk_status vtnk_tensor_read(const char* path, vtnk_tensor** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto t = vtnk::io::read_tensor(path);
    *out = new vtnk_tensor{std::move(t)};
  });
}

vtnk_status vtnk_tensor_write(const vtnk_tensor* tensor, const char* path) {
  return guarded([&] {
    require(tensor, "tensor");
    require(path, "path");
    vtnk::io::write_tensor(path, tensor->t);
  });
}

void vtnk_tensor_free(vtnk_tensor* tensor) { delete tensor; }

uint32_t vtnk_tensor_rank(const vtnk_tensor* tensor) {
  return tensor ? static_cast<uint32_t>(tensor->t.dims.size()) : 0;
}

uint32_t vtnk_tensor_dim(const vtnk_tensor* tensor, uint32_t axis) {
  return tensor && axis < tensor->t.dims.size() ? tensor->t.dims[axis] : 0;
}

size_t vtnk_tensor_size(const vtnk_tensor* tensor) { return tensor ? tensor->t.data.size() : 0; }

float* vtnk_tensor_data(vtnk_tensor* tensor) { return tensor ? tensor->t.data.data() : nullptr; }

vtnk_status vtnk_tensor_stats(const vtnk_tensor* tensor, vtnk_stats* out) {
  return guarded([&] {
    require(tensor, "tensor");
    require(out, "out");
    const auto& d = tensor->t.data;
    if (d.empty()) vtnk::fail(vtnk::ErrorCode::InvalidArgument, "tensor is empty");
    double lo = d[0], hi = d[0], sum = 0.0;
    for (float v : d) {
      lo = std::min<double>(lo, v);
      hi = std::max<double>(hi, v);
      sum += v;
    }
    const double mean = sum / static_cast<double>(d.size());
    double var = 0.0;
    for (float v : d) var += (v - mean) * (v - mean);
    *out = {lo, hi, mean, std::sqrt(var / static_cast<double>(d.size()))};
  });
}

vtnk_status vtnk_gaussian_noise(uint32_t channels, uint32_t height, uint32_t width, uint64_t seed, vtnk_tensor** out) {
  return guarded([&] {
    require(out, "out");
    const auto z = vtnk::gaussian_noise(static_cast<int>(channels), static_cast<int>(height), static_cast<int>(width), seed);
    *out = new vtnk_tensor{vtnk::io::from_latent(z)};
  });
}

vtnk_status vtnk_spi(const vtnk_tensor* z_inv, const vtnk_tensor* z_rand, double tau, vtnk_tensor** out) {
  return guarded([&] {
    require(out, "out");
    const auto a = latent_of(z_inv, "z_inv");
    const auto b = latent_of(z_rand, "z_rand");
    *out = new vtnk_tensor{vtnk::io::from_latent(vtnk::spectral::spectral_pose_inject(a, b, tau))};
  });
}

vtnk_status vtnk_morph_files(const vtnk_morph_request* r) {
  return guarded([&] {
    require(r, "request");
    for (const char* p : {r->pseudo_image, r->pseudo_pose, r->pseudo_parse, r->target_pose, r->target_parse,
                          r->category, r->out_image}) {
      require(p, "morph request field");
    }
    vtnk::pipeline::TryOnConfig config;
    const auto category = vtnk::geometry::parse_garment_category(r->category);
    if (!category) vtnk::fail(vtnk::ErrorCode::InvalidArgument, std::string("unknown category ") + r->category);
    config.category = *category;
    config.confidence_threshold = r->confidence_threshold;
    const auto image = vtnk::io::read_image(r->pseudo_image);
    const auto pseudo_parse = vtnk::io::read_segmentation(r->pseudo_parse);
    const auto pseudo_pose = vtnk::io::read_pose(r->pseudo_pose, pseudo_parse.size());
    const auto target_parse = vtnk::io::read_segmentation(r->target_parse);
    const auto target_pose = vtnk::io::read_pose(r->target_pose, target_parse.size());
    const auto warp = vtnk::pipeline::morph_garment(image, pseudo_pose, pseudo_parse, target_pose, target_parse, config);
    vtnk::io::write_image(r->out_image, warp.image);
    if (r->out_mask != nullptr) vtnk::io::write_mask(r->out_mask, warp.coverage);
  });
}

vtnk_status vtnk_pseudo_files(const vtnk_pseudo_request* r) {
  return guarded([&] {
    require(r, "request");
    for (const char* p : {r->garment, r->garment_mask, r->agnostic, r->agnostic_mask, r->out_image}) {
      require(p, "pseudo request field");
    }
    vtnk::pipeline::TryOnConfig config;
    config.seed = r->seed;
    config.num_steps = r->steps;
    config.person_injection = r->person_injection != 0;
    const auto garment = vtnk::io::read_image(r->garment);
    const auto garment_mask = vtnk::io::read_mask(r->garment_mask);
    const auto agnostic = vtnk::io::read_image(r->agnostic);
    const auto agnostic_mask = vtnk::io::read_mask(r->agnostic_mask);
    std::vector<double> prompt;
    if (r->prompt != nullptr) prompt = vtnk::io::read_embedding(r->prompt);
    const auto denoiser = vtnk::config::make_denoiser({}, agnostic.size());
    const auto result = vtnk::pipeline::generate_pseudo_person(garment, garment_mask, agnostic, agnostic_mask,
                                                               *denoiser, config, prompt);
    vtnk::io::write_image(r->out_image, result.image);
  });
}

vtnk_status vtnk_job_load(const char* path, vtnk_job** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new vtnk_job{vtnk::config::JobDocument::load(path)};
  });
}

vtnk_status vtnk_job_set(vtnk_job* job, const char* key, const char* value) {
  return guarded([&] {
    require(job, "job");
    require(key, "key");
    require(value, "value");
    job->doc.set(key, value);
  });
}

vtnk_status vtnk_job_run(const vtnk_job* job, const char* out_image) {
  return guarded([&] {
    require(job, "job");
    require(out_image, "out_image");
    const auto resolved = job->doc.resolve();
    const auto result = vtnk::config::execute(resolved);
    vtnk::io::write_image(out_image, result.image);
  });
}

void vtnk_job_free(vtnk_job* job) { delete job; }

vtnk_status vtnk_exchange_modulate(const char* manifest, const char* mode, const char* primary_dir,
                                   const char* secondary_dir, const char* garment_mask, const char* layers) {
  return guarded([&] {
    require(manifest, "manifest");
    require(mode, "mode");
    require(primary_dir, "primary_dir");
    vtnk::exchange::ModulateRequest req;
    const auto m = vtnk::exchange::parse_mode(mode);
    if (!m) vtnk::fail(vtnk::ErrorCode::InvalidArgument, std::string("unknown exchange mode ") + mode);
    req.mode = *m;
    req.primary_dir = primary_dir;
    if (req.mode != vtnk::exchange::Mode::Self) {
      require(secondary_dir, "secondary_dir");
      req.secondary_dir = secondary_dir;
    }
    if (garment_mask != nullptr) req.garment_mask = vtnk::io::read_mask(garment_mask);
    if (layers != nullptr) {
      std::stringstream ss(layers);
      for (std::string id; std::getline(ss, id, ',');) {
        if (!id.empty()) req.layers.push_back(id);
      }
    }
    vtnk::exchange::modulate(vtnk::exchange::read_manifest(manifest), req);
  });
}

}  // extern "C"
