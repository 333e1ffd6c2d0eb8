// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

// vtnk-cli: command-line front end over the vtnk C API.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "vtnk/vtnk.h"

namespace {

constexpr int kExitInput = 1;
constexpr int kExitInternal = 2;

struct Failure {
  int exit_code;
  std::string message;
};

void check(vtnk_status status) {
  if (status == VTNK_OK) return;
  throw Failure{vtnk_status_is_input_error(status) ? kExitInput : kExitInternal,
                std::string(vtnk_status_name(status)) + ": " + vtnk_last_error()};
}

using TensorPtr = std::unique_ptr<vtnk_tensor, decltype(&vtnk_tensor_free)>;
using JobPtr = std::unique_ptr<vtnk_job, decltype(&vtnk_job_free)>;

TensorPtr read_tensor(const std::string& path) {
  vtnk_tensor* t = nullptr;
  check(vtnk_tensor_read(path.c_str(), &t));
  return {t, vtnk_tensor_free};
}

void configure_logging() {
  auto logger = spdlog::stderr_logger_st("vtnk");
  logger->set_pattern("%l: %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::err);
  if (const char* env = std::getenv("VTNK_LOG")) {
    const std::string level = env;
    if (level == "debug") spdlog::set_level(spdlog::level::debug);
    else if (level == "info") spdlog::set_level(spdlog::level::info);
    else if (level != "error") spdlog::warn("unknown VTNK_LOG level '{}', using error", level);
  }
}

struct MorphArgs {
  std::string pseudo_img, pseudo_pose, pseudo_parse, target_pose, target_parse, category = "upper", out, out_mask;
  double threshold = 0.3;
};

struct SpiArgs {
  std::string inv_noise, out;
  std::uint64_t seed = 0;
  double tau = 0.1;
};

struct PseudoArgs {
  std::string garment, garment_mask, agnostic, agnostic_mask, prompt, out;
  std::uint64_t seed = 0;
  int steps = 50;
  bool no_injection = false;
};

struct TryonArgs {
  std::string config, out;
  std::vector<std::string> overrides;
  double tau = 0.0;
  int steps = 0;
  std::uint64_t seed = 0;
  std::uint64_t spi_seed = 0;
  std::string category;
};

void run_morph(const MorphArgs& a) {
  vtnk_morph_request r{};
  r.pseudo_image = a.pseudo_img.c_str();
  r.pseudo_pose = a.pseudo_pose.c_str();
  r.pseudo_parse = a.pseudo_parse.c_str();
  r.target_pose = a.target_pose.c_str();
  r.target_parse = a.target_parse.c_str();
  r.category = a.category.c_str();
  r.confidence_threshold = a.threshold;
  r.out_image = a.out.c_str();
  r.out_mask = a.out_mask.empty() ? nullptr : a.out_mask.c_str();
  spdlog::info("morph {} -> {}", a.pseudo_img, a.out);
  check(vtnk_morph_files(&r));
}

void run_spi(const SpiArgs& a) {
  if (!(a.tau > 0.0)) throw Failure{kExitInput, "tau must be positive"};
  const auto inv = read_tensor(a.inv_noise);
  if (vtnk_tensor_rank(inv.get()) != 3) throw Failure{kExitInput, "inversion noise must be a C x H x W tensor"};
  vtnk_tensor* raw = nullptr;
  check(vtnk_gaussian_noise(vtnk_tensor_dim(inv.get(), 0), vtnk_tensor_dim(inv.get(), 1), vtnk_tensor_dim(inv.get(), 2),
                            a.seed, &raw));
  const TensorPtr fresh(raw, vtnk_tensor_free);
  raw = nullptr;
  check(vtnk_spi(inv.get(), fresh.get(), a.tau, &raw));
  const TensorPtr out(raw, vtnk_tensor_free);
  spdlog::info("spi tau={} seed={} -> {}", a.tau, a.seed, a.out);
  check(vtnk_tensor_write(out.get(), a.out.c_str()));
}

void run_pseudo(const PseudoArgs& a) {
  vtnk_pseudo_request r{};
  r.garment = a.garment.c_str();
  r.garment_mask = a.garment_mask.c_str();
  r.agnostic = a.agnostic.c_str();
  r.agnostic_mask = a.agnostic_mask.c_str();
  r.prompt = a.prompt.empty() ? nullptr : a.prompt.c_str();
  r.seed = a.seed;
  r.steps = a.steps;
  r.person_injection = a.no_injection ? 0 : 1;
  r.out_image = a.out.c_str();
  spdlog::info("pseudo seed={} steps={} -> {}", a.seed, a.steps, a.out);
  check(vtnk_pseudo_files(&r));
}

void run_tryon(const TryonArgs& a, const CLI::App& cmd) {
  vtnk_job* raw = nullptr;
  check(vtnk_job_load(a.config.c_str(), &raw));
  const JobPtr job(raw, vtnk_job_free);
  auto set = [&](const char* key, const std::string& value) { check(vtnk_job_set(job.get(), key, value.c_str())); };
  if (cmd.count("--tau")) set("tau", std::to_string(a.tau));
  if (cmd.count("--steps")) set("steps", std::to_string(a.steps));
  if (cmd.count("--seed")) set("seed", std::to_string(a.seed));
  if (cmd.count("--spi-seed")) set("spi_seed", std::to_string(a.spi_seed));
  if (cmd.count("--category")) set("category", a.category);
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw Failure{kExitInput, "--set expects key=value, got '" + kv + "'"};
    set(kv.substr(0, eq).c_str(), kv.substr(eq + 1));
  }
  spdlog::info("tryon {} -> {}", a.config, a.out);
  check(vtnk_job_run(job.get(), a.out.c_str()));
}

void run_inspect(const std::string& path) {
  const auto t = read_tensor(path);
  std::string dims;
  for (uint32_t i = 0; i < vtnk_tensor_rank(t.get()); ++i) {
    if (i > 0) dims += 'x';
    dims += std::to_string(vtnk_tensor_dim(t.get(), i));
  }
  std::printf("dims=%s dtype=f32", dims.c_str());
  vtnk_stats s{};
  if (vtnk_tensor_size(t.get()) > 0) {
    check(vtnk_tensor_stats(t.get(), &s));
    std::printf(" min=%.9g max=%.9g mean=%.9g std=%.9g", s.min, s.max, s.mean, s.std);
  }
  std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"vtnk: training-free virtual try-on kernels"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(vtnk_version()));

  MorphArgs morph;
  auto* m = app.add_subcommand("morph", "Warp a pseudo-person garment onto a target body");
  m->add_option("--pseudo-img", morph.pseudo_img, "Pseudo-person image (PNG)")->required();
  m->add_option("--pseudo-pose", morph.pseudo_pose, "Pseudo-person keypoints (JSON)")->required();
  m->add_option("--pseudo-parse", morph.pseudo_parse, "Pseudo-person parsing (PNG labels)")->required();
  m->add_option("--target-pose", morph.target_pose, "Target keypoints (JSON)")->required();
  m->add_option("--target-parse", morph.target_parse, "Target parsing (PNG labels)")->required();
  m->add_option("--category", morph.category, "upper, lower or dress")->capture_default_str();
  m->add_option("--confidence-threshold", morph.threshold, "Keypoint confidence threshold")->capture_default_str();
  m->add_option("--out", morph.out, "Warped garment image (PNG)")->required();
  m->add_option("--out-mask", morph.out_mask, "Coverage mask (PNG)");

  SpiArgs spi;
  auto* s = app.add_subcommand("spi", "Fuse inversion noise with fresh noise in the frequency domain");
  s->add_option("--inv-noise", spi.inv_noise, "Inverted latent (VTNK, C x H x W)")->required();
  s->add_option("--seed", spi.seed, "Seed of the fresh noise")->capture_default_str();
  s->add_option("--tau", spi.tau, "Gaussian cutoff in normalized frequency")->capture_default_str();
  s->add_option("--out", spi.out, "Fused noise (VTNK)")->required();

  PseudoArgs pseudo;
  auto* p = app.add_subcommand("pseudo", "Generate a pseudo-person image wearing a shop garment");
  p->add_option("--garment", pseudo.garment, "Garment image (PNG)")->required();
  p->add_option("--garment-mask", pseudo.garment_mask, "Garment mask (PNG)")->required();
  p->add_option("--agnostic", pseudo.agnostic, "Cloth-agnostic person image (PNG)")->required();
  p->add_option("--agnostic-mask", pseudo.agnostic_mask, "Agnostic mask (PNG)")->required();
  p->add_option("--prompt", pseudo.prompt, "Prompt embedding (VTNK)");
  p->add_option("--seed", pseudo.seed, "Noise seed")->capture_default_str();
  p->add_option("--steps", pseudo.steps, "DDIM steps")->capture_default_str();
  p->add_flag("--no-injection", pseudo.no_injection, "Disable person key/value injection");
  p->add_option("--out", pseudo.out, "Pseudo-person image (PNG)")->required();

  TryonArgs tryon;
  auto* t = app.add_subcommand("tryon", "Run the full try-on chain from a config file");
  t->add_option("--config", tryon.config, "Job config (JSON)")->required();
  t->add_option("--out", tryon.out, "Result image (PNG)")->required();
  t->add_option("--tau", tryon.tau, "Override tau");
  t->add_option("--steps", tryon.steps, "Override DDIM steps");
  t->add_option("--seed", tryon.seed, "Override pseudo-person seed");
  t->add_option("--spi-seed", tryon.spi_seed, "Override SPI noise seed");
  t->add_option("--category", tryon.category, "Override garment category");
  t->add_option("--set", tryon.overrides, "Override any config key (key=value)");

  std::string inspect_path;
  auto* i = app.add_subcommand("inspect", "Print dims, dtype and statistics of a tensor file");
  i->add_option("file", inspect_path, "Tensor file (VTNK)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    spdlog::error("{}", e.what());
    return kExitInput;
  }

  try {
    if (*m) run_morph(morph);
    else if (*s) run_spi(spi);
    else if (*p) run_pseudo(pseudo);
    else if (*t) run_tryon(tryon, *t);
    else if (*i) run_inspect(inspect_path);
  } catch (const Failure& f) {
    spdlog::error("{}", f.message);
    return f.exit_code;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitInternal;
  }
  return 0;
}
