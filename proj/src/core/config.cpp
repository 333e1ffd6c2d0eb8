// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/config.hpp"

#include <fstream>
#include <iterator>
#include <set>

#include <json.hpp>

#include "core/codec.hpp"
#include "core/error.hpp"
#include "core/io.hpp"

namespace vtnk::config {

namespace {

using nlohmann::json;

const std::set<std::string> kPathKeys = {"person",       "agnostic",      "agnostic_mask", "person_pose",
                                         "person_parse", "garment",       "garment_mask",  "garment_pose",
                                         "garment_parse", "pseudo_pose",  "pseudo_parse",  "prompt"};
const std::set<std::string> kRequiredPaths = {"person",       "agnostic", "agnostic_mask", "person_pose",
                                              "person_parse", "garment",  "garment_mask"};
const std::set<std::string> kSettingKeys = {"category", "tau",          "steps",      "seed",
                                            "spi_seed", "confidence_threshold", "box_padding", "hook_layers",
                                            "noise_init", "cbs",        "person_injection", "paste_back",
                                            "denoiser"};
const std::set<std::string> kDenoiserKeys = {"kind", "seed", "gain", "prior_weight", "sharpness", "mixing", "hidden", "heads"};

template <typename T>
T field(const json& doc, const std::string& key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::MalformedDocument, "config key \"" + key + "\" has the wrong type");
  }
}

}  // namespace

struct JobDocument::Impl {
  json doc;
  std::filesystem::path base;
  std::set<std::string> cwd_paths;  // set by overrides
};

JobDocument JobDocument::parse(const std::string& text, std::filesystem::path base_dir) {
  JobDocument d;
  d.impl_ = std::make_shared<Impl>();
  try {
    d.impl_->doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedDocument, std::string("config: ") + e.what());
  }
  if (!d.impl_->doc.is_object()) fail(ErrorCode::MalformedDocument, "config must be an object");
  d.impl_->base = std::move(base_dir);
  return d;
}

JobDocument JobDocument::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  return parse({std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()}, path.parent_path());
}

void JobDocument::set(const std::string& key, const std::string& value) {
  json v;
  try {
    v = json::parse(value);
  } catch (const json::exception&) {
    v = value;
  }
  if (kPathKeys.count(key)) {
    impl_->doc[key] = value;
    impl_->cwd_paths.insert(key);
    return;
  }
  const auto dot = key.find('.');
  if (dot == std::string::npos) {
    impl_->doc[key] = v;
  } else {
    auto& parent = impl_->doc[key.substr(0, dot)];
    if (!parent.is_null() && !parent.is_object()) fail(ErrorCode::MalformedDocument, "cannot set " + key);
    parent[key.substr(dot + 1)] = v;
  }
}

TryOnJob JobDocument::resolve() const {
  const json& doc = impl_->doc;
  for (const auto& [key, _] : doc.items()) {
    if (!kPathKeys.count(key) && !kSettingKeys.count(key)) fail(ErrorCode::MalformedDocument, "unknown config key \"" + key + "\"");
  }
  for (const auto& key : kRequiredPaths) {
    if (!doc.contains(key)) fail(ErrorCode::MalformedDocument, "config is missing \"" + key + "\"");
  }
  auto path = [&](const std::string& key) -> std::optional<std::filesystem::path> {
    if (!doc.contains(key)) return std::nullopt;
    std::filesystem::path p = field<std::string>(doc, key);
    if (p.is_relative() && !impl_->cwd_paths.count(key)) p = impl_->base / p;
    return p;
  };

  TryOnJob job;
  job.person = *path("person");
  job.agnostic = *path("agnostic");
  job.agnostic_mask = *path("agnostic_mask");
  job.person_pose = *path("person_pose");
  job.person_parse = *path("person_parse");
  job.garment = *path("garment");
  job.garment_mask = *path("garment_mask");
  job.garment_pose = path("garment_pose");
  job.garment_parse = path("garment_parse");
  job.pseudo_pose = path("pseudo_pose");
  job.pseudo_parse = path("pseudo_parse");
  job.prompt = path("prompt");
  if (job.garment_pose.has_value() != job.garment_parse.has_value()) {
    fail(ErrorCode::MalformedDocument, "garment_pose and garment_parse go together");
  }
  if (job.pseudo_pose.has_value() != job.pseudo_parse.has_value()) {
    fail(ErrorCode::MalformedDocument, "pseudo_pose and pseudo_parse go together");
  }
  if (!job.garment_pose && !job.pseudo_pose) {
    fail(ErrorCode::MalformedDocument, "a shop garment needs pseudo_pose and pseudo_parse");
  }

  auto& c = job.config;
  if (doc.contains("category")) {
    const auto name = field<std::string>(doc, "category");
    const auto cat = geometry::parse_garment_category(name);
    if (!cat) fail(ErrorCode::MalformedDocument, "unknown category \"" + name + "\"");
    c.category = *cat;
  }
  if (doc.contains("tau")) c.tau = field<double>(doc, "tau");
  if (doc.contains("steps")) c.num_steps = field<int>(doc, "steps");
  if (doc.contains("seed")) c.seed = field<std::uint64_t>(doc, "seed");
  if (doc.contains("spi_seed")) c.spi_seed = field<std::uint64_t>(doc, "spi_seed");
  if (doc.contains("confidence_threshold")) c.confidence_threshold = field<double>(doc, "confidence_threshold");
  if (doc.contains("box_padding")) c.box_padding = field<double>(doc, "box_padding");
  if (doc.contains("hook_layers")) c.hook_layers = field<std::vector<int>>(doc, "hook_layers");
  if (doc.contains("noise_init")) {
    const auto name = field<std::string>(doc, "noise_init");
    if (name == "spectral") c.noise_init = pipeline::NoiseInit::Spectral;
    else if (name == "inversion") c.noise_init = pipeline::NoiseInit::Inversion;
    else if (name == "random") c.noise_init = pipeline::NoiseInit::Random;
    else fail(ErrorCode::MalformedDocument, "unknown noise_init \"" + name + "\"");
  }
  if (doc.contains("cbs")) c.cbs = field<bool>(doc, "cbs");
  if (doc.contains("person_injection")) c.person_injection = field<bool>(doc, "person_injection");
  if (doc.contains("paste_back")) c.paste_back = field<bool>(doc, "paste_back");

  if (doc.contains("denoiser")) {
    const json& d = doc["denoiser"];
    if (!d.is_object()) fail(ErrorCode::MalformedDocument, "\"denoiser\" must be an object");
    for (const auto& [key, _] : d.items()) {
      if (!kDenoiserKeys.count(key)) fail(ErrorCode::MalformedDocument, "unknown denoiser key \"" + key + "\"");
    }
    auto& spec = job.denoiser;
    if (d.contains("kind")) spec.kind = field<std::string>(d, "kind");
    if (spec.kind != "toy" && spec.kind != "zero") fail(ErrorCode::MalformedDocument, "unknown denoiser \"" + spec.kind + "\"");
    if (d.contains("seed")) spec.toy.seed = field<std::uint64_t>(d, "seed");
    if (d.contains("gain")) spec.toy.gain = field<double>(d, "gain");
    if (d.contains("prior_weight")) spec.toy.prior_weight = field<double>(d, "prior_weight");
    if (d.contains("sharpness")) spec.toy.sharpness = field<double>(d, "sharpness");
    if (d.contains("mixing")) spec.toy.mixing = field<double>(d, "mixing");
    if (d.contains("hidden")) spec.toy.hidden = field<int>(d, "hidden");
    if (d.contains("heads")) spec.toy.heads = field<int>(d, "heads");
  }
  try {
    c.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NonPositiveTau || e.code() == ErrorCode::InvalidSteps) throw;
    throw Error(ErrorCode::MalformedDocument, e.what());
  }
  return job;
}

std::unique_ptr<pipeline::Denoiser> make_denoiser(const DenoiserSpec& spec, ImageSize image_size) {
  if (spec.kind == "zero") return std::make_unique<pipeline::ZeroDenoiser>();
  const ImageSize ls = pipeline::LatentCodec{}.latent_size(image_size);
  pipeline::ToyDenoiserOptions o = spec.toy;
  o.latent_height = ls.height;
  o.latent_width = ls.width;
  return std::make_unique<pipeline::ToyDenoiser>(o);
}

pipeline::TryOnResult execute(const TryOnJob& job) {
  pipeline::TryOnInputs in;
  try {
    in.person = io::read_image(job.person);
    in.agnostic = io::read_image(job.agnostic);
    in.agnostic_mask = io::read_mask(job.agnostic_mask);
    in.person_annotation.parsing = io::read_segmentation(job.person_parse);
    in.person_annotation.skeleton = io::read_pose(job.person_pose, in.person_annotation.parsing.size());
    in.garment = io::read_image(job.garment);
    in.garment_mask = io::read_mask(job.garment_mask);
    if (job.garment_pose) {
      pipeline::Annotation a;
      a.parsing = io::read_segmentation(*job.garment_parse);
      a.skeleton = io::read_pose(*job.garment_pose, a.parsing.size());
      in.garment_annotation = std::move(a);
    }
    if (job.prompt) in.prompt_embedding = io::read_embedding(*job.prompt);
  } catch (const Error& e) {
    throw e.with_stage("load");
  }

  pipeline::Annotator annotator;
  if (!in.garment_annotation) {
    annotator = [&job](const Image& pseudo) {
      pipeline::Annotation a;
      a.parsing = io::read_segmentation(*job.pseudo_parse);
      if (!(a.parsing.size() == pseudo.size())) {
        fail(ErrorCode::DimensionMismatch, "pseudo-person parsing does not match the pseudo-person image");
      }
      a.skeleton = io::read_pose(*job.pseudo_pose, a.parsing.size());
      return a;
    };
  }
  const auto denoiser = [&] {
    try {
      return make_denoiser(job.denoiser, in.agnostic.size());
    } catch (const Error& e) {
      throw e.with_stage("denoiser");
    }
  }();
  return pipeline::run_tryon(in, *denoiser, job.config, annotator);
}

}  // namespace vtnk::config
