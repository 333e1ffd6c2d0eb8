// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "core/denoiser.hpp"
#include "core/toy_denoiser.hpp"
#include "core/tryon.hpp"

namespace vtnk::config {

struct DenoiserSpec {
  std::string kind = "toy";  // "toy" or "zero"
  pipeline::ToyDenoiserOptions toy;
};

/// Resolved try-on job. Relative paths in the file are taken relative to the
/// file's directory.
struct TryOnJob {
  std::filesystem::path person;
  std::filesystem::path agnostic;
  std::filesystem::path agnostic_mask;
  std::filesystem::path person_pose;
  std::filesystem::path person_parse;
  std::filesystem::path garment;
  std::filesystem::path garment_mask;
  std::optional<std::filesystem::path> garment_pose;  // with garment_parse: garment worn by a model
  std::optional<std::filesystem::path> garment_parse;
  std::optional<std::filesystem::path> pseudo_pose;  // with pseudo_parse: annotation of the pseudo-person
  std::optional<std::filesystem::path> pseudo_parse;
  std::optional<std::filesystem::path> prompt;
  pipeline::TryOnConfig config;
  DenoiserSpec denoiser;
};

/// Raw job document plus the directory its relative paths refer to.
class JobDocument {
 public:
  static JobDocument parse(const std::string& text, std::filesystem::path base_dir);
  static JobDocument load(const std::filesystem::path& path);

  /// Sets `key` (dotted for nested keys, e.g. "denoiser.seed"). The value is
  /// read as JSON when it parses, else as a string. Paths set here are taken
  /// relative to the working directory.
  void set(const std::string& key, const std::string& value);

  /// Throws MalformedDocument on unknown keys, wrong types or missing inputs.
  TryOnJob resolve() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

std::unique_ptr<pipeline::Denoiser> make_denoiser(const DenoiserSpec& spec, ImageSize image_size);

pipeline::TryOnResult execute(const TryOnJob& job);

}  // namespace vtnk::config
