// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/attention.hpp"
#include "core/denoiser.hpp"

namespace vtnk::exchange {

/// One self-attention layer of an external backend.
struct ManifestLayer {
  std::string id;
  int grid_height = 0;
  int grid_width = 0;
  int heads = 1;
  int head_dim = 0;

  int tokens() const { return grid_height * grid_width; }
};

/// Session manifest:
///   {"backend": "...", "layers": [{"id": "...", "grid": [h, w], "heads": H, "head_dim": d}, ...]}
struct Manifest {
  std::string backend;
  std::vector<ManifestLayer> layers;

  const ManifestLayer* find(std::string_view id) const;
};

Manifest parse_manifest(const std::string& text);
Manifest read_manifest(const std::filesystem::path& path);
std::string dump_manifest(const Manifest& manifest);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

Manifest manifest_for(std::string backend, std::span<const pipeline::LayerInfo> layers);

/// `{layer_id}_{q|k|v}.vtnk`, and `{layer_id}_o.vtnk` for substituted outputs.
std::filesystem::path tensor_path(const std::filesystem::path& dir, std::string_view layer_id, char which);

/// Per-head tensors of one layer. Files are heads x n x d, or n x d for a
/// single head. Throws ShapeMismatch if they disagree with the manifest.
std::vector<attention::AttentionTensors> read_layer(const std::filesystem::path& dir, const ManifestLayer& layer);
void write_layer(const std::filesystem::path& dir, const ManifestLayer& layer,
                 std::span<const attention::AttentionTensors> heads);
std::vector<attention::Matrix> read_layer_output(const std::filesystem::path& dir, const ManifestLayer& layer);
void write_layer_output(const std::filesystem::path& dir, const ManifestLayer& layer,
                        std::span<const attention::Matrix> heads);

enum class Mode {
  Self,          // plain self-attention on the primary branch
  PseudoPerson,  // primary = garment branch, secondary = person branch
  Stitching,     // primary = garment-infused branch, secondary = garment branch
};

std::optional<Mode> parse_mode(std::string_view name);

struct ModulateRequest {
  Mode mode = Mode::Self;
  std::filesystem::path primary_dir;
  std::filesystem::path secondary_dir;  // unused in Self mode
  std::optional<Mask> garment_mask;     // Stitching only
  std::vector<std::string> layers;      // empty: every manifest layer
};

/// Reads the tapped tensors of each selected layer, applies the modulation
/// and writes `{layer_id}_o.vtnk` next to the inputs of every branch involved.
/// Returns the written paths.
std::vector<std::filesystem::path> modulate(const Manifest& manifest, const ModulateRequest& request);

}  // namespace vtnk::exchange
