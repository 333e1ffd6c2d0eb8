// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/exchange.hpp"

#include <fstream>
#include <iterator>

#include <json.hpp>

#include "core/error.hpp"
#include "core/io.hpp"

namespace vtnk::exchange {

namespace {

using attention::AttentionTensors;
using attention::Matrix;
using nlohmann::json;

std::vector<Matrix> split_heads(const io::Tensor& t, const ManifestLayer& layer, const std::filesystem::path& path) {
  std::uint32_t heads = 1, n = 0, d = 0;
  if (t.dims.size() == 3) {
    heads = t.dims[0];
    n = t.dims[1];
    d = t.dims[2];
  } else if (t.dims.size() == 2) {
    n = t.dims[0];
    d = t.dims[1];
  } else {
    fail(ErrorCode::ShapeMismatch, path.string() + ": expected rank 2 or 3, got rank " + std::to_string(t.dims.size()));
  }
  if (static_cast<int>(heads) != layer.heads || static_cast<int>(n) != layer.tokens() ||
      static_cast<int>(d) != layer.head_dim) {
    fail(ErrorCode::ShapeMismatch, path.string() + ": dims " + t.dims_string() + " do not match layer " + layer.id +
                                       " (" + std::to_string(layer.heads) + "x" + std::to_string(layer.tokens()) +
                                       "x" + std::to_string(layer.head_dim) + ")");
  }
  std::vector<Matrix> out;
  const std::size_t stride = static_cast<std::size_t>(n) * d;
  for (std::uint32_t h = 0; h < heads; ++h) {
    Matrix m(n, d);
    std::copy(t.data.begin() + static_cast<std::ptrdiff_t>(h * stride),
              t.data.begin() + static_cast<std::ptrdiff_t>((h + 1) * stride), m.data());
    out.push_back(std::move(m));
  }
  return out;
}

io::Tensor stack_heads(std::span<const Matrix> heads, const ManifestLayer& layer) {
  if (static_cast<int>(heads.size()) != layer.heads) fail(ErrorCode::ShapeMismatch, "head count differs from manifest");
  io::Tensor t;
  t.dims = {static_cast<std::uint32_t>(layer.heads), static_cast<std::uint32_t>(layer.tokens()),
            static_cast<std::uint32_t>(layer.head_dim)};
  for (const auto& m : heads) {
    if (m.rows() != layer.tokens() || m.cols() != layer.head_dim) {
      fail(ErrorCode::ShapeMismatch, "head shape differs from manifest layer " + layer.id);
    }
    t.data.insert(t.data.end(), m.data(), m.data() + m.size());
  }
  return t;
}

}  // namespace

const ManifestLayer* Manifest::find(std::string_view id) const {
  for (const auto& l : layers) {
    if (l.id == id) return &l;
  }
  return nullptr;
}

Manifest parse_manifest(const std::string& text) {
  Manifest m;
  try {
    const json doc = json::parse(text);
    m.backend = doc.at("backend").get<std::string>();
    for (const auto& e : doc.at("layers")) {
      ManifestLayer l;
      const auto& id = e.at("id");
      l.id = id.is_string() ? id.get<std::string>() : std::to_string(id.get<long long>());
      const auto& grid = e.at("grid");
      if (!grid.is_array() || grid.size() != 2) fail(ErrorCode::MalformedDocument, "layer grid must be [h, w]");
      l.grid_height = grid[0].get<int>();
      l.grid_width = grid[1].get<int>();
      l.heads = e.at("heads").get<int>();
      l.head_dim = e.at("head_dim").get<int>();
      if (l.id.empty() || l.id.find_first_of("/\\") != std::string::npos) {
        fail(ErrorCode::MalformedDocument, "layer id must be a non-empty file-name component");
      }
      if (l.grid_height < 1 || l.grid_width < 1 || l.heads < 1 || l.head_dim < 1) {
        fail(ErrorCode::MalformedDocument, "layer " + l.id + " has non-positive dims");
      }
      if (m.find(l.id) != nullptr) fail(ErrorCode::MalformedDocument, "duplicate layer id " + l.id);
      m.layers.push_back(std::move(l));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedDocument, std::string("manifest: ") + e.what());
  }
  return m;
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  return parse_manifest({std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()});
}

std::string dump_manifest(const Manifest& manifest) {
  json layers = json::array();
  for (const auto& l : manifest.layers) {
    layers.push_back({{"id", l.id}, {"grid", {l.grid_height, l.grid_width}}, {"heads", l.heads}, {"head_dim", l.head_dim}});
  }
  return json{{"backend", manifest.backend}, {"layers", layers}}.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << dump_manifest(manifest);
}

Manifest manifest_for(std::string backend, std::span<const pipeline::LayerInfo> layers) {
  Manifest m{std::move(backend), {}};
  for (const auto& l : layers) {
    m.layers.push_back({std::to_string(l.layer_id), l.grid_height, l.grid_width, l.heads, l.head_dim});
  }
  return m;
}

std::filesystem::path tensor_path(const std::filesystem::path& dir, std::string_view layer_id, char which) {
  return dir / (std::string(layer_id) + "_" + which + ".vtnk");
}

std::vector<AttentionTensors> read_layer(const std::filesystem::path& dir, const ManifestLayer& layer) {
  std::vector<Matrix> parts[3];
  const char names[3] = {'q', 'k', 'v'};
  for (int i = 0; i < 3; ++i) {
    const auto path = tensor_path(dir, layer.id, names[i]);
    parts[i] = split_heads(io::read_tensor(path), layer, path);
  }
  std::vector<AttentionTensors> out;
  for (int h = 0; h < layer.heads; ++h) {
    out.push_back({std::move(parts[0][static_cast<std::size_t>(h)]), std::move(parts[1][static_cast<std::size_t>(h)]),
                   std::move(parts[2][static_cast<std::size_t>(h)])});
  }
  return out;
}

void write_layer(const std::filesystem::path& dir, const ManifestLayer& layer, std::span<const AttentionTensors> heads) {
  std::vector<Matrix> q, k, v;
  for (const auto& t : heads) {
    q.push_back(t.q);
    k.push_back(t.k);
    v.push_back(t.v);
  }
  io::write_tensor(tensor_path(dir, layer.id, 'q'), stack_heads(q, layer));
  io::write_tensor(tensor_path(dir, layer.id, 'k'), stack_heads(k, layer));
  io::write_tensor(tensor_path(dir, layer.id, 'v'), stack_heads(v, layer));
}

std::vector<Matrix> read_layer_output(const std::filesystem::path& dir, const ManifestLayer& layer) {
  const auto path = tensor_path(dir, layer.id, 'o');
  return split_heads(io::read_tensor(path), layer, path);
}

void write_layer_output(const std::filesystem::path& dir, const ManifestLayer& layer, std::span<const Matrix> heads) {
  io::write_tensor(tensor_path(dir, layer.id, 'o'), stack_heads(heads, layer));
}

std::optional<Mode> parse_mode(std::string_view name) {
  if (name == "self") return Mode::Self;
  if (name == "pseudo") return Mode::PseudoPerson;
  if (name == "stitch") return Mode::Stitching;
  return std::nullopt;
}

std::vector<std::filesystem::path> modulate(const Manifest& manifest, const ModulateRequest& request) {
  if (request.mode == Mode::Stitching && !request.garment_mask) {
    fail(ErrorCode::InvalidArgument, "stitching needs the garment mask");
  }
  std::vector<const ManifestLayer*> selected;
  if (request.layers.empty()) {
    for (const auto& l : manifest.layers) selected.push_back(&l);
  } else {
    for (const auto& id : request.layers) {
      const auto* l = manifest.find(id);
      if (l == nullptr) fail(ErrorCode::InvalidArgument, "layer " + id + " is not in the manifest");
      selected.push_back(l);
    }
  }

  // Compute everything before writing so a bad layer leaves no partial output.
  struct Pending {
    std::filesystem::path dir;
    const ManifestLayer* layer;
    std::vector<Matrix> heads;
  };
  std::vector<Pending> pending;
  for (const auto* layer : selected) {
    const auto primary = read_layer(request.primary_dir, *layer);
    if (request.mode == Mode::Self) {
      std::vector<Matrix> out;
      for (const auto& t : primary) out.push_back(attention::self_attention(t));
      pending.push_back({request.primary_dir, layer, std::move(out)});
      continue;
    }
    const auto secondary = read_layer(request.secondary_dir, *layer);
    std::vector<Matrix> a, b;
    if (request.mode == Mode::PseudoPerson) {
      for (std::size_t h = 0; h < primary.size(); ++h) {
        a.push_back(attention::extended_attention(primary[h], secondary[h].k, secondary[h].v));
        b.push_back(attention::self_attention(secondary[h]));
      }
    } else {
      const auto mask = attention::downsample_token_mask(*request.garment_mask, layer->grid_height, layer->grid_width);
      for (std::size_t h = 0; h < primary.size(); ++h) {
        a.push_back(attention::cbs_person_path(primary[h], secondary[h], mask));
        b.push_back(attention::cbs_garment_path(secondary[h], primary[h].k));
      }
    }
    pending.push_back({request.primary_dir, layer, std::move(a)});
    pending.push_back({request.secondary_dir, layer, std::move(b)});
  }

  std::vector<std::filesystem::path> written;
  for (const auto& p : pending) {
    write_layer_output(p.dir, *p.layer, p.heads);
    written.push_back(tensor_path(p.dir, p.layer->id, 'o'));
  }
  return written;
}

}  // namespace vtnk::exchange
