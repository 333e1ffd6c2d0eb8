// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "core/error.hpp"

namespace vtnk::io {

namespace {

constexpr std::size_t kFixedHeader = 8;  // magic, version, dtype, rank

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Decodes an 8-bit PNG into `format` after checking the stored layout.
std::vector<std::uint8_t> read_png(const std::filesystem::path& path, bool want_color, int& height, int& width) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!std::filesystem::exists(path)) fail(ErrorCode::IoError, "cannot open " + path.string());
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    const std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorCode::DecodeError, path.string() + ": " + msg);
  }
  const auto stored = image.format;
  if (stored & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    fail(ErrorCode::UnsupportedFormat, path.string() + ": 16-bit samples are not supported");
  }
  if (stored & PNG_FORMAT_FLAG_ALPHA) {
    png_image_free(&image);
    fail(ErrorCode::UnsupportedFormat, path.string() + ": alpha channels are not supported");
  }
  if (!want_color && (stored & PNG_FORMAT_FLAG_COLOR)) {
    png_image_free(&image);
    fail(ErrorCode::UnsupportedFormat, path.string() + ": expected a greyscale image");
  }
  image.format = want_color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorCode::DecodeError, path.string() + ": " + msg);
  }
  height = static_cast<int>(image.height);
  width = static_cast<int>(image.width);
  return buffer;
}

void write_png(const std::filesystem::path& path, const std::vector<std::uint8_t>& pixels, int height, int width,
               bool color) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorCode::IoError, path.string() + ": " + msg);
  }
}

std::uint8_t quantize(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

}  // namespace

// -----------------------------------------------------------------------------
// Interchange tensors
// -----------------------------------------------------------------------------

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::string Tensor::dims_string() const {
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i > 0) s += 'x';
    s += std::to_string(dims[i]);
  }
  return s;
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  if (t.dims.size() > 255) fail(ErrorCode::InvalidArgument, "tensor rank exceeds 255");
  if (t.data.size() != t.element_count()) fail(ErrorCode::ShapeMismatch, "tensor payload does not match its dims");
  std::vector<std::uint8_t> out;
  out.reserve(kFixedHeader + 4 * t.dims.size() + 4 * t.data.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u16(out, kVersion);
  out.push_back(kDtypeF32);
  out.push_back(static_cast<std::uint8_t>(t.dims.size()));
  for (auto d : t.dims) put_u32(out, d);
  for (float v : t.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Tensor decode_tensor(const std::vector<std::uint8_t>& bytes) {
  const std::size_t probe = std::min<std::size_t>(bytes.size(), 4);
  if (std::memcmp(bytes.data(), kMagic, probe) != 0) fail(ErrorCode::BadMagic, "not a VTNK tensor");
  if (bytes.size() < kFixedHeader) fail(ErrorCode::TruncatedPayload, "header is truncated");
  const std::uint16_t version = static_cast<std::uint16_t>(bytes[4] | bytes[5] << 8);
  if (version != kVersion) fail(ErrorCode::UnsupportedVersion, "tensor version " + std::to_string(version));
  if (bytes[6] != kDtypeF32) fail(ErrorCode::UnsupportedFormat, "dtype code " + std::to_string(bytes[6]));
  const std::size_t rank = bytes[7];
  if (bytes.size() < kFixedHeader + 4 * rank) fail(ErrorCode::TruncatedPayload, "dims are truncated");
  Tensor t;
  for (std::size_t i = 0; i < rank; ++i) t.dims.push_back(get_u32(&bytes[kFixedHeader + 4 * i]));
  const std::size_t offset = kFixedHeader + 4 * rank;
  std::size_t count = 1;
  for (auto d : t.dims) {
    // Dims from the file are untrusted; a product that cannot fit is certainly truncated.
    if (d != 0 && count > (bytes.size() - offset) / d) {
      fail(ErrorCode::TruncatedPayload, "dims " + t.dims_string() + " exceed the payload");
    }
    count *= d;
  }
  if ((bytes.size() - offset) / 4 < count) {
    fail(ErrorCode::TruncatedPayload, "payload holds " + std::to_string((bytes.size() - offset) / 4) +
                                          " values, dims need " + std::to_string(count));
  }
  if (bytes.size() - offset != 4 * count) fail(ErrorCode::DecodeError, "trailing bytes after payload");
  t.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) t.data[i] = std::bit_cast<float>(get_u32(&bytes[offset + 4 * i]));
  return t;
}

Tensor read_tensor(const std::filesystem::path& path) {
  try {
    return decode_tensor(read_bytes(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  const auto bytes = encode_tensor(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::IoError, "short write to " + path.string());
}

Tensor from_latent(const LatentTensor& latent) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(latent.channels()), static_cast<std::uint32_t>(latent.height()),
            static_cast<std::uint32_t>(latent.width())};
  t.data.assign(latent.data().begin(), latent.data().end());
  return t;
}

LatentTensor to_latent(const Tensor& t) {
  int c = 1, h = 0, w = 0;
  if (t.dims.size() == 3) {
    c = static_cast<int>(t.dims[0]);
    h = static_cast<int>(t.dims[1]);
    w = static_cast<int>(t.dims[2]);
  } else if (t.dims.size() == 2) {
    h = static_cast<int>(t.dims[0]);
    w = static_cast<int>(t.dims[1]);
  } else {
    fail(ErrorCode::ShapeMismatch, "latent tensors have rank 2 or 3, got " + std::to_string(t.dims.size()));
  }
  if (c < 1 || h < 1 || w < 1) fail(ErrorCode::ShapeMismatch, "latent dims must be positive");
  LatentTensor z(c, h, w);
  std::copy(t.data.begin(), t.data.end(), z.data().begin());
  if (!z.all_finite()) fail(ErrorCode::InvalidArgument, "latent holds non-finite values");
  return z;
}

Tensor from_matrix(const attention::Matrix& m) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
  t.data.assign(m.data(), m.data() + m.size());
  return t;
}

attention::Matrix to_matrix(const Tensor& t) {
  if (t.dims.size() != 2) fail(ErrorCode::ShapeMismatch, "matrix tensors have rank 2");
  attention::Matrix m(t.dims[0], t.dims[1]);
  std::copy(t.data.begin(), t.data.end(), m.data());
  return m;
}

// -----------------------------------------------------------------------------
// Keypoints
// -----------------------------------------------------------------------------

std::vector<geometry::Skeleton> parse_keypoints(const std::string& text, ImageSize image_size) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::MalformedDocument, std::string("keypoint document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("people") || !doc["people"].is_array()) {
    fail(ErrorCode::MalformedDocument, "keypoint document needs a \"people\" array");
  }
  std::vector<geometry::Skeleton> out;
  for (const auto& person : doc["people"]) {
    if (!person.is_object() || !person.contains("pose_keypoints_2d") || !person["pose_keypoints_2d"].is_array()) {
      fail(ErrorCode::MalformedDocument, "person entry needs a \"pose_keypoints_2d\" array");
    }
    const auto& values = person["pose_keypoints_2d"];
    if (values.size() != 3 * geometry::kNumKeypoints) {
      fail(ErrorCode::WrongKeypointCount, "expected 75 numbers per person, got " + std::to_string(values.size()));
    }
    std::array<geometry::Keypoint, geometry::kNumKeypoints> kps{};
    for (int i = 0; i < geometry::kNumKeypoints; ++i) {
      double v[3];
      for (int j = 0; j < 3; ++j) {
        const auto& e = values[static_cast<std::size_t>(3 * i + j)];
        if (!e.is_number()) fail(ErrorCode::MalformedDocument, "keypoint values must be numbers");
        v[j] = e.get<double>();
      }
      kps[static_cast<std::size_t>(i)] = {v[0], v[1], v[2]};
    }
    try {
      out.emplace_back(kps, image_size);
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedDocument, e.what());
    }
  }
  return out;
}

std::vector<geometry::Skeleton> read_keypoints(const std::filesystem::path& path, ImageSize image_size) {
  return parse_keypoints(read_text(path), image_size);
}

geometry::Skeleton read_pose(const std::filesystem::path& path, ImageSize image_size) {
  auto people = read_keypoints(path, image_size);
  if (people.empty()) fail(ErrorCode::MalformedDocument, path.string() + ": no person in keypoint file");
  return people.front();
}

// -----------------------------------------------------------------------------
// Rasters
// -----------------------------------------------------------------------------

Image read_image(const std::filesystem::path& path) {
  int h = 0, w = 0;
  const auto px = read_png(path, true, h, w);
  Image img(h, w);
  for (std::size_t i = 0; i < px.size(); ++i) img.data()[i] = px[i] / 255.0;
  return img;
}

Mask read_mask(const std::filesystem::path& path) {
  int h = 0, w = 0;
  const auto px = read_png(path, false, h, w);
  Mask m(h, w);
  for (std::size_t i = 0; i < px.size(); ++i) m.data()[i] = px[i] >= 128 ? 1 : 0;
  return m;
}

geometry::SegmentationMap read_segmentation(const std::filesystem::path& path) {
  int h = 0, w = 0;
  const auto px = read_png(path, false, h, w);
  try {
    return geometry::SegmentationMap(h, w, std::vector<int>(px.begin(), px.end()));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_image(const std::filesystem::path& path, const Image& image) {
  std::vector<std::uint8_t> px(image.data().size());
  std::transform(image.data().begin(), image.data().end(), px.begin(), quantize);
  write_png(path, px, image.height(), image.width(), true);
}

void write_mask(const std::filesystem::path& path, const Mask& mask) {
  std::vector<std::uint8_t> px(mask.data().size());
  std::transform(mask.data().begin(), mask.data().end(), px.begin(), [](std::uint8_t v) -> std::uint8_t {
    return v ? 255 : 0;
  });
  write_png(path, px, mask.height(), mask.width(), false);
}

void write_segmentation(const std::filesystem::path& path, const geometry::SegmentationMap& map) {
  std::vector<std::uint8_t> px(map.labels().size());
  for (std::size_t i = 0; i < px.size(); ++i) {
    const int l = map.labels()[i];
    if (l < 0 || l > 255) fail(ErrorCode::InvalidArgument, "label does not fit in 8 bits");
    px[i] = static_cast<std::uint8_t>(l);
  }
  write_png(path, px, map.height(), map.width(), false);
}

std::vector<double> read_embedding(const std::filesystem::path& path) {
  const Tensor t = read_tensor(path);
  std::vector<double> out(t.data.begin(), t.data.end());
  for (double v : out) {
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, path.string() + ": embedding holds non-finite values");
  }
  return out;
}

}  // namespace vtnk::io
