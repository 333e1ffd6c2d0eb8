// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "core/error.hpp"

namespace vtnk::attention {

namespace {

void require_dim(const Matrix& m, int d, const char* what) {
  if (m.cols() != d) {
    fail(ErrorCode::DimMismatch, std::string(what) + " has head dim " + std::to_string(m.cols()) + ", expected " +
                                     std::to_string(d));
  }
}

// Softmax over the concatenated key set [K1 || K2] without materialising the
// concatenation. Returns (E1 V1 + E2 V2) / rowsum, or E1 V1 / rowsum when
// `drop_second_values` is set. V2 may be empty only in that case.
Matrix two_block_attention(const Matrix& q, const Matrix& k1, const Matrix& v1, const Matrix& k2, const Matrix* v2) {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  const Matrix l1 = (q * k1.transpose()) * inv_sqrt_d;
  const Matrix l2 = k2.rows() > 0 ? Matrix((q * k2.transpose()) * inv_sqrt_d) : Matrix(q.rows(), 0);

  Matrix out = Matrix::Zero(q.rows(), v1.cols());
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    double m = -std::numeric_limits<double>::infinity();
    if (l1.cols() > 0) m = std::max(m, l1.row(i).maxCoeff());
    if (l2.cols() > 0) m = std::max(m, l2.row(i).maxCoeff());
    const Eigen::RowVectorXd e1 = (l1.row(i).array() - m).exp();
    const Eigen::RowVectorXd e2 = (l2.row(i).array() - m).exp();
    const double denom = e1.sum() + e2.sum();
    Eigen::RowVectorXd acc = e1 * v1;
    if (v2 != nullptr && e2.size() > 0) acc += e2 * (*v2);
    out.row(i) = acc / denom;
  }
  return out;
}

}  // namespace

void AttentionTensors::validate() const {
  if (q.rows() < 1 || q.cols() < 1) fail(ErrorCode::DimMismatch, "attention tensors need n >= 1 and d >= 1");
  if (k.rows() != q.rows() || v.rows() != q.rows()) fail(ErrorCode::DimMismatch, "q, k, v token counts differ");
  require_dim(k, dim(), "keys");
  require_dim(v, dim(), "values");
  if (!q.allFinite() || !k.allFinite() || !v.allFinite()) fail(ErrorCode::InvalidArgument, "non-finite attention input");
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - m).exp();
    out.row(i) = e / e.sum();
  }
  return out;
}

Matrix self_attention(const AttentionTensors& t) {
  t.validate();
  return two_block_attention(t.q, t.k, t.v, Matrix(0, t.dim()), nullptr);
}

Matrix extended_attention(const AttentionTensors& garment, const Matrix& person_k, const Matrix& person_v) {
  garment.validate();
  if (person_k.rows() != person_v.rows()) fail(ErrorCode::DimMismatch, "person keys and values token counts differ");
  if (person_k.rows() == 0) return self_attention(garment);
  require_dim(person_k, garment.dim(), "person keys");
  require_dim(person_v, garment.dim(), "person values");
  return two_block_attention(garment.q, garment.k, garment.v, person_k, &person_v);
}

Matrix cbs_person_path(const AttentionTensors& person, const AttentionTensors& garment, const TokenMask& mask) {
  person.validate();
  garment.validate();
  if (garment.dim() != person.dim()) fail(ErrorCode::DimMismatch, "person and garment head dims differ");
  if (static_cast<int>(mask.weights.size()) != garment.tokens()) {
    fail(ErrorCode::DimMismatch, "token mask length " + std::to_string(mask.weights.size()) +
                                     " does not match garment token count " + std::to_string(garment.tokens()));
  }
  const Eigen::Map<const Eigen::VectorXd> gate(mask.weights.data(), static_cast<Eigen::Index>(mask.weights.size()));
  const Matrix gated_v = gate.asDiagonal() * garment.v;
  return two_block_attention(person.q, person.k, person.v, garment.k, &gated_v);
}

Matrix cbs_garment_path(const AttentionTensors& garment, const Matrix& person_keys) {
  garment.validate();
  if (person_keys.rows() != garment.tokens()) {
    fail(ErrorCode::DimMismatch, "garment and person token counts differ (" + std::to_string(garment.tokens()) +
                                     " vs " + std::to_string(person_keys.rows()) + ")");
  }
  require_dim(person_keys, garment.dim(), "person keys");
  return two_block_attention(garment.q, garment.k, garment.v, person_keys, nullptr);
}

Matrix cbs_garment_attention_map(const AttentionTensors& garment, const Matrix& person_keys) {
  garment.validate();
  if (person_keys.rows() != garment.tokens()) fail(ErrorCode::DimMismatch, "garment and person token counts differ");
  require_dim(person_keys, garment.dim(), "person keys");
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(garment.dim()));
  Matrix logits(garment.tokens(), 2 * garment.tokens());
  logits.leftCols(garment.tokens()) = garment.q * garment.k.transpose() * inv_sqrt_d;
  logits.rightCols(garment.tokens()) = garment.q * person_keys.transpose() * inv_sqrt_d;
  return softmax_rows(logits);
}

TokenMask downsample_token_mask(const Mask& mask, int h, int w) {
  const int H = mask.height(), W = mask.width();
  if (h < 1 || w < 1 || h > H || w > W) {
    fail(ErrorCode::InvalidTarget, "cannot pool a " + std::to_string(H) + "x" + std::to_string(W) + " mask to " +
                                       std::to_string(h) + "x" + std::to_string(w));
  }
  // Separable overlap weights of source rows/cols with each target cell.
  auto overlaps = [](int src, int dst) {
    std::vector<std::vector<std::pair<int, double>>> cells(static_cast<std::size_t>(dst));
    const double step = static_cast<double>(src) / dst;
    for (int i = 0; i < dst; ++i) {
      const double lo = i * step, hi = (i + 1) * step;
      for (int s = static_cast<int>(std::floor(lo)); s < std::min(src, static_cast<int>(std::ceil(hi))); ++s) {
        const double o = std::min<double>(hi, s + 1) - std::max<double>(lo, s);
        if (o > 0.0) cells[static_cast<std::size_t>(i)].emplace_back(s, o);
      }
    }
    return cells;
  };
  const auto rows = overlaps(H, h);
  const auto cols = overlaps(W, w);
  const double area = (static_cast<double>(H) / h) * (static_cast<double>(W) / w);

  TokenMask out;
  out.weights.resize(static_cast<std::size_t>(h) * w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      double acc = 0.0;
      for (const auto& [y, wy] : rows[static_cast<std::size_t>(i)]) {
        for (const auto& [x, wx] : cols[static_cast<std::size_t>(j)]) {
          if (mask.test(y, x)) acc += wy * wx;
        }
      }
      out.weights[static_cast<std::size_t>(i) * w + j] = std::clamp(acc / area, 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace vtnk::attention
