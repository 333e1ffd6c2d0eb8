// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include <Eigen/Core>

#include "core/tensor.hpp"

namespace vtnk::attention {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-head query/key/value token matrices, each tokens x head_dim.
struct AttentionTensors {
  Matrix q;
  Matrix k;
  Matrix v;

  int tokens() const { return static_cast<int>(q.rows()); }
  int dim() const { return static_cast<int>(q.cols()); }

  /// Throws DimMismatch unless q, k, v are all n x d with n, d >= 1.
  void validate() const;
};

/// Soft per-token gate in [0, 1].
struct TokenMask {
  std::vector<double> weights;
};

/// Row-wise softmax with max subtraction.
Matrix softmax_rows(const Matrix& logits);

/// Softmax(Q K^T / sqrt(d)) V.
Matrix self_attention(const AttentionTensors& t);

/// Garment self-attention extended with the person branch's keys and values:
///   Softmax(Q_c [K_c || K_p]^T / sqrt(d)) [V_c || V_p].
/// `person_k` / `person_v` may have zero rows.
Matrix extended_attention(const AttentionTensors& garment, const Matrix& person_k, const Matrix& person_v);

/// Garment-infused path of boundary stitching:
///   Softmax(Q_p [K_p || K_c]^T / sqrt(d)) [V_p || diag(mask) V_c].
Matrix cbs_person_path(const AttentionTensors& person, const AttentionTensors& garment, const TokenMask& mask);

/// Garment path of boundary stitching: the attention map over [K_c || K_p]
/// is applied through its first n columns only, without renormalisation:
///   A = Softmax(Q_c [K_c || K_p]^T / sqrt(d)),  out = A[:, :n] V_c.
Matrix cbs_garment_path(const AttentionTensors& garment, const Matrix& person_keys);

/// The full n x 2n map A used by cbs_garment_path.
Matrix cbs_garment_attention_map(const AttentionTensors& garment, const Matrix& person_keys);

/// Area-average pooling of a binary mask to h x w, flattened row-major.
/// Throws InvalidTarget unless 1 <= h <= H and 1 <= w <= W.
TokenMask downsample_token_mask(const Mask& mask, int h, int w);

}  // namespace vtnk::attention
