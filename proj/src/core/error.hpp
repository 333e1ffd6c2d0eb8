// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vtnk {

enum class ErrorCode {
  InvalidArgument,
  // geometry
  AllRegionsAbsent,
  DimensionMismatch,
  DegenerateCorners,
  MissingHomography,
  EmptyMask,
  // spectral
  ExcessiveImaginaryResidual,
  NonPositiveTau,
  ShapeMismatch,
  // attention
  DimMismatch,
  InvalidTarget,
  // pipeline
  InvalidSteps,
  HookMismatch,
  // io
  BadMagic,
  UnsupportedVersion,
  TruncatedPayload,
  MalformedDocument,
  WrongKeypointCount,
  UnsupportedFormat,
  DecodeError,
  IoError,
  Internal,
};

std::string_view to_string(ErrorCode code);

/// True for errors caused by bad caller input (as opposed to internal faults).
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }

  /// Returns a copy prefixed with the pipeline stage that raised it.
  Error with_stage(std::string stage) const;

 private:
  ErrorCode code_;
  std::string stage_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace vtnk
