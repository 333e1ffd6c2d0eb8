// Copyright (C) 2026 The vtnk Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/error.hpp"

namespace vtnk {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::AllRegionsAbsent: return "AllRegionsAbsent";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateCorners: return "DegenerateCorners";
    case ErrorCode::MissingHomography: return "MissingHomography";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::ExcessiveImaginaryResidual: return "ExcessiveImaginaryResidual";
    case ErrorCode::NonPositiveTau: return "NonPositiveTau";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::InvalidTarget: return "InvalidTarget";
    case ErrorCode::InvalidSteps: return "InvalidSteps";
    case ErrorCode::HookMismatch: return "HookMismatch";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::WrongKeypointCount: return "WrongKeypointCount";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) {
  return code != ErrorCode::Internal && code != ErrorCode::ExcessiveImaginaryResidual;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

Error Error::with_stage(std::string stage) const {
  Error e(code_, stage + ": " + what());
  e.stage_ = std::move(stage);
  return e;
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace vtnk
