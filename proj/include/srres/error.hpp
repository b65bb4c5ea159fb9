#pragma once

#include <stdexcept>
#include <string>

namespace srres {

enum class ErrorCode {
  kInvalidShape,
  kShapeMismatch,
  kInvalidState,
  kInvalidConfig,
  kDecodeError,
  kEmptyDataset,
  kCheckpointError,
  kNonFiniteLoss,
  kUnknownMethod,
  kIoError,
};

const char* error_code_name(ErrorCode code);

/// Base of every error thrown by the library. The code lets callers such as
/// the CLI map failures onto exit statuses without RTTI chains.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define SRRES_DEFINE_ERROR(Name, Code)                                 \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(Code, what) {}     \
  };

SRRES_DEFINE_ERROR(InvalidShape, ErrorCode::kInvalidShape)
SRRES_DEFINE_ERROR(ShapeMismatch, ErrorCode::kShapeMismatch)
SRRES_DEFINE_ERROR(InvalidState, ErrorCode::kInvalidState)
SRRES_DEFINE_ERROR(InvalidConfig, ErrorCode::kInvalidConfig)
SRRES_DEFINE_ERROR(DecodeError, ErrorCode::kDecodeError)
SRRES_DEFINE_ERROR(EmptyDataset, ErrorCode::kEmptyDataset)
SRRES_DEFINE_ERROR(CheckpointError, ErrorCode::kCheckpointError)
SRRES_DEFINE_ERROR(NonFiniteLoss, ErrorCode::kNonFiniteLoss)
SRRES_DEFINE_ERROR(UnknownMethod, ErrorCode::kUnknownMethod)
SRRES_DEFINE_ERROR(IoError, ErrorCode::kIoError)

#undef SRRES_DEFINE_ERROR

}  // namespace srres
