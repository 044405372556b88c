#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace coil {

// Base for all library errors. `code()` is a stable machine-readable tag used
// by the CLI when reporting failures.
class CoilError : public std::runtime_error {
 public:
  CoilError(std::string code, const std::string& msg)
      : std::runtime_error(msg), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define COIL_DEFINE_ERROR(Name, Tag)                       \
  class Name : public CoilError {                          \
   public:                                                 \
    explicit Name(const std::string& msg)                  \
        : CoilError(Tag, msg) {}                           \
  }

COIL_DEFINE_ERROR(DimensionError, "dimension");
COIL_DEFINE_ERROR(ShapeError, "shape");
COIL_DEFINE_ERROR(BoundsViolation, "bounds");
COIL_DEFINE_ERROR(SchemaError, "schema");
COIL_DEFINE_ERROR(InvalidAction, "invalid_action");
COIL_DEFINE_ERROR(EmptyTrajectory, "empty_trajectory");
COIL_DEFINE_ERROR(EmptyInput, "empty_input");
COIL_DEFINE_ERROR(EmptyBatch, "empty_batch");
COIL_DEFINE_ERROR(InsufficientData, "insufficient_data");
COIL_DEFINE_ERROR(SolverError, "solver");
COIL_DEFINE_ERROR(NotFitted, "not_fitted");
COIL_DEFINE_ERROR(NotPretrained, "not_pretrained");
COIL_DEFINE_ERROR(NonFiniteGradient, "nonfinite_gradient");
COIL_DEFINE_ERROR(ExpertTooWeak, "expert_too_weak");
COIL_DEFINE_ERROR(IoError, "io");

#undef COIL_DEFINE_ERROR

// Parse/validation errors carry one message per violation so callers can
// report all of them at once.
class ParseError : public CoilError {
 public:
  ParseError(const std::string& msg, std::vector<std::string> details = {})
      : CoilError("parse", msg), details_(std::move(details)) {}
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  std::vector<std::string> details_;
};

class ConfigError : public CoilError {
 public:
  ConfigError(const std::string& msg, std::vector<std::string> details = {})
      : CoilError("config", msg), details_(std::move(details)) {}
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  std::vector<std::string> details_;
};

}  // namespace coil
