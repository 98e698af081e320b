#pragma once

#include <stdexcept>
#include <string>

namespace poselabel {

enum class Errc {
  // I/O and ingestion (CLI exit code 1)
  io,
  parse,
  schema,
  unsupported_format,
  // domain / validation (CLI exit code 2)
  invalid_argument,
  too_few_points,
  degenerate_configuration,
  non_finite_residual,
  mixed_cameras,
  insufficient_orientation_diversity,
  missing_mesh,
  missing_extrinsics,
  dimension_mismatch,
  value_overflow,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}

  Errc code() const { return code_; }

  /// I/O-class failures map to CLI exit 1, everything else to 2.
  bool is_io() const {
    return code_ == Errc::io || code_ == Errc::parse || code_ == Errc::schema ||
           code_ == Errc::unsupported_format;
  }

  int exit_code() const { return is_io() ? 1 : 2; }

 private:
  Errc code_;
};

}  // namespace poselabel
