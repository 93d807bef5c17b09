#pragma once

#include <stdexcept>
#include <string>

namespace tap {

enum class ErrorCode {
  value_out_of_range,
  width_exceeded,
  duplicate_key,
  time_regression,
  key_absent,
  index_out_of_bounds,
  empty_bucket,
  unknown_epoch,
  epoch_out_of_order,
  duplicate_user_in_epoch,
  gamma_exceeded,
  equivocation_attempt,
  epoch_regression,
  schema_mismatch,
  empty_range,
  invalid_quantile,
  normalization_violation,
  bound_too_small,
  unbounded_sensitivity,
  noise_exceeds_bound,
  policy_refused,
  invalid_point,
  io_error,
  malformed,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tap
