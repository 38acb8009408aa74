#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ecgf {

enum class ErrorCode {
  missing_file,
  empty_input,
  malformed_row,
  non_finite_sample,
  label_count_mismatch,
  record_too_short,
  window_too_short,
  no_peaks_found,
  too_few_peaks,
  segment_too_short,
  invalid_argument,
  shape_mismatch,
  empty_dataset,
  divergence,
  bad_magic,
  version_mismatch,
  truncated_file,
  dataset_too_small,
  empty_report,
  unwritable_path,
};

const char* to_string(ErrorCode code);

/// Single exception type for the library. `detail()` carries the line number
/// for malformed_row and the byte offset for truncated_file, otherwise 0.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::uint64_t detail = 0);

  ErrorCode code() const noexcept { return code_; }
  std::uint64_t detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::uint64_t detail_;
};

}  // namespace ecgf
