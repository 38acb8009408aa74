#include "ecgf/error.hpp"

namespace ecgf {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::missing_file: return "MissingFile";
    case ErrorCode::empty_input: return "EmptyInput";
    case ErrorCode::malformed_row: return "MalformedRow";
    case ErrorCode::non_finite_sample: return "NonFiniteSample";
    case ErrorCode::label_count_mismatch: return "LabelCountMismatch";
    case ErrorCode::record_too_short: return "RecordTooShort";
    case ErrorCode::window_too_short: return "WindowTooShort";
    case ErrorCode::no_peaks_found: return "NoPeaksFound";
    case ErrorCode::too_few_peaks: return "TooFewPeaks";
    case ErrorCode::segment_too_short: return "SegmentTooShort";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::empty_dataset: return "EmptyDataset";
    case ErrorCode::divergence: return "Divergence";
    case ErrorCode::bad_magic: return "BadMagic";
    case ErrorCode::version_mismatch: return "VersionMismatch";
    case ErrorCode::truncated_file: return "TruncatedFile";
    case ErrorCode::dataset_too_small: return "DatasetTooSmall";
    case ErrorCode::empty_report: return "EmptyReport";
    case ErrorCode::unwritable_path: return "UnwritablePath";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::uint64_t detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      detail_(detail) {}

}  // namespace ecgf
