#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ecgf {

inline constexpr double kDefaultFs = 256.0;
inline constexpr double kWindowSeconds = 30.0;
inline constexpr int kClassCount = 5;

/// One of the five ordinal stress levels, 0 (Very Low) through 4 (Very High).
class StressLabel {
 public:
  /// Throws Error(invalid_argument) outside 0..4.
  explicit StressLabel(int level);

  int level() const noexcept { return level_; }
  std::string_view name() const noexcept;

  friend bool operator==(StressLabel, StressLabel) = default;

 private:
  int level_;
};

inline constexpr std::array<std::string_view, kClassCount> kStressLabelNames = {
    "Very Low", "Low", "Above Average", "High", "Very High"};

/// Single-channel ECG. Samples are finite, fs is positive, and the record is
/// never empty; the constructor enforces all three.
class EcgRecord {
 public:
  EcgRecord(std::vector<double> samples, double fs = kDefaultFs,
            std::string subject_id = {});

  std::span<const double> samples() const noexcept { return samples_; }
  double fs() const noexcept { return fs_; }
  const std::string& subject_id() const noexcept { return subject_id_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double duration() const noexcept { return static_cast<double>(samples_.size()) / fs_; }

 private:
  std::vector<double> samples_;
  double fs_;
  std::string subject_id_;
};

struct LabeledWindow {
  EcgRecord ecg;
  StressLabel label;
  std::size_t window_index = 0;
};

/// Number of samples in one 30 s window, round(30 * fs).
std::size_t window_length(double fs);

/// Reads the header-less "index,value" CSV. Accepts LF and CRLF endings.
EcgRecord load_ecg(const std::filesystem::path& path, double fs = kDefaultFs,
                   std::string subject_id = {});

/// Writes shortest round-trip decimal representations, so reloading is exact.
void save_ecg(const EcgRecord& record, const std::filesystem::path& path);

std::vector<StressLabel> load_labels(const std::filesystem::path& path);
void save_labels(std::span<const StressLabel> labels, const std::filesystem::path& path);

/// Cuts contiguous, non-overlapping 30 s windows. A trailing partial window is
/// dropped; `labels` must have exactly one entry per full window.
std::vector<LabeledWindow> windowize(const EcgRecord& ecg, std::span<const StressLabel> labels);

}  // namespace ecgf
