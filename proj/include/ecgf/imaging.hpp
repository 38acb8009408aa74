#pragma once

#include <Eigen/Core>
#include <span>
#include <string_view>
#include <vector>

#include "ecgf/rpeak.hpp"
#include "ecgf/signal.hpp"

namespace ecgf {

inline constexpr int kImageSize = 116;

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Modality { spatial, dft, gabor };

std::string_view to_string(Modality m);
Modality parse_modality(std::string_view name);

/// Equal-length beat rows plus the original R-R durations they came from.
struct BeatMatrix {
  Matrix rows;
  std::vector<double> rr_durations;
};

/// 116x116 image with pixels in [0,1]. The constructor checks both.
class SignalImage {
 public:
  SignalImage(Matrix pixels, Modality modality, StressLabel label);

  const Matrix& pixels() const noexcept { return pixels_; }
  Modality modality() const noexcept { return modality_; }
  StressLabel label() const noexcept { return label_; }

 private:
  Matrix pixels_;
  Modality modality_;
  StressLabel label_;
};

/// Segment k spans [peaks[k], peaks[k+1]).
std::vector<std::vector<double>> segment_beats(std::span<const double> samples, const RPeakList& peaks);
std::vector<std::vector<double>> segment_beats(const LabeledWindow& window, const RPeakList& peaks);

/// Linear interpolation of `segment` onto `width` evenly spaced points of
/// [0,1]; both endpoints are kept exactly.
std::vector<double> resample_segment(std::span<const double> segment, int width);

BeatMatrix build_beat_matrix(const LabeledWindow& window, const RPeakList& peaks, int width = kImageSize);

/// Min-max normalization to [0,1]; a constant matrix maps to 0.5 everywhere.
Matrix min_max_normalize(const Matrix& m);

/// Linear interpolation along rows with aligned corners (first and last rows
/// map onto first and last rows).
Matrix resize_rows(const Matrix& m, int out_rows);

/// Normalizes, stretches the beat rows to 116, and clamps to [0,1].
SignalImage to_signal_image(const BeatMatrix& matrix, StressLabel label);

/// The whole spatial path: detect peaks, build rows, render.
SignalImage window_to_image(const LabeledWindow& window);

double sdnn(std::span<const double> rr);
double rmssd(std::span<const double> rr);

}  // namespace ecgf
