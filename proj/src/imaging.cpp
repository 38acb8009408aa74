#include "ecgf/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ecgf/error.hpp"

namespace ecgf {

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::spatial: return "spatial";
    case Modality::dft: return "dft";
    case Modality::gabor: return "gabor";
  }
  return "unknown";
}

Modality parse_modality(std::string_view name) {
  if (name == "spatial") return Modality::spatial;
  if (name == "dft") return Modality::dft;
  if (name == "gabor") return Modality::gabor;
  throw Error(ErrorCode::invalid_argument, "unknown modality '" + std::string(name) + "'");
}

SignalImage::SignalImage(Matrix pixels, Modality modality, StressLabel label)
    : pixels_(std::move(pixels)), modality_(modality), label_(label) {
  if (pixels_.rows() != kImageSize || pixels_.cols() != kImageSize)
    throw Error(ErrorCode::shape_mismatch, "signal image must be 116x116, got " + std::to_string(pixels_.rows()) + "x" +
                                               std::to_string(pixels_.cols()));
  for (Eigen::Index i = 0; i < pixels_.size(); ++i) {
    const double v = pixels_.data()[i];
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::invalid_argument, "pixel outside [0,1]");
  }
}

std::vector<std::vector<double>> segment_beats(std::span<const double> samples, const RPeakList& peaks) {
  if (peaks.size() < 2) throw Error(ErrorCode::too_few_peaks, "segmenting needs at least 2 peaks");
  std::vector<std::vector<double>> segments;
  segments.reserve(peaks.size() - 1);
  for (std::size_t k = 0; k + 1 < peaks.size(); ++k) {
    const std::size_t lo = peaks.indices[k];
    const std::size_t hi = peaks.indices[k + 1];
    if (hi <= lo || hi >= samples.size())
      throw Error(ErrorCode::invalid_argument, "peak indices must be increasing and inside the window");
    segments.emplace_back(samples.begin() + static_cast<std::ptrdiff_t>(lo),
                          samples.begin() + static_cast<std::ptrdiff_t>(hi));
  }
  return segments;
}

std::vector<std::vector<double>> segment_beats(const LabeledWindow& window, const RPeakList& peaks) {
  return segment_beats(window.ecg.samples(), peaks);
}

std::vector<double> resample_segment(std::span<const double> segment, int width) {
  if (segment.size() < 2) throw Error(ErrorCode::segment_too_short, "segment needs at least 2 samples");
  if (width < 2) throw Error(ErrorCode::invalid_argument, "resample width must be at least 2");
  const std::size_t last = segment.size() - 1;
  std::vector<double> out(static_cast<std::size_t>(width));
  for (int i = 0; i < width; ++i) {
    const double pos = static_cast<double>(i) * static_cast<double>(last) / static_cast<double>(width - 1);
    const auto left = std::min(static_cast<std::size_t>(pos), last - 1);
    const double frac = pos - static_cast<double>(left);
    out[static_cast<std::size_t>(i)] = segment[left] + frac * (segment[left + 1] - segment[left]);
  }
  out.front() = segment.front();
  out.back() = segment.back();
  return out;
}

BeatMatrix build_beat_matrix(const LabeledWindow& window, const RPeakList& peaks, int width) {
  if (peaks.size() < 3) throw Error(ErrorCode::too_few_peaks, "a beat matrix needs at least 2 complete R-R segments");
  const auto segments = segment_beats(window, peaks);
  BeatMatrix bm;
  bm.rows.resize(static_cast<Eigen::Index>(segments.size()), width);
  for (std::size_t r = 0; r < segments.size(); ++r) {
    const auto row = resample_segment(segments[r], width);
    for (int c = 0; c < width; ++c) bm.rows(static_cast<Eigen::Index>(r), c) = row[static_cast<std::size_t>(c)];
  }
  bm.rr_durations = rr_intervals(peaks, window.ecg.fs());
  return bm;
}

Matrix min_max_normalize(const Matrix& m) {
  const double lo = m.minCoeff();
  const double hi = m.maxCoeff();
  if (!(hi > lo)) return Matrix::Constant(m.rows(), m.cols(), 0.5);
  return (m.array() - lo) / (hi - lo);
}

Matrix resize_rows(const Matrix& m, int out_rows) {
  const Eigen::Index in_rows = m.rows();
  Matrix out(out_rows, m.cols());
  if (in_rows == 1) {
    out.rowwise() = m.row(0);
    return out;
  }
  for (int i = 0; i < out_rows; ++i) {
    const double pos =
        out_rows == 1 ? 0.0 : static_cast<double>(i) * static_cast<double>(in_rows - 1) / static_cast<double>(out_rows - 1);
    const auto top = std::min<Eigen::Index>(static_cast<Eigen::Index>(pos), in_rows - 2);
    const double frac = pos - static_cast<double>(top);
    out.row(i) = (1.0 - frac) * m.row(top) + frac * m.row(top + 1);
  }
  return out;
}

SignalImage to_signal_image(const BeatMatrix& matrix, StressLabel label) {
  if (matrix.rows.rows() < 2 || matrix.rows.cols() != kImageSize)
    throw Error(ErrorCode::shape_mismatch, "beat matrix must have at least 2 rows of width 116");
  Matrix img = resize_rows(min_max_normalize(matrix.rows), kImageSize).cwiseMax(0.0).cwiseMin(1.0);
  return SignalImage(std::move(img), Modality::spatial, label);
}

SignalImage window_to_image(const LabeledWindow& window) {
  const RPeakList peaks = detect_r_peaks(window);
  return to_signal_image(build_beat_matrix(window, peaks), window.label);
}

double sdnn(std::span<const double> rr) {
  if (rr.size() < 2) throw Error(ErrorCode::invalid_argument, "SDNN needs at least 2 intervals");
  const double mean = std::accumulate(rr.begin(), rr.end(), 0.0) / static_cast<double>(rr.size());
  double ss = 0.0;
  for (double v : rr) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(rr.size() - 1));
}

double rmssd(std::span<const double> rr) {
  if (rr.size() < 2) throw Error(ErrorCode::invalid_argument, "RMSSD needs at least 2 intervals");
  double ss = 0.0;
  for (std::size_t i = 1; i < rr.size(); ++i) ss += (rr[i] - rr[i - 1]) * (rr[i] - rr[i - 1]);
  return std::sqrt(ss / static_cast<double>(rr.size() - 1));
}

}  // namespace ecgf
