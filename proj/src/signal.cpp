#include "ecgf/signal.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ecgf/error.hpp"

namespace ecgf {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::missing_file, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::unwritable_path, "cannot write " + path.string());
  return out;
}

}  // namespace

StressLabel::StressLabel(int level) : level_(level) {
  if (level < 0 || level >= kClassCount)
    throw Error(ErrorCode::invalid_argument, "stress level must be in 0..4, got " + std::to_string(level));
}

std::string_view StressLabel::name() const noexcept { return kStressLabelNames[static_cast<std::size_t>(level_)]; }

EcgRecord::EcgRecord(std::vector<double> samples, double fs, std::string subject_id)
    : samples_(std::move(samples)), fs_(fs), subject_id_(std::move(subject_id)) {
  if (!(fs_ > 0.0) || !std::isfinite(fs_)) throw Error(ErrorCode::invalid_argument, "sampling rate must be positive");
  if (samples_.empty()) throw Error(ErrorCode::empty_input, "ECG record has no samples");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i]))
      throw Error(ErrorCode::non_finite_sample, "sample " + std::to_string(i) + " is not finite", i);
  }
}

std::size_t window_length(double fs) { return static_cast<std::size_t>(std::llround(kWindowSeconds * fs)); }

EcgRecord load_ecg(const std::filesystem::path& path, double fs, std::string subject_id) {
  auto in = open_input(path);
  std::vector<double> samples;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view row = trim(line);
    if (row.empty()) continue;
    auto comma = row.find(',');
    std::uint64_t index = 0;
    double value = 0.0;
    if (comma == std::string_view::npos || !parse_number(row.substr(0, comma), index) ||
        !parse_number(row.substr(comma + 1), value)) {
      throw Error(ErrorCode::malformed_row, path.string() + ": malformed row at line " + std::to_string(line_no),
                  line_no);
    }
    if (!std::isfinite(value))
      throw Error(ErrorCode::non_finite_sample, path.string() + ": non-finite value at line " + std::to_string(line_no),
                  line_no);
    samples.push_back(value);
  }
  if (samples.empty()) throw Error(ErrorCode::empty_input, path.string() + " contains no samples");
  if (subject_id.empty()) subject_id = path.stem().string();
  return EcgRecord(std::move(samples), fs, std::move(subject_id));
}

void save_ecg(const EcgRecord& record, const std::filesystem::path& path) {
  auto out = open_output(path);
  std::string buffer;
  char num[64];
  const auto samples = record.samples();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto r1 = std::to_chars(num, num + sizeof num, i);
    buffer.append(num, r1.ptr);
    buffer.push_back(',');
    auto r2 = std::to_chars(num, num + sizeof num, samples[i]);
    buffer.append(num, r2.ptr);
    buffer.push_back('\n');
  }
  out << buffer;
  if (!out) throw Error(ErrorCode::unwritable_path, "failed writing " + path.string());
}

std::vector<StressLabel> load_labels(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<StressLabel> labels;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view row = trim(line);
    if (row.empty()) continue;
    int level = -1;
    if (!parse_number(row, level) || level < 0 || level >= kClassCount)
      throw Error(ErrorCode::malformed_row, path.string() + ": bad label at line " + std::to_string(line_no), line_no);
    labels.emplace_back(level);
  }
  if (labels.empty()) throw Error(ErrorCode::empty_input, path.string() + " contains no labels");
  return labels;
}

void save_labels(std::span<const StressLabel> labels, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const auto& l : labels) out << l.level() << '\n';
  if (!out) throw Error(ErrorCode::unwritable_path, "failed writing " + path.string());
}

std::vector<LabeledWindow> windowize(const EcgRecord& ecg, std::span<const StressLabel> labels) {
  const std::size_t len = window_length(ecg.fs());
  const std::size_t count = ecg.size() / len;
  if (count == 0)
    throw Error(ErrorCode::record_too_short, "record of " + std::to_string(ecg.duration()) + " s is shorter than one window");
  if (labels.size() != count)
    throw Error(ErrorCode::label_count_mismatch,
                "expected " + std::to_string(count) + " labels, got " + std::to_string(labels.size()));

  std::vector<LabeledWindow> windows;
  windows.reserve(count);
  const auto samples = ecg.samples();
  for (std::size_t k = 0; k < count; ++k) {
    auto slice = samples.subspan(k * len, len);
    windows.push_back(LabeledWindow{EcgRecord({slice.begin(), slice.end()}, ecg.fs(), ecg.subject_id()), labels[k], k});
  }
  return windows;
}

}  // namespace ecgf
