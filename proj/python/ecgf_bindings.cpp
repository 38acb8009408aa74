#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ecgf/error.hpp"
#include "ecgf/fusion.hpp"
#include "ecgf/imaging.hpp"
#include "ecgf/rpeak.hpp"
#include "ecgf/synth.hpp"
#include "ecgf/transforms.hpp"

namespace py = pybind11;
using namespace ecgf;

namespace {

LabeledWindow make_window(std::vector<double> samples, double fs, int level) {
  return LabeledWindow{EcgRecord(std::move(samples), fs), StressLabel(level), 0};
}

GaborParams gabor_params(double sigma, double freq, double omega, double theta, double amplitude, int support) {
  GaborParams p{sigma, freq, omega, theta, amplitude, support};
  p.validate();
  return p;
}

}  // namespace

PYBIND11_MODULE(_ecgf, m) {
  m.doc() = "ECG stress-level imaging, transforms and fusion";
  m.attr("IMAGE_SIZE") = kImageSize;
  m.attr("CLASS_COUNT") = kClassCount;

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  m.def(
      "synthesize",
      [](int level, std::uint64_t stream) {
        const auto w = generate(SynthProfile::defaults(), StressLabel(level), stream);
        const auto s = w.window.ecg.samples();
        return py::make_tuple(std::vector<double>(s.begin(), s.end()), w.truth.indices);
      },
      py::arg("level"), py::arg("stream") = 0,
      "30 s synthetic window for a stress level. Returns (samples, r_peak_indices).");

  m.def(
      "detect_r_peaks",
      [](const std::vector<double>& samples, double fs) { return detect_r_peaks(samples, fs).indices; },
      py::arg("samples"), py::arg("fs") = kDefaultFs);

  m.def(
      "rr_intervals", [](std::vector<std::size_t> peaks, double fs) { return rr_intervals(RPeakList{std::move(peaks)}, fs); },
      py::arg("peaks"), py::arg("fs") = kDefaultFs);

  m.def("sdnn", [](const std::vector<double>& rr) { return sdnn(rr); });
  m.def("rmssd", [](const std::vector<double>& rr) { return rmssd(rr); });

  m.def(
      "signal_image",
      [](std::vector<double> samples, double fs, int level) {
        return window_to_image(make_window(std::move(samples), fs, level)).pixels();
      },
      py::arg("samples"), py::arg("fs") = kDefaultFs, py::arg("level") = 0,
      "116x116 spatial image of a window, pixels in [0, 1].");

  m.def("dft2", [](const Matrix& image) { return dft2(image); }, py::arg("image"));

  m.def(
      "dft_image",
      [](const Matrix& image) { return dft_transform(SignalImage(image, Modality::spatial, StressLabel(0))).pixels(); },
      py::arg("image"));

  m.def(
      "gabor_kernel",
      [](double sigma, double freq, double omega, double theta, double amplitude, int support) {
        return gabor_kernel(gabor_params(sigma, freq, omega, theta, amplitude, support));
      },
      py::arg("sigma") = 0.1, py::arg("freq") = 0.1, py::arg("omega") = 0.0, py::arg("theta") = 0.0,
      py::arg("amplitude") = 1.0, py::arg("support") = 31);

  m.def(
      "gabor_image",
      [](const Matrix& image, double sigma, double freq, double omega, double theta, double amplitude, int support) {
        const auto p = gabor_params(sigma, freq, omega, theta, amplitude, support);
        return gabor_transform(SignalImage(image, Modality::spatial, StressLabel(0)), p).pixels();
      },
      py::arg("image"), py::arg("sigma") = 0.1, py::arg("freq") = 0.1, py::arg("omega") = 0.0,
      py::arg("theta") = 0.0, py::arg("amplitude") = 1.0, py::arg("support") = 31);

  m.def(
      "fuse",
      [](const std::array<std::array<double, kClassCount>, 3>& scores, const std::string& method,
         std::optional<std::array<double, 3>> weights) {
        std::array<ScoreVector, 3> sv;
        for (std::size_t i = 0; i < 3; ++i) sv[i].probs = scores[i];
        const FusionPolicy policy{parse_fusion_method(method), weights};
        return fuse(sv, policy).probs;
      },
      py::arg("scores"), py::arg("method") = "mean", py::arg("weights") = std::nullopt,
      "Fuse spatial, dft and gabor probability vectors.");
}
