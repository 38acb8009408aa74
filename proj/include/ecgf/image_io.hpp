#pragma once

#include <filesystem>
#include <string>

#include "ecgf/imaging.hpp"

namespace ecgf {

/// 8-bit grayscale, pixel byte = round(255 * value). Values are clamped to
/// [0,1] first. The format follows the extension: .pgm (binary P5) or .png.
void write_image(const Matrix& pixels, const std::filesystem::path& path);

/// Reads .pgm (P5, maxval <= 255) or .png as values in [0,1].
Matrix read_image(const std::filesystem::path& path);

/// `<subject>_<window>_<modality>_<label>.<ext>`
std::string image_filename(const std::string& subject, std::size_t window, Modality modality, StressLabel label,
                           const std::string& ext = "pgm");

}  // namespace ecgf
