#include "ecgf/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "ecgf/error.hpp"

namespace ecgf {

namespace {

std::vector<std::uint8_t> to_bytes(const Matrix& pixels) {
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(pixels.size()));
  for (Eigen::Index i = 0; i < pixels.size(); ++i) {
    const double v = std::clamp(pixels.data()[i], 0.0, 1.0);
    bytes[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::lround(255.0 * v));
  }
  return bytes;
}

Matrix from_bytes(const std::uint8_t* bytes, int rows, int cols, double maxval) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = bytes[i] / maxval;
  return m;
}

bool is_png(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".png";
}

void write_pgm(const Matrix& pixels, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::unwritable_path, "cannot write " + path.string());
  out << "P5\n" << pixels.cols() << ' ' << pixels.rows() << "\n255\n";
  const auto bytes = to_bytes(pixels);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::unwritable_path, "failed writing " + path.string());
}

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string token;
  char c = 0;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(c);
  }
  return token;
}

Matrix read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::missing_file, "cannot open " + path.string());
  if (next_token(in) != "P5") throw Error(ErrorCode::bad_magic, path.string() + " is not a binary PGM");
  int cols = 0, rows = 0, maxval = 0;
  try {
    cols = std::stoi(next_token(in));
    rows = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw Error(ErrorCode::malformed_row, path.string() + ": bad PGM header");
  }
  if (cols <= 0 || rows <= 0 || maxval <= 0 || maxval > 255)
    throw Error(ErrorCode::malformed_row, path.string() + ": unsupported PGM header");
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw Error(ErrorCode::truncated_file, path.string() + ": pixel data truncated", static_cast<std::uint64_t>(in.gcount()));
  return from_bytes(bytes.data(), rows, cols, maxval);
}

void write_png(const Matrix& pixels, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(pixels.cols());
  image.height = static_cast<png_uint_32>(pixels.rows());
  image.format = PNG_FORMAT_GRAY;
  const auto bytes = to_bytes(pixels);
  if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0, nullptr))
    throw Error(ErrorCode::unwritable_path, "cannot write " + path.string() + ": " + image.message);
}

Matrix read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw Error(ErrorCode::missing_file, "cannot read " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, bytes.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorCode::malformed_row, "cannot decode " + path.string());
  }
  return from_bytes(bytes.data(), static_cast<int>(image.height), static_cast<int>(image.width), 255.0);
}

}  // namespace

void write_image(const Matrix& pixels, const std::filesystem::path& path) {
  if (is_png(path)) write_png(pixels, path);
  else write_pgm(pixels, path);
}

Matrix read_image(const std::filesystem::path& path) { return is_png(path) ? read_png(path) : read_pgm(path); }

std::string image_filename(const std::string& subject, std::size_t window, Modality modality, StressLabel label,
                           const std::string& ext) {
  std::ostringstream name;
  name << subject << '_' << window << '_' << to_string(modality) << '_' << label.level() << '.' << ext;
  return name.str();
}

}  // namespace ecgf
