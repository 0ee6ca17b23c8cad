#include "boltrot/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace boltrot {
namespace fs = std::filesystem;

namespace {

enum class Format { Pgm, Ppm, Png };

Format format_of(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pgm") return Format::Pgm;
  if (ext == ".ppm") return Format::Ppm;
  if (ext == ".png") return Format::Png;
  throw IoError("unsupported image extension '" + ext + "'", path.string());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

// Parses a binary netpbm header; returns the offset of the first pixel byte.
std::size_t parse_netpbm(const std::string& buf, const char* magic, int& w, int& h, const fs::path& path) {
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < buf.size()) {
      if (buf[pos] == '#') {
        while (pos < buf.size() && buf[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(buf[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&] {
    skip_ws();
    int v = 0;
    bool any = false;
    while (pos < buf.size() && std::isdigit(static_cast<unsigned char>(buf[pos]))) {
      v = v * 10 + (buf[pos++] - '0');
      any = true;
    }
    if (!any) throw IoError("malformed netpbm header", path.string());
    return v;
  };
  if (buf.size() < 2 || buf.compare(0, 2, magic) != 0)
    throw IoError(std::string("expected netpbm magic ") + magic, path.string());
  pos = 2;
  w = read_int();
  h = read_int();
  const int maxval = read_int();
  if (maxval != 255) throw IoError("only 8-bit netpbm files are supported", path.string());
  if (w < 1 || h < 1) throw IoError("invalid netpbm dimensions", path.string());
  ++pos;  // single whitespace byte before the raster
  return pos;
}

std::vector<std::uint8_t> read_png(const fs::path& path, bool rgb, int& w, int& h) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw IoError(std::string("cannot read png: ") + image.message, path.string());
  image.format = rgb ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError(std::string("cannot decode png: ") + image.message, path.string());
  }
  w = static_cast<int>(image.width);
  h = static_cast<int>(image.height);
  return buf;
}

fs::path temp_sibling(const fs::path& path) { return path.string() + ".tmp"; }

void commit(const fs::path& tmp, const fs::path& path) {
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message(), path.string());
}

void write_raw(const fs::path& path, Format fmt, int w, int h, const std::vector<std::uint8_t>& bytes) {
  const fs::path tmp = temp_sibling(path);
  if (fmt == Format::Png) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(w);
    image.height = static_cast<png_uint_32>(h);
    image.format = bytes.size() == static_cast<std::size_t>(w) * h ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, tmp.c_str(), 0, bytes.data(), 0, nullptr))
      throw IoError(std::string("cannot write png: ") + image.message, path.string());
  } else {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing", path.string());
    out << (fmt == Format::Pgm ? "P5" : "P6") << '\n' << w << ' ' << h << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write", path.string());
  }
  commit(tmp, path);
}

}  // namespace

std::uint8_t to_u8(double v) noexcept {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

GrayImage read_gray(const fs::path& path) {
  const Format fmt = format_of(path);
  if (fmt == Format::Ppm) return to_grayscale(read_rgb(path));
  int w = 0, h = 0;
  std::vector<std::uint8_t> bytes;
  if (fmt == Format::Png) {
    bytes = read_png(path, false, w, h);
  } else {
    const std::string buf = slurp(path);
    const std::size_t off = parse_netpbm(buf, "P5", w, h, path);
    if (buf.size() < off + static_cast<std::size_t>(w) * h) throw IoError("truncated pgm raster", path.string());
    bytes.assign(buf.begin() + static_cast<std::ptrdiff_t>(off),
                 buf.begin() + static_cast<std::ptrdiff_t>(off + static_cast<std::size_t>(w) * h));
  }
  GrayImage img(w, h);
  auto dst = img.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = bytes[i] / 255.0;
  return img;
}

RgbImage read_rgb(const fs::path& path) {
  const Format fmt = format_of(path);
  int w = 0, h = 0;
  std::vector<std::uint8_t> bytes;
  if (fmt == Format::Png) {
    bytes = read_png(path, true, w, h);
  } else if (fmt == Format::Ppm) {
    const std::string buf = slurp(path);
    const std::size_t off = parse_netpbm(buf, "P6", w, h, path);
    const std::size_t n = static_cast<std::size_t>(w) * h * 3;
    if (buf.size() < off + n) throw IoError("truncated ppm raster", path.string());
    bytes.assign(buf.begin() + static_cast<std::ptrdiff_t>(off),
                 buf.begin() + static_cast<std::ptrdiff_t>(off + n));
  } else {
    const GrayImage g = read_gray(path);
    RgbImage out(g.width(), g.height());
    auto src = g.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) {
      const auto v = to_u8(src[i]);
      dst[i] = {v, v, v};
    }
    return out;
  }
  RgbImage img(w, h);
  auto dst = img.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = {bytes[3 * i], bytes[3 * i + 1], bytes[3 * i + 2]};
  return img;
}

void write_gray(const fs::path& path, const GrayImage& img) {
  const Format fmt = format_of(path);
  if (fmt == Format::Ppm) throw IoError("grayscale images are written as .pgm or .png", path.string());
  std::vector<std::uint8_t> bytes(img.size());
  auto src = img.pixels();
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_u8(src[i]);
  write_raw(path, fmt, img.width(), img.height(), bytes);
}

void write_rgb(const fs::path& path, const RgbImage& img) {
  const Format fmt = format_of(path);
  if (fmt == Format::Pgm) throw IoError("colour images are written as .ppm or .png", path.string());
  std::vector<std::uint8_t> bytes;
  bytes.reserve(img.size() * 3);
  for (const Rgb& px : img.pixels()) {
    bytes.push_back(px.r);
    bytes.push_back(px.g);
    bytes.push_back(px.b);
  }
  write_raw(path, fmt, img.width(), img.height(), bytes);
}

void write_binary(const fs::path& path, const BinaryImage& img) {
  GrayImage g(img.width(), img.height());
  auto src = img.pixels();
  auto dst = g.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 1.0 : 0.0;
  write_gray(path, g);
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  const fs::path tmp = temp_sibling(path);
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing", path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("short write", path.string());
  }
  commit(tmp, path);
}

}  // namespace boltrot
