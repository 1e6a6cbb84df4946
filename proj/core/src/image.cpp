// SPDX-License-Identifier: Apache-2.0
#include "dpsim/image.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <string>

#include "binary_io.hpp"
#include "dpsim/error.hpp"

namespace dpsim {

Image Image::zeros(int width, int height, int channels) {
  if (width < 1 || height < 1 || channels < 1) throw InvalidArgument("image dimensions must be positive");
  Image img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.data.assign(static_cast<std::size_t>(width) * height * channels, 0.0);
  return img;
}

RgbdFrame make_rgbd(Image rgb, Image depth, double d_min, double d_max) {
  if (rgb.channels != 3) throw InvalidArgument("colour image must have 3 channels");
  if (depth.channels != 1) throw InvalidArgument("depth map must have 1 channel");
  if (rgb.width != depth.width || rgb.height != depth.height)
    throw InvalidArgument("colour and depth dimensions differ");
  if (!(d_min > 0.0) || !(d_max > d_min)) throw InvalidArgument("invalid depth range");
  RgbdFrame f;
  for (double& d : depth.data) {
    double c = std::isnan(d) ? d_max : std::clamp(d, d_min, d_max);
    if (c != d) ++f.clamped;
    d = c;
  }
  f.rgb = std::move(rgb);
  f.depth = std::move(depth);
  return f;
}

namespace {

// Header tokens separated by whitespace, '#' comments allowed in PNM.
class HeaderScanner {
 public:
  HeaderScanner(std::span<const std::uint8_t> b, bool comments) : b_(b), comments_(comments) {}

  std::string token() {
    skip_space();
    std::string t;
    while (pos_ < b_.size() && !std::isspace(b_[pos_])) t.push_back(static_cast<char>(b_[pos_++]));
    if (t.empty()) throw DataError("image header truncated");
    return t;
  }
  long integer() {
    const std::string t = token();
    long v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size()) throw DataError("bad image header field: " + t);
    return v;
  }
  double real() {
    const std::string t = token();
    double v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size()) throw DataError("bad image header field: " + t);
    return v;
  }
  // Exactly one whitespace byte ends the header.
  std::size_t payload_start() {
    if (pos_ >= b_.size() || !std::isspace(b_[pos_])) throw DataError("image header truncated");
    return pos_ + 1;
  }

 private:
  void skip_space() {
    while (pos_ < b_.size()) {
      if (std::isspace(b_[pos_])) {
        ++pos_;
      } else if (comments_ && b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> b_;
  bool comments_;
  std::size_t pos_ = 0;
};

void check_dims(long w, long h) {
  if (w < 1 || h < 1 || w > (1L << 20) || h > (1L << 20)) throw DataError("invalid image dimensions");
}

void append(std::vector<std::uint8_t>& out, const std::string& s) { out.insert(out.end(), s.begin(), s.end()); }

}  // namespace

std::vector<std::uint8_t> encode_pfm(const Image& img) {
  if (img.channels != 1 && img.channels != 3) throw InvalidArgument("PFM holds 1 or 3 channels");
  std::vector<std::uint8_t> out;
  append(out, std::string(img.channels == 3 ? "PF" : "Pf") + "\n" + std::to_string(img.width) + " " +
                  std::to_string(img.height) + "\n-1.0\n");
  out.reserve(out.size() + img.data.size() * 4);
  for (int y = img.height - 1; y >= 0; --y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(img.at(x, y, c)));
        for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(bits >> (8 * k)));
      }
  return out;
}

Image decode_pfm(std::span<const std::uint8_t> bytes) {
  HeaderScanner h(bytes, false);
  const std::string magic = h.token();
  int channels = 0;
  if (magic == "PF") channels = 3;
  else if (magic == "Pf") channels = 1;
  else throw DataError("not a PFM file");
  const long w = h.integer();
  const long ht = h.integer();
  check_dims(w, ht);
  const double scale = h.real();
  if (scale == 0.0 || !std::isfinite(scale)) throw DataError("PFM scale must be non-zero");
  const bool little = scale < 0.0;
  const std::size_t start = h.payload_start();
  Image img = Image::zeros(static_cast<int>(w), static_cast<int>(ht), channels);
  const std::size_t need = img.data.size() * 4;
  if (bytes.size() - start < need) throw DataError("PFM payload truncated");
  const std::uint8_t* p = bytes.data() + start;
  for (int y = img.height - 1; y >= 0; --y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < channels; ++c, p += 4) {
        std::uint32_t bits = 0;
        for (int k = 0; k < 4; ++k) {
          const int shift = little ? 8 * k : 8 * (3 - k);
          bits |= static_cast<std::uint32_t>(p[k]) << shift;
        }
        img.at(x, y, c) = std::bit_cast<float>(bits);
      }
  return img;
}

std::vector<std::uint8_t> encode_ppm(const Image& img) {
  if (img.channels != 1 && img.channels != 3) throw InvalidArgument("PPM holds 1 or 3 channels");
  std::vector<std::uint8_t> out;
  append(out, std::string(img.channels == 3 ? "P6" : "P5") + "\n" + std::to_string(img.width) + " " +
                  std::to_string(img.height) + "\n255\n");
  for (double v : img.data) {
    const double q = std::floor(std::clamp(std::isnan(v) ? 0.0 : v, 0.0, 1.0) * 255.0 + 0.5);
    out.push_back(static_cast<std::uint8_t>(q));
  }
  return out;
}

Image decode_ppm(std::span<const std::uint8_t> bytes) {
  HeaderScanner h(bytes, true);
  const std::string magic = h.token();
  int channels = 0;
  if (magic == "P6") channels = 3;
  else if (magic == "P5") channels = 1;
  else throw DataError("not a binary PPM/PGM file");
  const long w = h.integer();
  const long ht = h.integer();
  check_dims(w, ht);
  const long maxval = h.integer();
  if (maxval < 1 || maxval > 255) throw DataError("only 8-bit PPM is supported");
  const std::size_t start = h.payload_start();
  Image img = Image::zeros(static_cast<int>(w), static_cast<int>(ht), channels);
  if (bytes.size() - start < img.data.size()) throw DataError("PPM payload truncated");
  for (std::size_t k = 0; k < img.data.size(); ++k)
    img.data[k] = static_cast<double>(bytes[start + k]) / static_cast<double>(maxval);
  return img;
}

Image read_image(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path.string());
  if (bytes.size() < 2) throw DataError("image file too short: " + path.string());
  if (bytes[0] == 'P' && (bytes[1] == 'F' || bytes[1] == 'f')) return decode_pfm(bytes);
  if (bytes[0] == 'P' && (bytes[1] == '6' || bytes[1] == '5')) return decode_ppm(bytes);
  throw DataError("unrecognized image format: " + path.string());
}

void write_image(const std::filesystem::path& path, const Image& img) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pfm") {
    detail::write_file(path.string(), encode_pfm(img));
  } else if (ext == ".ppm" || ext == ".pgm") {
    detail::write_file(path.string(), encode_ppm(img));
  } else {
    throw InvalidArgument("unsupported image extension: " + ext);
  }
}

}  // namespace dpsim
