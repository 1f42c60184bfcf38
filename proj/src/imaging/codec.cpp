#include "clonar/imaging/codec.hpp"

#include <png.h>

#include <array>
#include <cstring>

#include "clonar/error.hpp"

namespace clonar::imaging {

namespace {

// RAII over the simplified libpng API.
struct PngImage {
  png_image image{};
  PngImage() {
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

}  // namespace

std::vector<std::uint8_t> encodePng(const RasterImage& img) {
  if (img.empty()) fail(ErrorCode::EncodingFailure, "cannot encode an empty raster");
  PngImage png;
  png.image.width = static_cast<png_uint_32>(img.width());
  png.image.height = static_cast<png_uint_32>(img.height());
  png.image.format = PNG_FORMAT_RGBA;

  const void* buffer = img.pixels().data();
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png.image, nullptr, &size, 0, buffer, 0, nullptr)) {
    fail(ErrorCode::EncodingFailure, std::string("png sizing failed: ") + png.image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png.image, out.data(), &size, 0, buffer, 0, nullptr)) {
    fail(ErrorCode::EncodingFailure, std::string("png encode failed: ") + png.image.message);
  }
  out.resize(size);
  return out;
}

RasterImage decodePng(std::span<const std::uint8_t> bytes) {
  static constexpr std::array<std::uint8_t, 8> kSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() < kSignature.size() ||
      !std::equal(kSignature.begin(), kSignature.end(), bytes.begin())) {
    fail(ErrorCode::MalformedImage, "missing PNG signature");
  }
  PngImage png;
  if (!png_image_begin_read_from_memory(&png.image, bytes.data(), bytes.size())) {
    fail(ErrorCode::MalformedImage, std::string("png header: ") + png.image.message);
  }
  png.image.format = PNG_FORMAT_RGBA;
  const int w = static_cast<int>(png.image.width);
  const int h = static_cast<int>(png.image.height);
  if (w <= 0 || h <= 0 || static_cast<long long>(w) * h > (1LL << 28)) {
    fail(ErrorCode::MalformedImage, "unsupported PNG dimensions");
  }
  std::vector<Rgba> pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  if (!png_image_finish_read(&png.image, nullptr, pixels.data(), 0, nullptr)) {
    fail(ErrorCode::MalformedImage, std::string("png decode: ") + png.image.message);
  }
  return RasterImage(w, h, std::move(pixels));
}

std::string base64Encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const unsigned v = (unsigned{bytes[i]} << 16) | (unsigned{bytes[i + 1]} << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const unsigned v = unsigned{bytes[i]} << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const unsigned v = (unsigned{bytes[i]} << 16) | (unsigned{bytes[i + 1]} << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64Decode(std::string_view text) {
  static const auto kReverse = [] {
    std::array<int, 256> table{};
    table.fill(-1);
    for (int i = 0; i < 64; ++i) table[static_cast<unsigned char>(kAlphabet[i])] = i;
    return table;
  }();

  if (text.size() % 4 != 0) fail(ErrorCode::InvalidArgument, "base64 length not a multiple of 4");
  std::size_t padding = 0;
  if (!text.empty() && text.back() == '=') ++padding;
  if (text.size() >= 2 && text[text.size() - 2] == '=') ++padding;

  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    unsigned v = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const char c = text[i + k];
      const bool inPadding = i + 4 == text.size() && k >= 4 - padding;
      int d = 0;
      if (inPadding) {
        if (c != '=') fail(ErrorCode::InvalidArgument, "bad base64 padding");
      } else {
        d = kReverse[static_cast<unsigned char>(c)];
        if (d < 0) fail(ErrorCode::InvalidArgument, "invalid base64 character");
      }
      v = (v << 6) | static_cast<unsigned>(d);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
  }
  out.resize(out.size() - padding);
  return out;
}

}  // namespace clonar::imaging
