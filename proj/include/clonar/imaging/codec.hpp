#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clonar/imaging/raster.hpp"

namespace clonar::imaging {

/// 8-bit RGBA, non-interlaced. Throws EncodingFailure.
std::vector<std::uint8_t> encodePng(const RasterImage& img);

/// Any PNG libpng understands, converted to RGBA8. Throws MalformedImage.
RasterImage decodePng(std::span<const std::uint8_t> bytes);

/// RFC 4648 standard alphabet with '=' padding.
std::string base64Encode(std::span<const std::uint8_t> bytes);

/// Strict decode: rejects characters outside the alphabet and bad padding.
/// Throws InvalidArgument.
std::vector<std::uint8_t> base64Decode(std::string_view text);

}  // namespace clonar::imaging
