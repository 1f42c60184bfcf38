#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "clonar/imaging/raster.hpp"

namespace clonar::detection {

/// Row-major run lengths alternating background/foreground, starting with a
/// (possibly zero) background run. Runs sum to width*height.
std::vector<std::uint32_t> rleEncode(const imaging::BinaryMask& mask);

/// Throws MalformedBackendResponse when the runs do not tile the frame.
imaging::BinaryMask rleDecode(std::span<const std::uint32_t> runs, int width, int height);

}  // namespace clonar::detection
