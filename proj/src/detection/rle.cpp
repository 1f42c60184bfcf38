#include "clonar/detection/rle.hpp"

#include "clonar/error.hpp"

namespace clonar::detection {

std::vector<std::uint32_t> rleEncode(const imaging::BinaryMask& mask) {
  std::vector<std::uint32_t> runs;
  bool current = false;
  std::uint32_t length = 0;
  for (const auto bit : mask.bits()) {
    const bool b = bit != 0;
    if (b != current) {
      runs.push_back(length);
      current = b;
      length = 0;
    }
    ++length;
  }
  runs.push_back(length);
  return runs;
}

imaging::BinaryMask rleDecode(std::span<const std::uint32_t> runs, int width, int height) {
  imaging::BinaryMask mask(width, height);
  const std::size_t total = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::size_t pos = 0;
  bool fill = false;
  for (const auto run : runs) {
    if (run > total - pos) {
      fail(ErrorCode::MalformedBackendResponse, "RLE runs overflow the frame");
    }
    if (fill) {
      for (std::size_t k = pos; k < pos + run; ++k) {
        mask.set(static_cast<int>(k % static_cast<std::size_t>(width)),
                 static_cast<int>(k / static_cast<std::size_t>(width)));
      }
    }
    pos += run;
    fill = !fill;
  }
  if (pos != total) {
    fail(ErrorCode::MalformedBackendResponse, "RLE runs do not cover the frame");
  }
  return mask;
}

}  // namespace clonar::detection
