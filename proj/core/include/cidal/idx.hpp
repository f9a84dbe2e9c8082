#pragma once

// IDX (MNIST-style) reader. All header integers are big-endian.
//
//   images: 0x00000803, count, rows, cols, then count*rows*cols unsigned bytes
//   labels: 0x00000801, count, then count unsigned bytes

#include <cstdint>
#include <span>
#include <string>

#include "cidal/common.hpp"
#include "cidal/data.hpp"

namespace cidal {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

// One image per row, pixels scaled to [0, 1]. Errors name the byte offset.
Matrix parse_idx_images(std::span<const std::uint8_t> bytes);
Labels parse_idx_labels(std::span<const std::uint8_t> bytes);

Domain load_idx(const std::string& images_path, const std::string& labels_path);

}  // namespace cidal
