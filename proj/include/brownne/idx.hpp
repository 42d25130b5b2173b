#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "brownne/mlp.hpp"

namespace brownne {

/// Decoded IDX file: big-endian u32 dimensions and the raw unsigned-byte payload.
struct IdxArray {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;

  std::size_t count() const { return dims.empty() ? 0 : dims.front(); }
  /// Elements per leading index (784 for 28x28 images, 1 for labels).
  std::size_t stride() const;
};

/// Parses bytes laid out as 00 00 08 <ndim> <dims...> <payload>. Only the
/// unsigned-byte element type is accepted. Errors name the byte offset.
IdxArray parse_idx(std::span<const std::uint8_t> bytes);

IdxArray read_idx(const std::string& path);

/// Images scaled to [0, 1], one row per image; class_count = max label + 1.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

}  // namespace brownne
