#include "brownne/idx.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <limits>

#include "brownne/error.hpp"

namespace brownne {

std::size_t IdxArray::stride() const {
  std::size_t s = 1;
  for (std::size_t i = 1; i < dims.size(); ++i) s *= dims[i];
  return s;
}

IdxArray parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw ParseError("IDX header is truncated", bytes.size());
  if (bytes[0] != 0 || bytes[1] != 0) throw ParseError("IDX magic must start with two zero bytes", bytes[0] != 0 ? 0 : 1);
  if (bytes[2] != 0x08) throw ParseError("IDX element type must be 0x08 (unsigned byte)", 2);
  const std::size_t ndim = bytes[3];
  if (ndim == 0) throw ParseError("IDX dimension count must be positive", 3);

  IdxArray out;
  std::size_t offset = 4;
  std::size_t total = 1;
  for (std::size_t d = 0; d < ndim; ++d) {
    if (bytes.size() < offset + 4) throw ParseError("IDX dimension list is truncated", bytes.size());
    const std::uint32_t dim = (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
                              (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
    if (dim != 0 && total > std::numeric_limits<std::size_t>::max() / dim) {
      throw ParseError("IDX dimensions overflow the addressable size", offset);
    }
    total *= dim;
    out.dims.push_back(dim);
    offset += 4;
  }
  const std::size_t available = bytes.size() - offset;
  if (available < total) {
    throw ParseError("IDX payload is truncated: expected " + std::to_string(total) + " bytes, found " +
                         std::to_string(available),
                     bytes.size());
  }
  if (available > total) {
    throw ParseError("IDX payload has " + std::to_string(available - total) + " trailing bytes", offset + total);
  }
  out.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset), bytes.end());
  return out;
}

IdxArray read_idx(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open IDX file '" + path + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_idx(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.offset());
  }
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  const auto images = read_idx(images_path);
  const auto labels = read_idx(labels_path);
  if (labels.dims.size() != 1) throw ParseError("label file '" + labels_path + "' must be one-dimensional", 3);
  if (images.count() != labels.count()) {
    throw ContractError("image count " + std::to_string(images.count()) + " does not match label count " +
                        std::to_string(labels.count()));
  }
  Dataset ds;
  const auto rows = static_cast<Eigen::Index>(images.count());
  const auto cols = static_cast<Eigen::Index>(images.stride());
  ds.features.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      ds.features(r, c) = images.data[static_cast<std::size_t>(r * cols + c)] / 255.0;
    }
  }
  ds.labels.assign(labels.data.begin(), labels.data.end());
  ds.class_count = ds.labels.empty() ? 0 : *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
  return ds;
}

}  // namespace brownne
