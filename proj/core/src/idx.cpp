#include "cidal/idx.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

namespace cidal {

namespace {

std::string hex(std::uint32_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_++];
    return v;
  }

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t offset() const { return pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n)
      throw ParseError("IDX truncated at offset " + std::to_string(pos_) + ": expected " + std::to_string(n) +
                       " bytes of " + what + ", " + std::to_string(bytes_.size() - pos_) + " available");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void expect_magic(Reader& r, std::uint32_t want) {
  const std::uint32_t got = r.u32("magic");
  if (got != want) throw ParseError("IDX bad magic at offset 0: expected " + hex(want) + ", got " + hex(got));
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Matrix parse_idx_images(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  expect_magic(r, kIdxImageMagic);
  const std::uint32_t count = r.u32("image count");
  const std::uint32_t rows = r.u32("row count");
  const std::uint32_t cols = r.u32("column count");
  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  const auto data = r.take(static_cast<std::size_t>(count) * pixels, "pixel data");
  Matrix out(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(pixels));
  for (std::size_t i = 0; i < data.size(); ++i) out.data()[i] = data[i] / 255.0;
  return out;
}

Labels parse_idx_labels(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  expect_magic(r, kIdxLabelMagic);
  const std::uint32_t count = r.u32("label count");
  const auto data = r.take(count, "label data");
  return Labels(data.begin(), data.end());
}

Domain load_idx(const std::string& images_path, const std::string& labels_path) {
  const auto image_bytes = read_file(images_path);
  const auto label_bytes = read_file(labels_path);
  Domain d;
  try {
    d.inputs = parse_idx_images(image_bytes);
  } catch (const ParseError& e) {
    throw ParseError(images_path + ": " + e.what());
  }
  try {
    d.labels = parse_idx_labels(label_bytes);
  } catch (const ParseError& e) {
    throw ParseError(labels_path + ": " + e.what());
  }
  if (static_cast<Eigen::Index>(d.labels->size()) != d.inputs.rows())
    throw ParseError(labels_path + ": label count " + std::to_string(d.labels->size()) +
                     " does not match image count " + std::to_string(d.inputs.rows()) + " (offset 4)");
  d.name = std::filesystem::path(images_path).filename().string();
  return d;
}

}  // namespace cidal
