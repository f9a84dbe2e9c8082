#include <gtest/gtest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "cidal/idx.hpp"

using namespace cidal;

namespace {

using Bytes = std::vector<std::uint8_t>;

void put_u32(Bytes& b, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<std::uint8_t>(v >> s));
}

Bytes image_file(std::uint32_t count, std::uint32_t rows, std::uint32_t cols, const Bytes& pixels) {
  Bytes b;
  put_u32(b, kIdxImageMagic);
  put_u32(b, count);
  put_u32(b, rows);
  put_u32(b, cols);
  b.insert(b.end(), pixels.begin(), pixels.end());
  return b;
}

Bytes label_file(const Bytes& labels) {
  Bytes b;
  put_u32(b, kIdxLabelMagic);
  put_u32(b, static_cast<std::uint32_t>(labels.size()));
  b.insert(b.end(), labels.begin(), labels.end());
  return b;
}

std::string write_temp(const std::string& name, const Bytes& b) {
  const auto path = std::filesystem::temp_directory_path() / ("cidal_idx_" + name);
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  return path.string();
}

std::string message_of(const Bytes& b) {
  try {
    parse_idx_images(b);
  } catch (const ParseError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Idx, TwoByTwoImage) {
  const Matrix m = parse_idx_images(image_file(1, 2, 2, {0, 128, 255, 64}));
  ASSERT_EQ(m.rows(), 1);
  ASSERT_EQ(m.cols(), 4);
  EXPECT_EQ(m(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(m(0, 1), 128.0 / 255.0);
  EXPECT_EQ(m(0, 2), 1.0);
  EXPECT_DOUBLE_EQ(m(0, 3), 64.0 / 255.0);
}

TEST(Idx, Labels) {
  EXPECT_EQ(parse_idx_labels(label_file({3, 0, 9})), (Labels{3, 0, 9}));
}

TEST(Idx, EmptyInputFailsAtOffsetZero) {
  const std::string msg = message_of({});
  EXPECT_NE(msg.find("offset 0"), std::string::npos) << msg;
}

TEST(Idx, BadMagic) {
  Bytes b = image_file(1, 1, 1, {5});
  b[3] = 0x01;
  const std::string msg = message_of(b);
  EXPECT_NE(msg.find("magic"), std::string::npos) << msg;
  EXPECT_THROW(parse_idx_labels(image_file(1, 1, 1, {5})), ParseError);
}

TEST(Idx, TruncatedPixels) {
  const std::string msg = message_of(image_file(2, 2, 2, {1, 2, 3, 4, 5}));
  EXPECT_NE(msg.find("truncated"), std::string::npos) << msg;
}

TEST(Idx, LoadDomainFromFiles) {
  const auto img = write_temp("img", image_file(2, 1, 2, {0, 255, 255, 0}));
  const auto lab = write_temp("lab", label_file({1, 0}));
  const Domain d = load_idx(img, lab);
  EXPECT_EQ(d.size(), 2);
  EXPECT_EQ(d.width(), 2);
  EXPECT_EQ(*d.labels, (Labels{1, 0}));
}

TEST(Idx, CountMismatchRejected) {
  const auto img = write_temp("img2", image_file(2, 1, 1, {0, 1}));
  const auto lab = write_temp("lab2", label_file({1, 0, 1}));
  EXPECT_THROW(load_idx(img, lab), ParseError);
  EXPECT_THROW(load_idx("/nonexistent/cidal.idx", lab), IoError);
}
