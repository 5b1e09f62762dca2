#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deepfeat/errors.hpp"

namespace deepfeat {

// Little-endian binary reader over a fully loaded file. Tracks the byte
// offset so truncation and corruption errors can point at the exact spot.
class BinaryReader {
 public:
  explicit BinaryReader(const std::string& path);
  BinaryReader(std::vector<std::uint8_t> bytes, std::string name);

  std::uint8_t u8();
  std::uint32_t u32();
  float f32();
  double f64();
  void f32_array(float* out, std::size_t count);
  void f64_array(double* out, std::size_t count);

  // Checks a 4-byte magic. A file whose first three bytes match but whose
  // version digit differs is reported as a version mismatch, anything else
  // as bad magic.
  void expect_magic(const char expected[4], const char* format_name);

  // Fails if any bytes remain unconsumed.
  void expect_end(const char* format_name);

  std::uint64_t offset() const { return pos_; }
  std::uint64_t size() const { return bytes_.size(); }
  std::uint64_t remaining() const { return bytes_.size() - pos_; }
  const std::string& name() const { return name_; }

 private:
  void require(std::size_t count);

  std::vector<std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::string name_;
};

// Buffers the whole file in memory and commits it atomically
// (write to a temporary sibling, then rename).
class BinaryWriter {
 public:
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void f32(float v);
  void f64(double v);
  void f32_array(const float* data, std::size_t count);
  void f64_array(const double* data, std::size_t count);
  void magic(const char m[4]);

  void commit(const std::string& path);
  const std::vector<std::uint8_t>& bytes() const { return buffer_; }

 private:
  std::vector<std::uint8_t> buffer_;
};

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void atomic_write_bytes(const std::string& path,
                        const std::vector<std::uint8_t>& bytes);
void atomic_write_text(const std::string& path, const std::string& text);

// FNV-1a 64-bit, used for feature-file fingerprints stored in SVM models.
std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t count);
std::uint64_t fnv1a64_file(const std::string& path);
std::string to_hex(std::uint64_t value);

}  // namespace deepfeat
