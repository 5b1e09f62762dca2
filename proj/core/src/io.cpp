#include "deepfeat/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace deepfeat {

namespace {

// All on-disk formats are little-endian. On a little-endian host the
// byte image already matches; otherwise swap per element.
template <typename T>
T load_le(const std::uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    auto raw = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(v);
    std::reverse(raw.begin(), raw.end());
    v = std::bit_cast<T>(raw);
  }
  return v;
}

template <typename T>
void store_le(std::vector<std::uint8_t>& out, T v) {
  auto raw = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(v);
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(raw.begin(), raw.end());
  }
  out.insert(out.end(), raw.begin(), raw.end());
}

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open " + path);
  }
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(size);
  if (size > 0) {
    in.read(reinterpret_cast<char*>(bytes.data()),
            static_cast<std::streamsize>(size));
  }
  if (!in) {
    throw FormatError("short read on " + path);
  }
  return bytes;
}

BinaryReader::BinaryReader(const std::string& path)
    : bytes_(read_file_bytes(path)), name_(path) {}

BinaryReader::BinaryReader(std::vector<std::uint8_t> bytes, std::string name)
    : bytes_(std::move(bytes)), name_(std::move(name)) {}

void BinaryReader::require(std::size_t count) {
  if (pos_ + count > bytes_.size()) {
    throw FormatError(name_ + ": truncated, needed " + std::to_string(count) +
                          " bytes at offset " + std::to_string(pos_) +
                          " but only " + std::to_string(remaining()) +
                          " remain",
                      pos_);
  }
}

std::uint8_t BinaryReader::u8() {
  require(1);
  return bytes_[pos_++];
}

std::uint32_t BinaryReader::u32() {
  require(4);
  auto v = load_le<std::uint32_t>(bytes_.data() + pos_);
  pos_ += 4;
  return v;
}

float BinaryReader::f32() {
  require(4);
  auto v = load_le<float>(bytes_.data() + pos_);
  pos_ += 4;
  return v;
}

double BinaryReader::f64() {
  require(8);
  auto v = load_le<double>(bytes_.data() + pos_);
  pos_ += 8;
  return v;
}

void BinaryReader::f32_array(float* out, std::size_t count) {
  require(count * 4);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = load_le<float>(bytes_.data() + pos_ + 4 * i);
  }
  pos_ += count * 4;
}

void BinaryReader::f64_array(double* out, std::size_t count) {
  require(count * 8);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = load_le<double>(bytes_.data() + pos_ + 8 * i);
  }
  pos_ += count * 8;
}

void BinaryReader::expect_magic(const char expected[4],
                                const char* format_name) {
  require(4);
  const char* got = reinterpret_cast<const char*>(bytes_.data() + pos_);
  if (std::memcmp(got, expected, 4) == 0) {
    pos_ += 4;
    return;
  }
  const std::string found(got, got + 4);
  if (std::memcmp(got, expected, 3) == 0) {
    throw FormatError(name_ + ": unsupported " + format_name + " version \"" +
                          found + "\", expected \"" +
                          std::string(expected, expected + 4) + "\"",
                      pos_);
  }
  throw FormatError(name_ + ": bad magic \"" + found + "\", not a " +
                        format_name + " file",
                    pos_);
}

void BinaryReader::expect_end(const char* format_name) {
  if (pos_ != bytes_.size()) {
    throw FormatError(name_ + ": " + std::to_string(remaining()) +
                          " trailing bytes after " + format_name + " payload",
                      pos_);
  }
}

void BinaryWriter::u8(std::uint8_t v) { buffer_.push_back(v); }
void BinaryWriter::u32(std::uint32_t v) { store_le(buffer_, v); }
void BinaryWriter::f32(float v) { store_le(buffer_, v); }
void BinaryWriter::f64(double v) { store_le(buffer_, v); }

void BinaryWriter::f32_array(const float* data, std::size_t count) {
  buffer_.reserve(buffer_.size() + count * 4);
  for (std::size_t i = 0; i < count; ++i) {
    store_le(buffer_, data[i]);
  }
}

void BinaryWriter::f64_array(const double* data, std::size_t count) {
  buffer_.reserve(buffer_.size() + count * 8);
  for (std::size_t i = 0; i < count; ++i) {
    store_le(buffer_, data[i]);
  }
}

void BinaryWriter::magic(const char m[4]) {
  buffer_.insert(buffer_.end(), m, m + 4);
}

void BinaryWriter::commit(const std::string& path) {
  atomic_write_bytes(path, buffer_);
}

void atomic_write_bytes(const std::string& path,
                        const std::vector<std::uint8_t>& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw FormatError("cannot open " + tmp + " for writing");
    }
    if (!bytes.empty()) {
      out.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
    }
    out.flush();
    if (!out) {
      throw FormatError("write failed on " + tmp);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw FormatError("cannot rename " + tmp + " to " + path + ": " +
                      ec.message());
  }
}

void atomic_write_text(const std::string& path, const std::string& text) {
  std::vector<std::uint8_t> bytes(text.begin(), text.end());
  atomic_write_bytes(path, bytes);
}

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t count) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < count; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return fnv1a64(bytes.data(), bytes.size());
}

std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return std::string(buf);
}

}  // namespace deepfeat
