#pragma once

#include <filesystem>
#include <string>

#include "deepfeat/io.hpp"

namespace testsupport {

// Per-process scratch directory under the working directory; files are
// overwritten freely, so tests never depend on leftover state.
inline std::string tmp_path(const std::string& name) {
  const std::filesystem::path dir = "deepfeat-test-tmp";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

// Runs `fn`, expecting it to throw E; returns the message so the caller can
// assert on its content without depending on exact wording.
template <typename E, typename Fn>
std::string message_of(Fn&& fn) {
  try {
    fn();
  } catch (const E& e) {
    return e.what();
  }
  return "";
}

inline bool contains(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

inline bool same_bytes(const std::string& path_a, const std::string& path_b) {
  return deepfeat::read_file_bytes(path_a) == deepfeat::read_file_bytes(path_b);
}

}  // namespace testsupport
