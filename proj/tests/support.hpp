#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace groundbot::test {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string golden(const std::string& name) { return read_file(std::string(GROUNDBOT_GOLDEN_DIR) + "/" + name); }

inline std::string fixture_path(const std::string& name) { return std::string(GROUNDBOT_FIXTURE_DIR) + "/" + name; }

}  // namespace groundbot::test
