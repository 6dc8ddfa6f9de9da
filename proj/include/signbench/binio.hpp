#ifndef SIGNBENCH_BINIO_HPP
#define SIGNBENCH_BINIO_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "signbench/common.hpp"

namespace signbench::binio {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts need byte swaps");

inline void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}

inline void write_f32(std::ostream& os, float v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}

inline void write_f32s(std::ostream& os, const float* p, std::size_t n) {
  os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * 4));
}

inline std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  if (!is) throw DataError("unexpected end of file while reading u32");
  return v;
}

inline float read_f32(std::istream& is) {
  float v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  if (!is) throw DataError("unexpected end of file while reading f32");
  return v;
}

inline void read_f32s(std::istream& is, float* p, std::size_t n) {
  is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * 4));
  if (!is) throw DataError("unexpected end of file while reading f32 block");
}

inline void write_magic(std::ostream& os, const char magic[4]) { os.write(magic, 4); }

inline void expect_magic(std::istream& is, const char magic[4], const std::string& what) {
  char buf[4] = {0, 0, 0, 0};
  is.read(buf, 4);
  if (!is || std::memcmp(buf, magic, 4) != 0)
    throw DataError("bad magic in " + what + " file");
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open for writing: " + path);
  return os;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open for reading: " + path);
  return is;
}

}  // namespace signbench::binio

#endif  // SIGNBENCH_BINIO_HPP
