#ifndef SIGNBENCH_COMMON_HPP
#define SIGNBENCH_COMMON_HPP

#include <cstddef>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace signbench {

/// Base class for all library errors. Maps to exit code 3 in the CLI.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration (bad JSON, bad flag combination). Exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Dataset or file problems (missing, corrupt, undecodable). Exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

using Shape = std::vector<std::size_t>;

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << ',';
    os << s[i];
  }
  os << ')';
  return os.str();
}

inline std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

/// Fixed significant-digit formatting ('.' decimal point) used by every
/// emitted CSV so report files are byte-stable.
inline std::string format_sig(double v, int digits = 6) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(digits);
  os << v;
  return os.str();
}

}  // namespace signbench

#endif  // SIGNBENCH_COMMON_HPP
