#pragma once

#include <stdexcept>
#include <string>

namespace ontozsl {

// Base error for everything raised by the library. CLI maps these to exit 1,
// ConfigError to exit 2.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

}  // namespace ontozsl
