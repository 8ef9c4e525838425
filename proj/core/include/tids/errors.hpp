#ifndef TIDS_ERRORS_HPP
#define TIDS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tids {

// usage or configuration problem, CLI exit code 1
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// unusable input data, CLI exit code 2
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// broken internal invariant, CLI exit code 3
class InternalError : public std::runtime_error {
public:
  explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InternalError(msg);
}

}  // namespace tids

#endif
