#pragma once

#include <stdexcept>
#include <string>

namespace prefnav {

/// Base exception for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace prefnav
