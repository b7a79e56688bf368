#pragma once

#include <stdexcept>
#include <string>

namespace wk {

// Malformed or out-of-range input. The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Input that is valid but outside what the numerics handle.
class UnsupportedError : public std::runtime_error {
 public:
  explicit UnsupportedError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wk
