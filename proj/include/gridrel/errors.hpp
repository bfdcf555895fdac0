#pragma once

#include <stdexcept>
#include <string>

namespace gridrel {

// Invalid arguments, malformed config, out-of-range inputs.
struct validation_error : std::runtime_error {
  explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Files that cannot be read, parsed, or written.
struct io_error : std::runtime_error {
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gridrel
