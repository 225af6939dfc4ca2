#pragma once

#include <stdexcept>
#include <string>

namespace bshmm {

// Precondition violations (bad knots, out-of-range evaluation points, ...).
class invalid_input : public std::invalid_argument {
 public:
  explicit invalid_input(const std::string& what) : std::invalid_argument(what) {}
};

// Non-finite intermediates, underflow in the forward recursion, etc.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// File parsing and serialization failures.
class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bshmm
