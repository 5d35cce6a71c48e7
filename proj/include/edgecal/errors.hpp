#pragma once

#include <stdexcept>
#include <string>

namespace edgecal {

// Precondition violations on public operations.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input files or config text.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// RANSAC could not form a single non-degenerate plane hypothesis.
class NoPlaneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The frame has no LiDAR edge points, so the alignment cost is undefined.
class NoEdgesError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace edgecal
