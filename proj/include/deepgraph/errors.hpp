#pragma once

#include <stdexcept>
#include <string>

namespace deepgraph {

/// Malformed or inconsistent input data (bad graph, bad cache, bad checkpoint).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical routine failed (non-convergence, zero denominator, non-finite value).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace deepgraph
