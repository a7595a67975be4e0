#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

// Syntax error in the expression language; position is a 0-based offset
// into the source string.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int position)
      : std::runtime_error(what + " (at offset " + std::to_string(position) + ")"),
        position_(position) {}
  int position() const { return position_; }

 private:
  int position_;
};

// Geometric degeneracy: singular fundamental form, |det g| below threshold,
// nonpositive Finsler function, failed homogeneity — the input is not a
// Finsler structure at the probed point.
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sampling exhaustion: the rejection predicate left fewer valid samples
// than the plan requires.  Classification is indeterminate.
class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace finsler
