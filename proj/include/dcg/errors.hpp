#pragma once

#include <stdexcept>
#include <string>

namespace dcg {

// Bad input: parameters, indices, grids.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// A trajectory left the finite range during integration.
class BlowUpError : public std::runtime_error {
public:
  BlowUpError(const std::string& what, double t)
      : std::runtime_error(what), time_(t) {}
  double time() const noexcept { return time_; }

private:
  double time_;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

} // namespace dcg
