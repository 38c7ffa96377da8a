#pragma once

#include <stdexcept>
#include <string>

namespace cascade_limits {

enum class ErrorKind {
  InvalidConfig,
  Domain,
  Precondition,
  InfeasibleMoments,
  InfeasibleProbability,
  Parse,
  Coverage,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cascade_limits
