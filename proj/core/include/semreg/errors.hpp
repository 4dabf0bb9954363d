#pragma once

#include <stdexcept>
#include <string>

namespace semreg {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoCorrespondencesError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CliqueTooSmallError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateSolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace semreg
