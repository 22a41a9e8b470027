#pragma once

#include <stdexcept>
#include <string>

namespace mouthsyrinx {

// Root of every error the engine raises. Callers that only need a message
// catch this; callers that recover (tracking loss, closed mouth) catch the
// concrete type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mouthsyrinx
