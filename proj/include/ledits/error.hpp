#pragma once

#include <stdexcept>
#include <string>

namespace ledits {

// Exit-code classes used by the CLI: parameter/config problems map to 2,
// numeric constraint violations to 3, file problems to 4.
enum class ErrorClass { config = 2, numeric = 3, io = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const noexcept { return cls_; }

 private:
  ErrorClass cls_;
};

struct ParameterError : Error {
  explicit ParameterError(const std::string& what) : Error(ErrorClass::config, what) {}
};

struct IndexError : Error {
  explicit IndexError(const std::string& what) : Error(ErrorClass::config, what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorClass::config, what) {}
};

struct CompatibilityError : Error {
  explicit CompatibilityError(const std::string& what) : Error(ErrorClass::config, what) {}
};

// Negative radicand in the mean predictor.
struct ScheduleError : Error {
  explicit ScheduleError(const std::string& what) : Error(ErrorClass::numeric, what) {}
};

struct InversionError : Error {
  explicit InversionError(const std::string& what) : Error(ErrorClass::numeric, what) {}
};

struct DivergenceError : Error {
  explicit DivergenceError(const std::string& what) : Error(ErrorClass::numeric, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorClass::io, what) {}
};

}  // namespace ledits
