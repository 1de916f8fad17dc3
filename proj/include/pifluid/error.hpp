#pragma once

#include <stdexcept>
#include <string>

namespace pifluid {

/// Base of every failure raised by the library. `name()` is the stable,
/// machine-readable identifier the CLI prints on error.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }

  /// Configuration problems map to a different exit code than numerical ones.
  virtual bool is_config_error() const noexcept { return false; }

 private:
  std::string name_;
};

#define PIFLUID_DEFINE_ERROR(Type)                                   \
  class Type : public Error {                                        \
   public:                                                           \
    explicit Type(const std::string& what) : Error(#Type, what) {}   \
  }

PIFLUID_DEFINE_ERROR(NoConvergence);
PIFLUID_DEFINE_ERROR(NearCaustic);
PIFLUID_DEFINE_ERROR(ConjugatePoint);
PIFLUID_DEFINE_ERROR(FrequencyZero);
PIFLUID_DEFINE_ERROR(DiscriminantZero);
PIFLUID_DEFINE_ERROR(GridTooNarrow);
PIFLUID_DEFINE_ERROR(GridMismatch);
PIFLUID_DEFINE_ERROR(BoundaryContamination);
PIFLUID_DEFINE_ERROR(EigenFailure);
PIFLUID_DEFINE_ERROR(InvalidArgument);

#undef PIFLUID_DEFINE_ERROR

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
  bool is_config_error() const noexcept override { return true; }
};

}  // namespace pifluid
