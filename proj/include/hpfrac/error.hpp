#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace hpfrac {

// Base of every error raised by the library. Each concrete class carries a
// stable serialized name and a process exit code used by the command line.
class Error : public std::runtime_error {
 public:
  Error(std::string message, std::string parameter = {})
      : std::runtime_error(std::move(message)), parameter_(std::move(parameter)) {}

  virtual const char* kind() const noexcept = 0;
  virtual int exit_code() const noexcept = 0;

  // Name of the offending parameter, empty when not applicable.
  const std::string& parameter() const noexcept { return parameter_; }

 private:
  std::string parameter_;
};

#define HPFRAC_DEFINE_ERROR(Name, Code)                                   \
  class Name : public Error {                                             \
   public:                                                                \
    using Error::Error;                                                   \
    const char* kind() const noexcept override { return #Name; }          \
    int exit_code() const noexcept override { return Code; }              \
  }

HPFRAC_DEFINE_ERROR(ConfigError, 2);
HPFRAC_DEFINE_ERROR(DomainError, 3);
HPFRAC_DEFINE_ERROR(NonConvergence, 4);
HPFRAC_DEFINE_ERROR(IoError, 5);
HPFRAC_DEFINE_ERROR(PoleError, 6);
HPFRAC_DEFINE_ERROR(BranchError, 7);
HPFRAC_DEFINE_ERROR(TailError, 8);
HPFRAC_DEFINE_ERROR(ContourError, 9);
HPFRAC_DEFINE_ERROR(TableError, 10);

#undef HPFRAC_DEFINE_ERROR

}  // namespace hpfrac
