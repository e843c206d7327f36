#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kslab {

// Every domain failure derives from Error so front ends can map it to an exit code.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

#define KSLAB_DEFINE_ERROR(Name)                                        \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(#Name, what) {}      \
  };

KSLAB_DEFINE_ERROR(InvalidGrid)
KSLAB_DEFINE_ERROR(ShellNotResolvable)
KSLAB_DEFINE_ERROR(NonHermitianSymbol)
KSLAB_DEFINE_ERROR(NegativeTime)
KSLAB_DEFINE_ERROR(EmptyTrace)
KSLAB_DEFINE_ERROR(BetaUnresolvable)
KSLAB_DEFINE_ERROR(ConstraintViolation)
KSLAB_DEFINE_ERROR(OffsetCollision)
KSLAB_DEFINE_ERROR(NonContraction)
KSLAB_DEFINE_ERROR(BlowupDetected)
KSLAB_DEFINE_ERROR(CFLViolation)
KSLAB_DEFINE_ERROR(SeparationNotCalibrated)
KSLAB_DEFINE_ERROR(ExponentConstraintViolated)
KSLAB_DEFINE_ERROR(ParseError)
KSLAB_DEFINE_ERROR(IoError)
KSLAB_DEFINE_ERROR(FormatError)

#undef KSLAB_DEFINE_ERROR

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error("ValidationError", join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }
  std::vector<std::string> violations_;
};

}  // namespace kslab
