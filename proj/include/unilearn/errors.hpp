#ifndef UNILEARN_ERRORS_HPP
#define UNILEARN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace unilearn {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DuplicateLabel : Error { using Error::Error; };
struct UnknownLabel : Error { using Error::Error; };
struct InvalidPermutation : Error { using Error::Error; };
struct LabelClash : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct CapExceeded : Error { using Error::Error; };
struct NotHermitian : Error { using Error::Error; };
struct NotPositive : Error { using Error::Error; };
struct NotUnitary : Error { using Error::Error; };
struct GroupMismatch : Error { using Error::Error; };
struct IrrepMismatch : Error { using Error::Error; };
struct MultiplicityOverflow : Error { using Error::Error; };
struct ConvergenceFailure : Error { using Error::Error; };
struct UnsupportedM : Error { using Error::Error; };
struct DegreeTooLow : Error { using Error::Error; };
struct RejectionStall : Error { using Error::Error; };
struct InfeasibleDraw : Error { using Error::Error; };

}  // namespace unilearn

#endif
