#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace multipath {

// Every failure the library raises carries one of these kinds so callers
// (and the CLI exit-code mapping) can react without parsing messages.
enum class ErrorKind {
    NotSquare,
    NotHermitian,
    NotPSD,
    DimensionMismatch,
    BadDimension,
    ZeroProbabilityBlock,
    ZeroProbabilityPair,
    NegativeRadicand,
    IncompatibleMode,
    BadGrid,
    GridTooCoarse,
    AllZeroScan,
    BadSampleCount,
    OvershootBeyondTolerance,
    BadPriors,
    DimensionTooLarge,
    Validation,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

}  // namespace multipath
