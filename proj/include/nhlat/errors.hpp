// errors.hpp: exception types raised by the nhlat library

#pragma once

#include <stdexcept>
#include <string>

namespace nhlat {

// Validation errors map to CLI exit code 2, numerical failures to exit code 3.
enum class ErrorKind { Validation, Numerical };

class Error : public std::runtime_error {
public:
    Error(const std::string& name, const std::string& message, ErrorKind kind)
        : std::runtime_error(name + ": " + message), name_(name), kind_(kind) {}

    const std::string& name() const noexcept { return name_; }
    ErrorKind kind() const noexcept { return kind_; }

private:
    std::string name_;
    ErrorKind kind_;
};

#define NHLAT_DEFINE_ERROR(Name, Kind)                                    \
    class Name : public Error {                                           \
    public:                                                               \
        explicit Name(const std::string& message)                         \
            : Error(#Name, message, ErrorKind::Kind) {}                   \
    };

NHLAT_DEFINE_ERROR(ConfigError, Validation)
NHLAT_DEFINE_ERROR(DomainError, Validation)
NHLAT_DEFINE_ERROR(SizeError, Validation)
NHLAT_DEFINE_ERROR(UnknownFigure, Validation)
NHLAT_DEFINE_ERROR(ZeroVelocity, Validation)
NHLAT_DEFINE_ERROR(WindowTooNarrow, Validation)

NHLAT_DEFINE_ERROR(ExceptionalPoint, Numerical)
NHLAT_DEFINE_ERROR(OnSpectrum, Numerical)
NHLAT_DEFINE_ERROR(BandDiscontinuity, Numerical)
NHLAT_DEFINE_ERROR(DegenerateLeadingCoefficient, Numerical)
NHLAT_DEFINE_ERROR(BranchPointCollision, Numerical)
NHLAT_DEFINE_ERROR(OrderUndetermined, Numerical)
NHLAT_DEFINE_ERROR(StallError, Numerical)
NHLAT_DEFINE_ERROR(NoContributingSaddle, Numerical)
NHLAT_DEFINE_ERROR(VanishingResidue, Numerical)
NHLAT_DEFINE_ERROR(TooFewPeaks, Numerical)
NHLAT_DEFINE_ERROR(EigensolverFailure, Numerical)
NHLAT_DEFINE_ERROR(Unsupported, Numerical)

#undef NHLAT_DEFINE_ERROR

} // namespace nhlat
