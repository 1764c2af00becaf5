#pragma once

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>

namespace orbmin {

/// Failure categories raised by the library. Each maps onto one documented
/// error of a public operation.
enum class ErrorKind {
    InvalidArgument,
    Singular,
    NotSymmetric,
    StepUnderflow,
    NonFiniteState,
    SingularR,
    NotPeriodic,
    CollisionOnPath,
    NoValidEpsilon,
    EquivarianceFailure,
    AlphaOutOfRange,
    CenterOnPath,
    NotCritical,
    WitnessNotFound,
    ConfigInvalid,
    Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::SingularR: return "SingularR";
    case ErrorKind::NotPeriodic: return "NotPeriodic";
    case ErrorKind::CollisionOnPath: return "CollisionOnPath";
    case ErrorKind::NoValidEpsilon: return "NoValidEpsilon";
    case ErrorKind::EquivarianceFailure: return "EquivarianceFailure";
    case ErrorKind::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorKind::CenterOnPath: return "CenterOnPath";
    case ErrorKind::NotCritical: return "NotCritical";
    case ErrorKind::WitnessNotFound: return "WitnessNotFound";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

/// Compact rendering of a number for diagnostics (%g style, locale independent).
inline std::string num_str(double x) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 6);
    return std::string(buf, r.ptr);
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace orbmin
