#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace supercrit {

enum class ErrorKind {
    InvalidArgument,
    DiscriminantNegative,
    NonPositiveProfile,
    ResidualTooLarge,
    WindowTooNarrow,
    PrecisionLoss,
    NonPositiveKernel,
    BoundViolated,
    NewtonDiverged,
    BlowupDetected,
    NotConverged,
    DomainExceeded,
    ConfigInvalid,
    IoError,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DiscriminantNegative: return "DiscriminantNegative";
    case ErrorKind::NonPositiveProfile: return "NonPositiveProfile";
    case ErrorKind::ResidualTooLarge: return "ResidualTooLarge";
    case ErrorKind::WindowTooNarrow: return "WindowTooNarrow";
    case ErrorKind::PrecisionLoss: return "PrecisionLoss";
    case ErrorKind::NonPositiveKernel: return "NonPositiveKernel";
    case ErrorKind::BoundViolated: return "BoundViolated";
    case ErrorKind::NewtonDiverged: return "NewtonDiverged";
    case ErrorKind::BlowupDetected: return "BlowupDetected";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::DomainExceeded: return "DomainExceeded";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& what) {
    if (!condition) throw Error(kind, what);
}

} // namespace supercrit
