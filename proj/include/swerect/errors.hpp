#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace swerect {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : Error {
    using Error::Error;
};

struct GridTooCoarse : Error {
    using Error::Error;
};

struct GridMismatch : Error {
    using Error::Error;
};

struct EmptyTrajectory : Error {
    using Error::Error;
};

struct NonPositiveHeight : Error {
    using Error::Error;
};

struct NotSupercritical : Error {
    using Error::Error;
};

struct NotStrongSupercritical : Error {
    using Error::Error;
};

struct CoriolisRequiresProfile : Error {
    using Error::Error;
};

struct RegimeLost : Error {
    double x = std::numeric_limits<double>::quiet_NaN();
    double t = std::numeric_limits<double>::quiet_NaN();

    explicit RegimeLost(const std::string& msg) : Error(msg) {}
    RegimeLost(const std::string& msg, double x_loc) : Error(msg), x(x_loc) {}
    RegimeLost(const std::string& msg, double x_loc, double t_loc)
        : Error(msg), x(x_loc), t(t_loc) {}
};

struct IntegrationFailure : Error {
    using Error::Error;
};

struct KernelTooWide : Error {
    using Error::Error;
};

struct SupportTouchesBoundary : Error {
    using Error::Error;
};

struct UnstableStep : Error {
    using Error::Error;
};

struct BackgroundTooShort : Error {
    using Error::Error;
};

struct ResidualTooLarge : Error {
    using Error::Error;
};

struct IncompatibleData : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace swerect
