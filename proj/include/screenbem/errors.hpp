#pragma once

#include <stdexcept>
#include <string>

namespace screenbem {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid or inconsistent screen geometry (non-planar, overlapping, ...).
struct GeometryError : Error {
    using Error::Error;
};

/// Rejected run configuration (bad flags, incompatible method/mesh, ...).
struct ConfigError : Error {
    using Error::Error;
};

/// Numerical failure (singular system, failed extrapolation, ...).
struct NumericsError : Error {
    using Error::Error;
};

} // namespace screenbem
