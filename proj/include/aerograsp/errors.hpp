#pragma once

#include <stdexcept>
#include <string>

namespace aerograsp {

/// Base class for all domain errors thrown by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct NotARotation : Error {
    using Error::Error;
};

/// Ray does not descend toward the ground plane.
struct RayParallelToGround : Error {
    using Error::Error;
};

struct OutOfBounds : Error {
    using Error::Error;
};

struct NoConvergence : Error {
    using Error::Error;
};

struct BehindCamera : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct TooSmall : Error {
    using Error::Error;
};

struct NonPhysical : Error {
    using Error::Error;
};

struct NotAttached : Error {
    using Error::Error;
};

struct ConfigInvalid : Error {
    using Error::Error;
};

}  // namespace aerograsp
