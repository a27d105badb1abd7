#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace omest {

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A matrix that should be real carries a residual imaginary part above
// tolerance, which indicates a construction bug upstream.
struct ImaginaryResidueError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularSystemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MultistableError : std::runtime_error {
    MultistableError(std::string msg, std::vector<double> stable_x0)
        : std::runtime_error(std::move(msg)), stable_roots(std::move(stable_x0)) {}
    std::vector<double> stable_roots;
};

struct UnstableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Implicit function theorem fails: dF/dx0 vanishes at a fold point.
struct DegenerateRootError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonPhysicalStateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateVarianceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularInformationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace omest
