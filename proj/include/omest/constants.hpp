#pragma once

namespace omest::constants {

// CODATA 2018
inline constexpr double hbar = 1.054571817e-34;      // J s
inline constexpr double k_boltzmann = 1.380649e-23;  // J / K

inline constexpr const char* schema_version = "1.0";

}  // namespace omest::constants
