#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lplatoon {

using VehicleId = std::uint32_t;

/// Wire value meaning "no vehicle".
inline constexpr VehicleId kNullId = 0xFFFFFFFFu;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kKmhToMs = 1.0 / 3.6;

} // namespace lplatoon
