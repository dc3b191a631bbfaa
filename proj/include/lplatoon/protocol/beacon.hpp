#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "lplatoon/types.hpp"

namespace lplatoon::protocol {

enum class MsgType : std::uint32_t {
    Beacon = 0,
    JoinReq = 1,
    JoinResp = 2,
    LeaveReq = 3,
    LeaveResp = 4,
};

std::string_view to_string(MsgType t);

namespace flags {
inline constexpr std::uint16_t kVirtualLeader = 1u << 0;
inline constexpr std::uint16_t kPlatoonLeader = 1u << 1;
} // namespace flags

/// One V2V frame. Maneuver messages reuse the layout: `target_id` (the
/// selected_vl_id slot) names the addressee of JOIN_*/LEAVE_* frames.
struct Beacon {
    MsgType msg_type = MsgType::Beacon;
    VehicleId vehicle_id = kNullId;
    std::uint32_t platoon_id = kNullId;
    std::uint32_t seq = 0;
    std::uint64_t timestamp_ms = 0;
    double position = 0.0;
    double speed = 0.0;
    double accel = 0.0;
    double length = 0.0;
    VehicleId leader_ref_id = kNullId;
    std::uint16_t platoon_position = 0;
    std::uint16_t flags = 0;
    // 28-byte protocol extension
    double vlqi = 0.0;
    double prr_leader = 0.0;
    VehicleId selected_vl_id = kNullId;
    VehicleId new_vl_id = kNullId;
    VehicleId old_vl_id = kNullId;

    bool is_virtual_leader() const { return (flags & flags::kVirtualLeader) != 0; }
    bool is_platoon_leader() const { return (flags & flags::kPlatoonLeader) != 0; }

    bool operator==(const Beacon&) const = default;
};

inline constexpr std::size_t kBeaconSize = 228;
inline constexpr std::size_t kExtensionOffset = 64;
inline constexpr std::size_t kExtensionSize = 28;
inline constexpr std::size_t kPaddingOffset = 92;

using Frame = std::array<std::byte, kBeaconSize>;

class DecodeError : public Error {
public:
    using Error::Error;
};

/// Fixed little-endian layout, zero padded to 228 bytes.
Frame encode_beacon(const Beacon& b);
/// Throws DecodeError on wrong length, unknown type or dirty padding.
Beacon decode_beacon(std::span<const std::byte> octets);

std::string hex_dump(std::span<const std::byte> octets);

} // namespace lplatoon::protocol
