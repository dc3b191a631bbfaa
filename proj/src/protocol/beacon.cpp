#include "lplatoon/protocol/beacon.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <sstream>

namespace lplatoon::protocol {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put(Frame& f, std::size_t off, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<std::byte, sizeof(T)> raw;
    std::memcpy(raw.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    std::memcpy(f.data() + off, raw.data(), sizeof(T));
}

template <typename T>
T get(std::span<const std::byte> s, std::size_t off) {
    std::array<std::byte, sizeof(T)> raw;
    std::memcpy(raw.data(), s.data() + off, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    T value;
    std::memcpy(&value, raw.data(), sizeof(T));
    return value;
}

namespace off {
constexpr std::size_t kType = 0, kVehicle = 4, kPlatoon = 8, kSeq = 12, kTimestamp = 16,
                      kPosition = 24, kSpeed = 32, kAccel = 40, kLength = 48, kLeaderRef = 56,
                      kPlatoonPos = 60, kFlags = 62, kVlqi = 64, kPrrLeader = 72,
                      kSelectedVl = 80, kNewVl = 84, kOldVl = 88;
}

static_assert(off::kVlqi == kExtensionOffset);
static_assert(off::kOldVl + 4 - off::kVlqi == kExtensionSize);
static_assert(off::kOldVl + 4 == kPaddingOffset);

} // namespace

std::string_view to_string(MsgType t) {
    switch (t) {
    case MsgType::Beacon: return "BEACON";
    case MsgType::JoinReq: return "JOIN_REQ";
    case MsgType::JoinResp: return "JOIN_RESP";
    case MsgType::LeaveReq: return "LEAVE_REQ";
    case MsgType::LeaveResp: return "LEAVE_RESP";
    }
    return "?";
}

Frame encode_beacon(const Beacon& b) {
    Frame f{};
    put(f, off::kType, static_cast<std::uint32_t>(b.msg_type));
    put(f, off::kVehicle, b.vehicle_id);
    put(f, off::kPlatoon, b.platoon_id);
    put(f, off::kSeq, b.seq);
    put(f, off::kTimestamp, b.timestamp_ms);
    put(f, off::kPosition, b.position);
    put(f, off::kSpeed, b.speed);
    put(f, off::kAccel, b.accel);
    put(f, off::kLength, b.length);
    put(f, off::kLeaderRef, b.leader_ref_id);
    put(f, off::kPlatoonPos, b.platoon_position);
    put(f, off::kFlags, b.flags);
    put(f, off::kVlqi, b.vlqi);
    put(f, off::kPrrLeader, b.prr_leader);
    put(f, off::kSelectedVl, b.selected_vl_id);
    put(f, off::kNewVl, b.new_vl_id);
    put(f, off::kOldVl, b.old_vl_id);
    return f;
}

Beacon decode_beacon(std::span<const std::byte> s) {
    if (s.size() != kBeaconSize) {
        std::ostringstream os;
        os << "beacon must be " << kBeaconSize << " bytes, got " << s.size();
        throw DecodeError(os.str());
    }
    auto type = get<std::uint32_t>(s, off::kType);
    if (type > static_cast<std::uint32_t>(MsgType::LeaveResp))
        throw DecodeError("unknown msg_type " + std::to_string(type));
    for (std::size_t i = kPaddingOffset; i < kBeaconSize; ++i) {
        if (s[i] != std::byte{0})
            throw DecodeError("non-zero padding at offset " + std::to_string(i));
    }
    Beacon b;
    b.msg_type = static_cast<MsgType>(type);
    b.vehicle_id = get<std::uint32_t>(s, off::kVehicle);
    b.platoon_id = get<std::uint32_t>(s, off::kPlatoon);
    b.seq = get<std::uint32_t>(s, off::kSeq);
    b.timestamp_ms = get<std::uint64_t>(s, off::kTimestamp);
    b.position = get<double>(s, off::kPosition);
    b.speed = get<double>(s, off::kSpeed);
    b.accel = get<double>(s, off::kAccel);
    b.length = get<double>(s, off::kLength);
    b.leader_ref_id = get<std::uint32_t>(s, off::kLeaderRef);
    b.platoon_position = get<std::uint16_t>(s, off::kPlatoonPos);
    b.flags = get<std::uint16_t>(s, off::kFlags);
    b.vlqi = get<double>(s, off::kVlqi);
    b.prr_leader = get<double>(s, off::kPrrLeader);
    b.selected_vl_id = get<std::uint32_t>(s, off::kSelectedVl);
    b.new_vl_id = get<std::uint32_t>(s, off::kNewVl);
    b.old_vl_id = get<std::uint32_t>(s, off::kOldVl);
    return b;
}

std::string hex_dump(std::span<const std::byte> octets) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(octets.size() * 2);
    for (std::byte b : octets) {
        auto v = std::to_integer<unsigned>(b);
        out.push_back(kDigits[v >> 4]);
        out.push_back(kDigits[v & 0xF]);
    }
    return out;
}

} // namespace lplatoon::protocol
