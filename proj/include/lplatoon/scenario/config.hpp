#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lplatoon/channel.hpp"
#include "lplatoon/control.hpp"
#include "lplatoon/dynamics.hpp"
#include "lplatoon/protocol/agent.hpp"

namespace lplatoon::scenario {

class ConfigError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Sectioned key = value text: `[section]`, repeated `[[array]]` tables,
// `#` comments, quoted strings, numbers and true/false.

struct Value {
    std::variant<double, bool, std::string> data;
    int line = 0;
};

struct Table {
    std::map<std::string, Value> values;
    int line = 0;
};

struct Document {
    std::map<std::string, Table> sections;               ///< "" holds top-level keys
    std::map<std::string, std::vector<Table>> arrays;
};

Document parse_document(std::string_view text, std::string_view origin = "<input>");

// ---------------------------------------------------------------------------

enum class ManeuverAction { Join, Leave };

struct ManeuverSpec {
    double time = 0.0;
    ManeuverAction action = ManeuverAction::Join;
    /// Leave target: a vehicle id, "random_member" or "random_vl".
    std::string vehicle;
    double request_distance = 150.0;
};

enum class BroadcastAccel { Controller, Actual };

struct MetricsParams {
    double conv_threshold = 0.5;
    double settle_threshold = 0.1;
    double settle_hold = 2.0;
    double vl_quiet = 5.0;
};

struct ScenarioConfig {
    std::string name = "unnamed";
    double duration = 200.0;
    std::uint64_t seed = 1;
    double tick = 0.01;
    double trace_interval = 0.1;

    int platoon_size = 30;
    double vehicle_length = 13.0;
    double initial_spacing = 40.0;

    dynamics::LeaderProfile leader;
    control::CaccParams cacc;
    bool omega_n_in_hz = false;
    dynamics::LowerController lower;
    control::FallbackParams fallback;
    bool radar_enabled = false;
    double radar_range = 150.0;

    protocol::ProtocolParams protocol;
    BroadcastAccel broadcast_accel = BroadcastAccel::Controller;

    channel::ChannelModel channel;
    std::size_t packet_size = 228;
    channel::BeaconSchedule beacon;

    double spawn_margin = 100.0;
    std::vector<ManeuverSpec> maneuvers;
    MetricsParams metrics;

    /// CACC parameters as the controller sees them (omega_n unit applied).
    control::CaccParams effective_cacc() const;
};

/// Throws ConfigError naming the offending key.
void validate(const ScenarioConfig& cfg);

ScenarioConfig config_from_document(const Document& doc);
ScenarioConfig parse_scenario(std::string_view text, std::string_view origin = "<input>");
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Fully resolved scenario in the same text format; parses back to an equal config.
std::string to_text(const ScenarioConfig& cfg);

std::string_view to_string(ManeuverAction a);
std::string_view to_string(BroadcastAccel a);

} // namespace lplatoon::scenario
