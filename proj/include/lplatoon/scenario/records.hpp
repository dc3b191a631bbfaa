#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lplatoon/types.hpp"

namespace lplatoon::scenario {

/// Shortest text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s, std::string_view what);

/// Times are kept on a microsecond grid so that they print short and
/// survive a CSV round trip unchanged.
double snap_time(double t);

struct TraceRecord {
    double time = 0.0;
    VehicleId vehicle = kNullId;
    double position = 0.0;
    double speed = 0.0;
    double accel = 0.0;
    std::optional<double> gap; ///< bumper gap to the vehicle ahead in the same lane
    std::optional<double> eps; ///< spacing error, positive when too close
    std::string mode;
    std::string role;
    VehicleId leader_ref = kNullId;
    double prr_leader = 0.0;

    bool operator==(const TraceRecord&) const = default;
};

struct EventRecord {
    double time = 0.0;
    std::string type;
    VehicleId subject = kNullId;
    std::string detail;

    bool operator==(const EventRecord&) const = default;
};

inline constexpr std::string_view kTraceHeader =
    "time,vehicle,position,speed,accel,gap,eps,mode,role,leader_ref,prr_leader";
inline constexpr std::string_view kEventsHeader = "time,type,subject,detail";

void write_trace_header(std::ostream& os);
void write_trace_row(std::ostream& os, const TraceRecord& r);
void write_events_header(std::ostream& os);
void write_event_row(std::ostream& os, const EventRecord& e);

/// Throws lplatoon::Error on a header mismatch or malformed row.
std::vector<TraceRecord> read_trace(std::istream& is);
std::vector<EventRecord> read_events(std::istream& is);

/// Looks up `key=value` inside an event detail string.
std::optional<std::string> detail_field(std::string_view detail, std::string_view key);

} // namespace lplatoon::scenario
