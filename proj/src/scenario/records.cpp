#include "lplatoon/scenario/records.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace lplatoon::scenario {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, std::string_view what) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error("bad number '" + std::string(s) + "' for " + std::string(what));
    return v;
}

double snap_time(double t) { return std::round(t * 1e6) / 1e6; }

namespace {

std::string id_field(VehicleId v) { return v == kNullId ? std::string() : std::to_string(v); }

VehicleId parse_id(std::string_view s, std::string_view what) {
    if (s.empty()) return kNullId;
    std::uint32_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error("bad vehicle id '" + std::string(s) + "' for " + std::string(what));
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep, std::size_t max_fields = 0) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        if (max_fields && out.size() + 1 == max_fields) {
            out.push_back(line.substr(start));
            return out;
        }
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

void check_header(std::istream& is, std::string_view expected, std::string_view file) {
    std::string line;
    if (!std::getline(is, line)) throw Error(std::string(file) + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected)
        throw Error(std::string(file) + ": unexpected header '" + line + "'");
}

} // namespace

void write_trace_header(std::ostream& os) { os << kTraceHeader << '\n'; }

void write_trace_row(std::ostream& os, const TraceRecord& r) {
    os << format_double(r.time) << ',' << r.vehicle << ',' << format_double(r.position) << ','
       << format_double(r.speed) << ',' << format_double(r.accel) << ','
       << (r.gap ? format_double(*r.gap) : std::string()) << ','
       << (r.eps ? format_double(*r.eps) : std::string()) << ',' << r.mode << ',' << r.role << ','
       << id_field(r.leader_ref) << ',' << format_double(r.prr_leader) << '\n';
}

void write_events_header(std::ostream& os) { os << kEventsHeader << '\n'; }

void write_event_row(std::ostream& os, const EventRecord& e) {
    os << format_double(e.time) << ',' << e.type << ',' << id_field(e.subject) << ',' << e.detail
       << '\n';
}

std::vector<TraceRecord> read_trace(std::istream& is) {
    check_header(is, kTraceHeader, "trace.csv");
    std::vector<TraceRecord> out;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split(line, ',');
        if (f.size() != 11)
            throw Error("trace.csv line " + std::to_string(lineno) + ": expected 11 fields");
        TraceRecord r;
        r.time = parse_double(f[0], "time");
        r.vehicle = parse_id(f[1], "vehicle");
        r.position = parse_double(f[2], "position");
        r.speed = parse_double(f[3], "speed");
        r.accel = parse_double(f[4], "accel");
        if (!f[5].empty()) r.gap = parse_double(f[5], "gap");
        if (!f[6].empty()) r.eps = parse_double(f[6], "eps");
        r.mode = std::string(f[7]);
        r.role = std::string(f[8]);
        r.leader_ref = parse_id(f[9], "leader_ref");
        r.prr_leader = parse_double(f[10], "prr_leader");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<EventRecord> read_events(std::istream& is) {
    check_header(is, kEventsHeader, "events.csv");
    std::vector<EventRecord> out;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split(line, ',', 4);
        if (f.size() != 4)
            throw Error("events.csv line " + std::to_string(lineno) + ": expected 4 fields");
        out.push_back(EventRecord{parse_double(f[0], "time"), std::string(f[1]),
                                  parse_id(f[2], "subject"), std::string(f[3])});
    }
    return out;
}

std::optional<std::string> detail_field(std::string_view detail, std::string_view key) {
    for (auto tok : split(detail, ' ')) {
        auto eq = tok.find('=');
        if (eq == std::string_view::npos) continue;
        if (tok.substr(0, eq) == key) return std::string(tok.substr(eq + 1));
    }
    return std::nullopt;
}

} // namespace lplatoon::scenario
