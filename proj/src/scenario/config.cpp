#include "lplatoon/scenario/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "lplatoon/scenario/records.hpp"

namespace lplatoon::scenario {

// ---------------------------------------------------------------------------
// parser

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void parse_fail(std::string_view origin, int line, const std::string& msg) {
    std::ostringstream os;
    os << origin << ":" << line << ": " << msg;
    throw ConfigError(os.str());
}

bool valid_name(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '_' || c == '-';
        if (!ok) return false;
    }
    return true;
}

// Strips a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
        if (c == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

Value parse_value(std::string_view raw, std::string_view origin, int line) {
    Value v;
    v.line = line;
    if (raw.empty()) parse_fail(origin, line, "missing value");
    if (raw.front() == '"') {
        if (raw.size() < 2 || raw.back() != '"') parse_fail(origin, line, "unterminated string");
        std::string out;
        for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
            char c = raw[i];
            if (c == '\\' && i + 2 < raw.size()) {
                char n = raw[++i];
                out.push_back(n == 'n' ? '\n' : n == 't' ? '\t' : n);
            } else {
                out.push_back(c);
            }
        }
        v.data = std::move(out);
        return v;
    }
    if (raw == "true") {
        v.data = true;
        return v;
    }
    if (raw == "false") {
        v.data = false;
        return v;
    }
    double d = 0.0;
    auto res = std::from_chars(raw.data(), raw.data() + raw.size(), d);
    if (res.ec != std::errc() || res.ptr != raw.data() + raw.size())
        parse_fail(origin, line, "cannot parse value '" + std::string(raw) + "'");
    v.data = d;
    return v;
}

} // namespace

Document parse_document(std::string_view text, std::string_view origin) {
    Document doc;
    doc.sections[""];
    Table* current = &doc.sections[""];
    std::set<std::string> seen_sections;
    int lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        std::string_view line = trim(strip_comment(raw));
        if (line.empty()) continue;

        if (line.substr(0, 2) == "[[") {
            if (line.size() < 4 || line.substr(line.size() - 2) != "]]")
                parse_fail(origin, lineno, "malformed array header");
            std::string name(trim(line.substr(2, line.size() - 4)));
            if (!valid_name(name)) parse_fail(origin, lineno, "bad table name '" + name + "'");
            auto& vec = doc.arrays[name];
            vec.emplace_back();
            vec.back().line = lineno;
            current = &vec.back();
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') parse_fail(origin, lineno, "malformed section header");
            std::string name(trim(line.substr(1, line.size() - 2)));
            if (!valid_name(name)) parse_fail(origin, lineno, "bad section name '" + name + "'");
            if (!seen_sections.insert(name).second)
                parse_fail(origin, lineno, "duplicate section [" + name + "]");
            current = &doc.sections[name];
            current->line = lineno;
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) parse_fail(origin, lineno, "expected key = value");
        std::string key(trim(line.substr(0, eq)));
        if (!valid_name(key)) parse_fail(origin, lineno, "bad key '" + key + "'");
        Value v = parse_value(trim(line.substr(eq + 1)), origin, lineno);
        if (!current->values.emplace(key, std::move(v)).second)
            parse_fail(origin, lineno, "duplicate key '" + key + "'");
    }
    return doc;
}

// ---------------------------------------------------------------------------
// typed access with unknown-key detection

namespace {

class Reader {
public:
    Reader(const Table* table, std::string path) : table_(table), path_(std::move(path)) {}

    bool has(const std::string& key) const { return table_ && table_->values.count(key); }

    void num(const std::string& key, double& out) {
        if (auto* v = get(key)) {
            if (auto* d = std::get_if<double>(&v->data))
                out = *d;
            else
                fail(key, "expects a number");
        }
    }
    template <typename Int>
    void integer(const std::string& key, Int& out) {
        double d = static_cast<double>(out);
        num(key, d);
        if (has(key)) {
            if (std::floor(d) != d || d < 0.0) fail(key, "expects a non-negative integer");
            out = static_cast<Int>(d);
        }
    }
    void flag(const std::string& key, bool& out) {
        if (auto* v = get(key)) {
            if (auto* b = std::get_if<bool>(&v->data))
                out = *b;
            else
                fail(key, "expects true or false");
        }
    }
    void str(const std::string& key, std::string& out) {
        if (auto* v = get(key)) {
            if (auto* s = std::get_if<std::string>(&v->data))
                out = *s;
            else if (auto* d = std::get_if<double>(&v->data))
                out = format_double(*d);
            else
                fail(key, "expects a string");
        }
    }
    /// A speed given either in m/s (`key`) or km/h (`key_kmh`).
    void speed(const std::string& key, double& out) {
        if (has(key) && has(key + "_kmh")) fail(key, "given both in m/s and km/h");
        num(key, out);
        double kmh = 0.0;
        if (has(key + "_kmh")) {
            num(key + "_kmh", kmh);
            out = kmh * kKmhToMs;
        }
    }

    void finish() const {
        if (!table_) return;
        for (const auto& [k, v] : table_->values) {
            if (!used_.count(k)) {
                std::ostringstream os;
                os << "unknown key '" << path_ << (path_.empty() ? "" : ".") << k << "' (line "
                   << v.line << ")";
                throw ConfigError(os.str());
            }
        }
    }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        throw ConfigError(path_ + "." + key + " " + msg);
    }

private:
    const Value* get(const std::string& key) {
        if (!table_) return nullptr;
        auto it = table_->values.find(key);
        if (it == table_->values.end()) return nullptr;
        used_.insert(key);
        return &it->second;
    }

    const Table* table_;
    std::string path_;
    std::set<std::string> used_;
};

const Table* section(const Document& doc, const std::string& name) {
    auto it = doc.sections.find(name);
    return it == doc.sections.end() ? nullptr : &it->second;
}

} // namespace

control::CaccParams ScenarioConfig::effective_cacc() const {
    control::CaccParams p = cacc;
    if (omega_n_in_hz) p.omega_n = cacc.omega_n * 2.0 * M_PI;
    return p;
}

std::string_view to_string(ManeuverAction a) { return a == ManeuverAction::Join ? "join" : "leave"; }
std::string_view to_string(BroadcastAccel a) {
    return a == BroadcastAccel::Controller ? "controller" : "actual";
}

ScenarioConfig config_from_document(const Document& doc) {
    static const std::set<std::string> kSections = {"",      "run",      "platoon", "leader",
                                                    "cacc",  "lower",    "fallback", "protocol",
                                                    "channel", "beacon", "join",    "metrics"};
    for (const auto& [name, t] : doc.sections) {
        if (!kSections.count(name))
            throw ConfigError("unknown section [" + name + "] (line " + std::to_string(t.line) + ")");
    }
    for (const auto& [name, v] : doc.arrays) {
        if (name != "maneuver")
            throw ConfigError("unknown table [[" + name + "]] (line " + std::to_string(v.front().line) + ")");
    }

    ScenarioConfig c;
    {
        Reader r(section(doc, ""), "");
        r.finish();
    }
    {
        Reader r(section(doc, "run"), "run");
        r.str("name", c.name);
        r.num("duration", c.duration);
        r.integer("seed", c.seed);
        r.num("tick", c.tick);
        r.num("trace_interval", c.trace_interval);
        r.finish();
    }
    {
        Reader r(section(doc, "platoon"), "platoon");
        r.integer("size", c.platoon_size);
        r.num("vehicle_length", c.vehicle_length);
        r.num("gap_des", c.cacc.gap_des);
        r.num("initial_spacing", c.initial_spacing);
        r.finish();
    }
    {
        Reader r(section(doc, "leader"), "leader");
        r.speed("mean_speed", c.leader.mean_speed);
        r.num("frequency", c.leader.frequency);
        r.speed("amplitude", c.leader.amplitude);
        r.finish();
    }
    {
        Reader r(section(doc, "cacc"), "cacc");
        r.num("c1", c.cacc.c1);
        r.num("xi", c.cacc.xi);
        r.num("omega_n", c.cacc.omega_n);
        std::string unit = c.omega_n_in_hz ? "hz" : "raw";
        r.str("omega_n_unit", unit);
        if (unit == "raw")
            c.omega_n_in_hz = false;
        else if (unit == "hz")
            c.omega_n_in_hz = true;
        else
            r.fail("omega_n_unit", "must be \"raw\" or \"hz\"");
        r.finish();
    }
    {
        Reader r(section(doc, "lower"), "lower");
        r.num("tau", c.lower.tau);
        r.num("accel_max", c.lower.accel_max);
        r.num("decel_max", c.lower.decel_max);
        r.flag("clamp", c.lower.clamp);
        r.finish();
    }
    {
        Reader r(section(doc, "fallback"), "fallback");
        r.num("headway", c.fallback.headway);
        r.num("lambda", c.fallback.lambda);
        r.num("speed_gain", c.fallback.speed_gain);
        r.num("distance_gain", c.fallback.distance_gain);
        r.speed("desired_speed", c.fallback.desired_speed);
        r.num("staleness_timeout", c.fallback.staleness_timeout);
        r.flag("radar_enabled", c.radar_enabled);
        r.num("radar_range", c.radar_range);
        r.finish();
    }
    {
        Reader r(section(doc, "protocol"), "protocol");
        r.flag("enabled", c.protocol.enabled);
        r.num("gamma", c.protocol.gamma);
        r.integer("beta", c.protocol.beta);
        r.num("ewma_weight", c.protocol.ewma_weight);
        r.num("theta", c.protocol.theta);
        r.num("tie_margin", c.protocol.tie_margin);
        r.num("follower_window", c.protocol.follower_window);
        r.num("handover_grace", c.protocol.handover_grace);
        r.num("retry_interval", c.protocol.retry_interval);
        r.integer("max_retries", c.protocol.max_retries);
        std::string ba(to_string(c.broadcast_accel));
        r.str("broadcast_accel", ba);
        if (ba == "controller")
            c.broadcast_accel = BroadcastAccel::Controller;
        else if (ba == "actual")
            c.broadcast_accel = BroadcastAccel::Actual;
        else
            r.fail("broadcast_accel", "must be \"controller\" or \"actual\"");
        r.finish();
    }
    {
        Reader r(section(doc, "channel"), "channel");
        std::string model(channel::to_string(c.channel.variant));
        r.str("model", model);
        auto v = channel::variant_from_string(model);
        if (!v) r.fail("model", "must be IDEAL, FREE_SPACE_SNR or LOGISTIC_PDR");
        c.channel.variant = *v;
        r.num("tx_power_dbm", c.channel.tx_power_dbm);
        r.num("frequency_hz", c.channel.frequency_hz);
        r.num("noise_floor_dbm", c.channel.noise_floor_dbm);
        r.num("snr_threshold_db", c.channel.snr_threshold_db);
        r.num("d50", c.channel.d50);
        r.num("slope", c.channel.slope);
        r.integer("packet_size", c.packet_size);
        r.finish();
    }
    {
        Reader r(section(doc, "beacon"), "beacon");
        r.num("interval", c.beacon.interval);
        r.num("jitter", c.beacon.jitter);
        r.finish();
    }
    {
        Reader r(section(doc, "join"), "join");
        r.num("spawn_margin", c.spawn_margin);
        r.finish();
    }
    {
        Reader r(section(doc, "metrics"), "metrics");
        r.num("conv_threshold", c.metrics.conv_threshold);
        r.num("settle_threshold", c.metrics.settle_threshold);
        r.num("settle_hold", c.metrics.settle_hold);
        r.num("vl_quiet", c.metrics.vl_quiet);
        r.finish();
    }
    if (auto it = doc.arrays.find("maneuver"); it != doc.arrays.end()) {
        for (std::size_t i = 0; i < it->second.size(); ++i) {
            Reader r(&it->second[i], "maneuver[" + std::to_string(i) + "]");
            ManeuverSpec m;
            r.num("time", m.time);
            std::string action = "join";
            if (!r.has("action")) r.fail("action", "is required");
            r.str("action", action);
            if (action == "join")
                m.action = ManeuverAction::Join;
            else if (action == "leave")
                m.action = ManeuverAction::Leave;
            else
                r.fail("action", "must be \"join\" or \"leave\"");
            r.str("vehicle", m.vehicle);
            r.num("request_distance", m.request_distance);
            r.finish();
            c.maneuvers.push_back(m);
        }
    }
    c.protocol.beacon_interval = c.beacon.interval;
    validate(c);
    return c;
}

void validate(const ScenarioConfig& c) {
    auto need = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    need(c.duration > 0.0, "run.duration must be > 0");
    need(c.tick > 0.0, "run.tick must be > 0");
    need(c.trace_interval >= c.tick, "run.trace_interval must be >= run.tick");
    need(std::fabs(std::round(c.trace_interval / c.tick) * c.tick - c.trace_interval) < 1e-9,
         "run.trace_interval must be a multiple of run.tick");
    need(c.platoon_size >= 1 && c.platoon_size < 60000, "platoon.size must be in [1, 60000)");
    need(c.vehicle_length > 0.0, "platoon.vehicle_length must be > 0");
    need(c.cacc.gap_des > 0.0, "platoon.gap_des must be > 0");
    need(c.initial_spacing > 0.0, "platoon.initial_spacing must be > 0");
    need(c.leader.frequency >= 0.0, "leader.frequency must be >= 0");
    need(c.leader.amplitude >= 0.0, "leader.amplitude must be >= 0");
    need(c.leader.mean_speed - c.leader.amplitude >= 0.0, "leader.mean_speed must be >= leader.amplitude");
    need(c.cacc.c1 >= 0.0 && c.cacc.c1 <= 1.0, "cacc.c1 must be in [0, 1]");
    need(c.cacc.xi >= 1.0, "cacc.xi must be >= 1");
    need(c.cacc.omega_n > 0.0, "cacc.omega_n must be > 0");
    need(c.lower.tau > 0.0, "lower.tau must be > 0");
    need(c.lower.accel_max > 0.0, "lower.accel_max must be > 0");
    need(c.lower.decel_max > 0.0, "lower.decel_max must be > 0");
    need(c.fallback.headway > 0.0, "fallback.headway must be > 0");
    need(c.fallback.lambda > 0.0, "fallback.lambda must be > 0");
    need(c.fallback.speed_gain > 0.0, "fallback.speed_gain must be > 0");
    need(c.fallback.staleness_timeout > 0.0, "fallback.staleness_timeout must be > 0");
    need(c.radar_range > 0.0, "fallback.radar_range must be > 0");
    need(c.protocol.gamma >= 0.0 && c.protocol.gamma <= 1.0, "protocol.gamma must be in [0, 1]");
    need(c.protocol.beta >= 1, "protocol.beta must be >= 1");
    need(c.protocol.ewma_weight > 0.0 && c.protocol.ewma_weight <= 1.0,
         "protocol.ewma_weight must be in (0, 1]");
    need(c.protocol.follower_window > 0.0, "protocol.follower_window must be > 0");
    need(c.protocol.handover_grace >= 0.0, "protocol.handover_grace must be >= 0");
    need(c.protocol.retry_interval > 0.0, "protocol.retry_interval must be > 0");
    need(c.channel.d50 > 0.0, "channel.d50 must be > 0");
    need(c.channel.slope > 0.0, "channel.slope must be > 0");
    need(c.channel.frequency_hz > 0.0, "channel.frequency_hz must be > 0");
    need(c.packet_size > 0, "channel.packet_size must be > 0");
    need(c.beacon.interval > 0.0, "beacon.interval must be > 0");
    need(c.beacon.jitter >= 0.0 && c.beacon.jitter < c.beacon.interval / 2,
         "beacon.jitter must be in [0, interval/2)");
    need(c.spawn_margin >= 0.0, "join.spawn_margin must be >= 0");
    need(c.metrics.conv_threshold > 0.0, "metrics.conv_threshold must be > 0");
    need(c.metrics.settle_threshold > 0.0, "metrics.settle_threshold must be > 0");
    need(c.metrics.settle_hold >= 0.0, "metrics.settle_hold must be >= 0");
    need(c.metrics.vl_quiet > 0.0, "metrics.vl_quiet must be > 0");
    for (std::size_t i = 0; i < c.maneuvers.size(); ++i) {
        const auto& m = c.maneuvers[i];
        std::string p = "maneuver[" + std::to_string(i) + "]";
        need(m.time >= 0.0 && m.time <= c.duration, p + ".time must be within the run");
        if (m.action == ManeuverAction::Join) {
            need(m.request_distance > 0.0, p + ".request_distance must be > 0");
        } else {
            bool named = m.vehicle == "random_member" || m.vehicle == "random_vl";
            bool numeric = !m.vehicle.empty() &&
                           m.vehicle.find_first_not_of("0123456789") == std::string::npos;
            need(named || numeric, p + ".vehicle must be an id, \"random_member\" or \"random_vl\"");
            if (numeric) need(std::stoul(m.vehicle) != 0, p + ".vehicle cannot be the platoon leader");
        }
    }
}

ScenarioConfig parse_scenario(std::string_view text, std::string_view origin) {
    return config_from_document(parse_document(text, origin));
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path.string());
}

std::string to_text(const ScenarioConfig& c) {
    std::ostringstream os;
    auto num = [](double v) { return format_double(v); };
    auto b = [](bool v) { return v ? "true" : "false"; };
    auto quoted = [](const std::string& s) {
        std::string out = "\"";
        for (char ch : s) {
            if (ch == '"' || ch == '\\') out.push_back('\\');
            out.push_back(ch);
        }
        return out + "\"";
    };
    os << "[run]\n"
       << "name = " << quoted(c.name) << "\n"
       << "duration = " << num(c.duration) << "\n"
       << "seed = " << c.seed << "\n"
       << "tick = " << num(c.tick) << "\n"
       << "trace_interval = " << num(c.trace_interval) << "\n\n"
       << "[platoon]\n"
       << "size = " << c.platoon_size << "\n"
       << "vehicle_length = " << num(c.vehicle_length) << "\n"
       << "gap_des = " << num(c.cacc.gap_des) << "\n"
       << "initial_spacing = " << num(c.initial_spacing) << "\n\n"
       << "[leader]\n"
       << "mean_speed = " << num(c.leader.mean_speed) << "\n"
       << "frequency = " << num(c.leader.frequency) << "\n"
       << "amplitude = " << num(c.leader.amplitude) << "\n\n"
       << "[cacc]\n"
       << "c1 = " << num(c.cacc.c1) << "\n"
       << "xi = " << num(c.cacc.xi) << "\n"
       << "omega_n = " << num(c.cacc.omega_n) << "\n"
       << "omega_n_unit = " << (c.omega_n_in_hz ? "\"hz\"" : "\"raw\"") << "\n\n"
       << "[lower]\n"
       << "tau = " << num(c.lower.tau) << "\n"
       << "accel_max = " << num(c.lower.accel_max) << "\n"
       << "decel_max = " << num(c.lower.decel_max) << "\n"
       << "clamp = " << b(c.lower.clamp) << "\n\n"
       << "[fallback]\n"
       << "headway = " << num(c.fallback.headway) << "\n"
       << "lambda = " << num(c.fallback.lambda) << "\n"
       << "speed_gain = " << num(c.fallback.speed_gain) << "\n"
       << "distance_gain = " << num(c.fallback.distance_gain) << "\n"
       << "desired_speed = " << num(c.fallback.desired_speed) << "\n"
       << "staleness_timeout = " << num(c.fallback.staleness_timeout) << "\n"
       << "radar_enabled = " << b(c.radar_enabled) << "\n"
       << "radar_range = " << num(c.radar_range) << "\n\n"
       << "[protocol]\n"
       << "enabled = " << b(c.protocol.enabled) << "\n"
       << "gamma = " << num(c.protocol.gamma) << "\n"
       << "beta = " << c.protocol.beta << "\n"
       << "ewma_weight = " << num(c.protocol.ewma_weight) << "\n"
       << "theta = " << num(c.protocol.theta) << "\n"
       << "tie_margin = " << num(c.protocol.tie_margin) << "\n"
       << "follower_window = " << num(c.protocol.follower_window) << "\n"
       << "handover_grace = " << num(c.protocol.handover_grace) << "\n"
       << "retry_interval = " << num(c.protocol.retry_interval) << "\n"
       << "max_retries = " << c.protocol.max_retries << "\n"
       << "broadcast_accel = " << quoted(std::string(to_string(c.broadcast_accel))) << "\n\n"
       << "[channel]\n"
       << "model = " << quoted(std::string(channel::to_string(c.channel.variant))) << "\n"
       << "tx_power_dbm = " << num(c.channel.tx_power_dbm) << "\n"
       << "frequency_hz = " << num(c.channel.frequency_hz) << "\n"
       << "noise_floor_dbm = " << num(c.channel.noise_floor_dbm) << "\n"
       << "snr_threshold_db = " << num(c.channel.snr_threshold_db) << "\n"
       << "d50 = " << num(c.channel.d50) << "\n"
       << "slope = " << num(c.channel.slope) << "\n"
       << "packet_size = " << c.packet_size << "\n\n"
       << "[beacon]\n"
       << "interval = " << num(c.beacon.interval) << "\n"
       << "jitter = " << num(c.beacon.jitter) << "\n\n"
       << "[join]\n"
       << "spawn_margin = " << num(c.spawn_margin) << "\n\n"
       << "[metrics]\n"
       << "conv_threshold = " << num(c.metrics.conv_threshold) << "\n"
       << "settle_threshold = " << num(c.metrics.settle_threshold) << "\n"
       << "settle_hold = " << num(c.metrics.settle_hold) << "\n"
       << "vl_quiet = " << num(c.metrics.vl_quiet) << "\n";
    for (const auto& m : c.maneuvers) {
        os << "\n[[maneuver]]\n"
           << "time = " << num(m.time) << "\n"
           << "action = " << quoted(std::string(to_string(m.action))) << "\n";
        if (!m.vehicle.empty()) os << "vehicle = " << quoted(m.vehicle) << "\n";
        os << "request_distance = " << num(m.request_distance) << "\n";
    }
    return os.str();
}

} // namespace lplatoon::scenario
