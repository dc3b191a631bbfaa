#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lplatoon/scenario/config.hpp"
#include "lplatoon/scenario/metrics.hpp"
#include "lplatoon/scenario/records.hpp"
#include "lplatoon/scenario/runner.hpp"
#include "lplatoon/scenario/simulator.hpp"

using namespace lplatoon;
using namespace lplatoon::scenario;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = LPLATOON_SCENARIO_DIR;

std::string error_of(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

TraceRecord row(double t, VehicleId v, std::optional<double> eps, std::string role = "MEMBER") {
    TraceRecord r;
    r.time = t;
    r.vehicle = v;
    r.eps = eps;
    r.gap = eps ? std::optional<double>(20.0 + *eps) : std::nullopt;
    r.mode = "CACC";
    r.role = std::move(role);
    r.leader_ref = 0;
    return r;
}

ScenarioConfig short_run(int size, double duration) {
    ScenarioConfig cfg = load_scenario(kScenarios / "paper-defaults.toml");
    cfg.platoon_size = size;
    cfg.duration = duration;
    return cfg;
}

} // namespace

TEST_CASE("config: empty text gives the defaults") {
    ScenarioConfig c = parse_scenario("");
    CHECK(c.platoon_size == 30);
    CHECK(c.cacc.gap_des == 20.0);
    CHECK(c.cacc.omega_n == doctest::Approx(0.2));
    CHECK(c.protocol.beta == 5);
    CHECK(c.protocol.gamma == 0.5);
    CHECK(c.channel.variant == channel::Variant::LogisticPdr);
    CHECK(c.packet_size == 228);
    CHECK(c.beacon.interval == doctest::Approx(0.1));
    CHECK(c.leader.mean_speed == doctest::Approx(100.0 / 3.6));
}

TEST_CASE("config: shipped defaults file validates") {
    ScenarioConfig c = load_scenario(kScenarios / "paper-defaults.toml");
    CHECK(c.name == "paper-defaults");
    CHECK(c.duration == 200.0);
    CHECK_NOTHROW(validate(c));
}

TEST_CASE("config: unknown keys and bad values name the key") {
    std::string unknown = error_of("[platoon]\ngapdes = 20\n");
    CHECK(unknown.find("platoon.gapdes") != std::string::npos);
    CHECK(unknown.find("line 2") != std::string::npos);
    std::string negative = error_of("[platoon]\ngap_des = -5\n");
    CHECK(negative.find("gap_des") != std::string::npos);
    CHECK_FALSE(error_of("[cacc]\nxi = 0.5\n").empty());
    CHECK_FALSE(error_of("[channel]\nmodel = \"RAYLEIGH\"\n").empty());
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.toml"), Error);
}

TEST_CASE("config: to_text round trips") {
    ScenarioConfig c = load_scenario(kScenarios / "leave-vl.toml");
    c.seed = 17;
    c.cacc.c1 = 0.3;
    c.channel.d50 = 380.5;
    std::string text = to_text(c);
    ScenarioConfig back = parse_scenario(text);
    CHECK(to_text(back) == text);
    CHECK(back.maneuvers.size() == c.maneuvers.size());
    CHECK(back.seed == 17);
}

TEST_CASE("records: trace and events survive a CSV round trip") {
    std::vector<TraceRecord> trace{row(0.1, 1, 0.125), row(0.1, 0, std::nullopt, "LEADER")};
    trace[0].prr_leader = 0.987654321;
    trace[0].speed = 27.77777777777778;
    std::stringstream ts;
    write_trace_header(ts);
    for (const auto& r : trace) write_trace_row(ts, r);
    CHECK(ts.str().rfind(std::string(kTraceHeader), 0) == 0);
    CHECK(read_trace(ts) == trace);

    std::vector<EventRecord> ev{{1.5, "ELECTION", 7, "by=0 old=none"}, {2.0, "LEADER_REF", 9, "from=0 to=7"}};
    std::stringstream es;
    write_events_header(es);
    for (const auto& e : ev) write_event_row(es, e);
    CHECK(read_events(es) == ev);
    CHECK(detail_field("by=0 old=none", "old") == std::optional<std::string>("none"));
    CHECK_FALSE(detail_field("by=0", "old"));

    std::stringstream bad("time,vehicle\n1,2\n");
    CHECK_THROWS_AS(read_trace(bad), Error);
}

TEST_CASE("records: doubles print short and parse back exactly") {
    for (double v : {0.1, 1.0 / 3.0, -0.0625, 1e-12, 123456.789})
        CHECK(parse_double(format_double(v), "v") == v);
    CHECK(format_double(0.1) == "0.1");
    CHECK(snap_time(0.30000000000000004) == 0.3);
}

TEST_CASE("metrics: constant 6 cm error gives a 0.06 mean") {
    std::vector<TraceRecord> trace;
    for (int k = 0; k <= 100; ++k) {
        double t = k * 0.1;
        trace.push_back(row(t, 0, std::nullopt, "LEADER"));
        trace.push_back(row(t, 1, k < 10 ? 2.0 : 0.06));
        trace.push_back(row(t, 2, k < 10 ? -1.0 : -0.06));
    }
    MetricsReport m = compute_metrics(trace, {}, {});
    CHECK(m.converged);
    CHECK(m.t_conv == doctest::Approx(1.0));
    CHECK(*m.vehicles[1].gap_mean == doctest::Approx(0.06));
    CHECK(*m.vehicles[2].gap_max == doctest::Approx(0.06));
}

TEST_CASE("metrics: VL completion is the end of the first burst") {
    std::vector<EventRecord> ev{{3.0, "LEADER_REF", 12, ""},
                                {4.5, "LEADER_REF", 13, ""},
                                {6.0, "LEADER_REF", 14, ""},
                                {40.0, "LEADER_REF", 15, ""}};
    MetricsReport m = compute_metrics({}, ev, {});
    CHECK(m.vl_completion == doctest::Approx(6.0));
    CHECK(m.last_ref_change == doctest::Approx(40.0));
}

TEST_CASE("metrics: settle time needs the full hold") {
    std::vector<TraceRecord> trace;
    for (int k = 0; k <= 100; ++k) {
        double t = k * 0.1;
        double e = (k >= 30 && k < 45) || k >= 60 ? 0.05 : 0.5;
        trace.push_back(row(t, 4, e));
    }
    auto s = settle_time(trace, 4, 0.0, 0.1, 2.0);
    REQUIRE(s);
    CHECK(*s == doctest::Approx(6.0));
    CHECK_FALSE(settle_time(trace, 4, 0.0, 0.1, 5.0));
}

TEST_CASE("metrics: text report") {
    MetricsReport m;
    m.converged = false;
    std::string t = to_text(m);
    CHECK(t.find("t_conv=did-not-converge") != std::string::npos);
}

TEST_CASE("simulate: same seed gives byte-identical output") {
    ScenarioConfig cfg = short_run(10, 20.0);
    fs::path a = fs::temp_directory_path() / "lplatoon-det-a";
    fs::path b = fs::temp_directory_path() / "lplatoon-det-b";
    fs::remove_all(a);
    fs::remove_all(b);
    run_to_directory(cfg, a);
    run_to_directory(cfg, b);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    for (const char* f : {kTraceFile, kEventsFile, kMetricsFile}) CHECK(slurp(a / f) == slurp(b / f));
    CHECK(slurp(a / kTraceFile).size() > 1000);
    MetricsReport again = recompute_metrics(a);
    CHECK(to_text(again) == slurp(a / kMetricsFile));

    cfg.seed = 2;
    RunResult other = simulate(cfg);
    RunResult first = simulate(short_run(10, 20.0));
    CHECK_FALSE(other.events == first.events);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("simulate: a one-vehicle platoon just follows the profile") {
    ScenarioConfig cfg = short_run(1, 10.0);
    RunResult r = simulate(cfg);
    REQUIRE_FALSE(r.trace.empty());
    for (const auto& row : r.trace) {
        CHECK(row.vehicle == 0);
        CHECK(row.role == "LEADER");
        CHECK_FALSE(row.eps);
    }
    // cruise control k_s through the lag tau: H(jw) = k / (k - tau w^2 + j w), transients gone by 10 s
    const double k = cfg.fallback.speed_gain, tau = cfg.lower.tau;
    const double w = 2.0 * M_PI * cfg.leader.frequency;
    const double re = k - tau * w * w, im = w;
    const double gain = k / std::hypot(re, im), phase = -std::atan2(im, re);
    const double t = r.trace.back().time;
    const double expected = cfg.leader.mean_speed + cfg.leader.amplitude * gain * std::sin(w * t + phase);
    CHECK(std::fabs(r.trace.back().speed - expected) < 0.01);
}

TEST_CASE("simulate: without the protocol, leader PDR falls off along the platoon") {
    ScenarioConfig cfg = short_run(30, 30.0);
    cfg.protocol.enabled = false;
    MetricsReport m = compute_metrics(simulate(cfg).trace, simulate(cfg).events, cfg.metrics);
    REQUIRE(m.vehicles[1].pdr);
    REQUIRE(m.vehicles[29].pdr);
    CHECK(*m.vehicles[1].pdr > 0.99);
    CHECK(*m.vehicles[29].pdr < 0.05);
    // far vehicles never do better than much nearer ones
    for (VehicleId v = 1; v + 3 < 30; ++v) CHECK(*m.vehicles[v + 3].pdr <= *m.vehicles[v].pdr + 0.02);
}

TEST_CASE("simulate: frames are recorded on request") {
    ScenarioConfig cfg = short_run(3, 1.0);
    RunOptions opt;
    opt.record_frames = true;
    RunResult r = simulate(cfg, opt);
    REQUIRE_FALSE(r.frames.empty());
    // "time sender hex", 228 bytes
    CHECK(r.frames.front().size() > 456);
}

TEST_CASE("cli: a missing scenario file exits with status 1") {
    std::string cmd = std::string(LPLATOON_CLI_PATH) + " validate --scenario /nonexistent.toml 2>/dev/null";
    int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 1);
    std::string ok = std::string(LPLATOON_CLI_PATH) + " validate --scenario " +
                     (kScenarios / "paper-defaults.toml").string() + " >/dev/null";
    CHECK(std::system(ok.c_str()) == 0);
}
