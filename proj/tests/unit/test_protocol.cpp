#include <doctest.h>

#include <cmath>
#include <vector>

#include "lplatoon/protocol/beacon.hpp"
#include "lplatoon/protocol/election.hpp"
#include "lplatoon/protocol/link_estimator.hpp"
#include "lplatoon/sim/rng.hpp"

using namespace lplatoon;
using namespace lplatoon::protocol;

namespace {

Beacon sample_beacon() {
    Beacon b;
    b.msg_type = MsgType::Beacon;
    b.vehicle_id = 12;
    b.platoon_id = 1;
    b.seq = 4711;
    b.timestamp_ms = 123456789;
    b.position = -396.25;
    b.speed = 27.777;
    b.accel = -0.125;
    b.length = 13.0;
    b.leader_ref_id = 10;
    b.platoon_position = 12;
    b.flags = flags::kVirtualLeader;
    b.vlqi = 1.4;
    b.prr_leader = 0.9;
    b.selected_vl_id = 20;
    b.new_vl_id = 12;
    b.old_vl_id = kNullId;
    return b;
}

} // namespace

TEST_CASE("codec: frame is 228 bytes and round trips") {
    Beacon b = sample_beacon();
    Frame f = encode_beacon(b);
    CHECK(f.size() == 228);
    CHECK(decode_beacon(f) == b);
    CHECK(hex_dump(f).size() == 456);
}

TEST_CASE("codec: little-endian header and null ids") {
    Beacon b;
    b.vehicle_id = 0x01020304;
    Frame f = encode_beacon(b);
    CHECK(f[4] == std::byte{0x04});
    CHECK(f[7] == std::byte{0x01});
    for (std::size_t o : {80u, 84u, 88u})
        for (std::size_t i = 0; i < 4; ++i) CHECK(f[o + i] == std::byte{0xFF});
    for (std::size_t i = kPaddingOffset; i < kBeaconSize; ++i) REQUIRE(f[i] == std::byte{0});
}

TEST_CASE("codec: malformed input is rejected") {
    Frame f = encode_beacon(sample_beacon());
    CHECK_THROWS_AS(decode_beacon(std::span<const std::byte>(f.data(), 227)), DecodeError);
    Frame bad_type = f;
    bad_type[0] = std::byte{9};
    CHECK_THROWS_AS(decode_beacon(bad_type), DecodeError);
    Frame dirty = f;
    dirty[200] = std::byte{1};
    CHECK_THROWS_AS(decode_beacon(dirty), DecodeError);
}

TEST_CASE("codec: random beacons round trip, random bytes never crash") {
    sim::RngStream r(sim::derive_key(99, "fuzz"));
    auto u32 = [&] { return static_cast<std::uint32_t>(r.uniform() * 4294967296.0); };
    for (int k = 0; k < 2000; ++k) {
        Beacon b;
        b.msg_type = static_cast<MsgType>(u32() % 5);
        b.vehicle_id = u32();
        b.platoon_id = u32();
        b.seq = u32();
        b.timestamp_ms = (std::uint64_t(u32()) << 32) | u32();
        b.position = r.uniform(-1e5, 1e5);
        b.speed = r.uniform(0, 40);
        b.accel = r.uniform(-5, 5);
        b.length = r.uniform(4, 20);
        b.leader_ref_id = u32();
        b.platoon_position = static_cast<std::uint16_t>(u32());
        b.flags = static_cast<std::uint16_t>(u32());
        b.vlqi = r.uniform(-2, 30);
        b.prr_leader = r.uniform();
        b.selected_vl_id = u32();
        b.new_vl_id = u32();
        b.old_vl_id = u32();
        REQUIRE(decode_beacon(encode_beacon(b)) == b);
    }
    int rejected = 0;
    for (int k = 0; k < 2000; ++k) {
        Frame f;
        for (auto& x : f) x = static_cast<std::byte>(u32() & 0xFF);
        try {
            decode_beacon(f);
        } catch (const DecodeError&) {
            ++rejected;
        }
    }
    CHECK(rejected == 2000);
}

TEST_CASE("ewmprr_update: examples") {
    CHECK(ewmprr_update(0.5, false, 0.1) == doctest::Approx(0.45).epsilon(1e-12));
    double p = 0.0;
    for (int i = 0; i < 10; ++i) p = ewmprr_update(p, true, 0.1);
    CHECK(p == doctest::Approx(1.0 - std::pow(0.9, 10)).epsilon(1e-12));
    CHECK(p == doctest::Approx(0.651).epsilon(1e-3));
}

TEST_CASE("link estimator: sequence gap charges misses") {
    LinkEstimator est(0.1, 0.1);
    CHECK(est.on_receive(3, 7, 0.0) == 0);
    CHECK(est.prr(3) == 1.0);
    CHECK(est.on_receive(3, 10, 0.3) == 2);
    CHECK(est.prr(3) == doctest::Approx(0.9 * (0.9 * 0.9) + 0.1).epsilon(1e-12));
    CHECK(est.prr(42) == 0.0);
}

TEST_CASE("link estimator: regular beacons charge nothing") {
    LinkEstimator est(0.1, 0.1);
    for (std::uint32_t s = 0; s < 100; ++s) {
        double t = s * 0.1;
        CHECK(est.on_beacon_slot_elapsed(1, t) == 0);
        CHECK(est.on_receive(1, s, t) == 0);
    }
    CHECK(est.prr(1) == 1.0);
}

TEST_CASE("link estimator: one silent second charges 9-10 misses once") {
    LinkEstimator est(0.1, 0.1);
    est.on_receive(1, 0, 0.0);
    std::uint32_t charged = 0;
    for (int k = 1; k <= 100; ++k) charged += est.on_beacon_slot_elapsed(1, k * 0.01);
    CHECK(charged >= 9);
    CHECK(charged <= 10);
    double before = est.prr(1);
    // the gap the next frame reveals was already paid for
    CHECK(est.on_receive(1, 10, 1.0) <= 1);
    CHECK(est.prr(1) >= before * 0.9);
}

TEST_CASE("link estimator: Bernoulli consistency after 500 slots") {
    // stationary sd is sqrt(w/(2-w) p(1-p)); p=0.97 gives a 2-sigma band < 0.1
    for (double p : {0.97, 0.03}) {
        int inside = 0;
        const int seeds = 200;
        for (int s = 0; s < seeds; ++s) {
            sim::RngStream r(sim::derive_key(s, "bern"));
            double est = 1.0;
            for (int k = 0; k < 500; ++k) est = ewmprr_update(est, r.uniform() < p, 0.1);
            if (std::fabs(est - p) <= 0.1) ++inside;
        }
        CHECK(inside >= 0.95 * seeds);
    }
}

TEST_CASE("link estimator: Bernoulli consistency at p = 0.5") {
    int inside = 0;
    const int seeds = 200;
    for (int s = 0; s < seeds; ++s) {
        sim::RngStream r(sim::derive_key(s, "bern-half"));
        double est = 1.0;
        for (int k = 0; k < 500; ++k) est = ewmprr_update(est, r.uniform() < 0.5, 0.1);
        if (std::fabs(est - 0.5) <= 0.1) ++inside;
    }
    CHECK(inside >= 0.95 * seeds);
}

TEST_CASE("con_follow and vlqi: worked example") {
    std::vector<FollowerLink> a{{2, 1.0, 0.9}, {3, 0.9, 0.0}};
    std::vector<FollowerLink> b{{3, 1.0, 0.0}, {4, 0.9, 0.0}};
    CHECK(con_follow(a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(con_follow(b) == doctest::Approx(1.9).epsilon(1e-12));
    CHECK(con_follow({}) == 0.0);
    CHECK(vlqi(0.5, 1.0, con_follow(a)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(vlqi(0.5, 0.9, con_follow(b)) == doctest::Approx(1.4).epsilon(1e-12));
    CHECK(vlqi(1.0, 0.73, 5.0) == 0.73);
    CHECK(con_follow_from_report(0.5, 1.4, 0.9) == doctest::Approx(1.9).epsilon(1e-12));
}

TEST_CASE("election: worked example elects B") {
    std::vector<CandidateReport> r{{1, 1.0, 1.0}, {2, 1.4, 0.9}};
    auto got = elect_virtual_leader(r, {});
    REQUIRE(got);
    CHECK(*got == 2);
}

TEST_CASE("election: no coverage deficit means no election") {
    // followers all report PRR to the leader near 1, so con_follow ~ 0
    std::vector<CandidateReport> r{{1, 0.5 * 1.0 + 0.5 * 0.02, 1.0}, {2, 0.5 * 0.99 + 0.5 * 0.05, 0.99}};
    CHECK_FALSE(elect_virtual_leader(r, {}));
}

TEST_CASE("election: a lead held for 4 of 5 beacons is not enough") {
    ElectionTracker t;
    double now = 0.0;
    for (int k = 0; k < 4; ++k) {
        t.observe(7, 1.4, 0.9, now);
        t.observe(3, 1.0, 1.0, now);
        now += 0.1;
    }
    CHECK_FALSE(t.elect(now - 0.1));
    t.observe(7, 1.4, 0.9, now);
    auto got = t.elect(now);
    REQUIRE(got);
    CHECK(*got == 7);
    // one reception behind the top resets the streak
    t.observe(3, 2.0, 1.0, now + 0.05);
    t.observe(7, 1.4, 0.9, now + 0.1);
    CHECK(t.candidates().at(7).streak == 0);
}

TEST_CASE("election: ties go to the lower id") {
    std::vector<CandidateReport> r{{9, 1.4, 0.9}, {4, 1.4, 0.9}};
    auto got = elect_virtual_leader(r, {});
    REQUIRE(got);
    CHECK(*got == 4);
}

TEST_CASE("election: stale candidates are ignored") {
    ElectionTracker t;
    for (int k = 0; k < 5; ++k) t.observe(7, 1.4, 0.9, k * 0.1);
    CHECK(t.elect(0.45));
    CHECK_FALSE(t.elect(2.0));
}
