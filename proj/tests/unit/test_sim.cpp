#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "lplatoon/sim/kernel.hpp"
#include "lplatoon/sim/rng.hpp"

using namespace lplatoon;
using namespace lplatoon::sim;

TEST_CASE("schedule: event fires at its time") {
    Kernel k(0.01);
    double fired = -1.0;
    k.schedule(0.1, EventClass::Timer, [&] { fired = k.now(); });
    k.run_until(1.0);
    CHECK(fired == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("schedule: equal times fire in insertion order") {
    Kernel k(0.01);
    std::vector<int> order;
    for (int i = 0; i < 5; ++i) k.schedule(0.1, EventClass::Timer, [&, i] { order.push_back(i); });
    k.run_until(0.2);
    CHECK(order == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("schedule: the past is rejected") {
    Kernel k(0.01);
    CHECK_THROWS_AS(k.schedule(-1.0, EventClass::Timer, [] {}), ScheduleError);
    k.run_until(1.0);
    CHECK_THROWS_AS(k.schedule(0.5, EventClass::Timer, [] {}), ScheduleError);
}

TEST_CASE("cancelled events never fire") {
    Kernel k(0.01);
    int n = 0;
    auto h = k.schedule(0.1, EventClass::Timer, [&] { ++n; });
    k.schedule(0.2, EventClass::Timer, [&] { n += 10; });
    CHECK(k.cancel(h));
    CHECK_FALSE(k.cancel(h));
    k.run_until(1.0);
    CHECK(n == 10);
}

TEST_CASE("run_until: empty queue runs exactly t_end/tick ticks") {
    Kernel k(0.01);
    std::uint64_t ticks = 0;
    double last = 0.0;
    bool monotone = true;
    k.set_tick_handler([&](double t) {
        ++ticks;
        if (t <= last) monotone = false;
        last = t;
    });
    CHECK(k.run_until(100.0) == doctest::Approx(100.0));
    CHECK(ticks == 10000);
    CHECK(k.ticks_executed() == 10000);
    CHECK(monotone);
    CHECK(last == doctest::Approx(100.0));
}

TEST_CASE("run_until: five ticks precede an event at 0.05") {
    Kernel k(0.01);
    int ticks = 0;
    int ticks_at_event = -1;
    k.set_tick_handler([&](double) { ++ticks; });
    k.schedule(0.05, EventClass::Delivery, [&] { ticks_at_event = ticks; });
    k.run_until(0.1);
    CHECK(ticks_at_event == 5);
}

TEST_CASE("run_until: t_end equal to now does nothing") {
    Kernel k(0.01);
    int ticks = 0;
    k.set_tick_handler([&](double) { ++ticks; });
    k.run_until(0.0);
    CHECK(ticks == 0);
    CHECK(k.events_executed() == 0);
    CHECK(k.now() == 0.0);
}

TEST_CASE("equal timestamps: tick, then delivery, then timer") {
    Kernel k(0.01);
    std::vector<char> seen;
    k.set_tick_handler([&](double t) {
        if (std::fabs(t - 0.03) < 1e-9) seen.push_back('T');
    });
    k.schedule(0.03, EventClass::Timer, [&] { seen.push_back('M'); });
    k.schedule(0.03, EventClass::Delivery, [&] { seen.push_back('D'); });
    k.run_until(0.05);
    CHECK(seen == std::vector<char>{'T', 'D', 'M'});
}

TEST_CASE("events scheduled from callbacks at the current time still run") {
    Kernel k(0.01);
    int n = 0;
    k.schedule(0.02, EventClass::Delivery, [&] {
        k.schedule(k.now(), EventClass::Timer, [&] { ++n; });
    });
    k.run_until(0.02);
    CHECK(n == 1);
}

TEST_CASE("clock: now is a tick multiple at tick points and never decreases") {
    SimClock c(0.01);
    for (int i = 0; i < 250; ++i) c.step_tick();
    CHECK(c.now() == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(c.ticks() == 250);
    CHECK_THROWS(c.advance_to(1.0));
}

TEST_CASE("draw_uniform: same seed, stream and index give the same value") {
    RngRegistry a(42), b(42);
    a.add_stream("channel");
    b.add_stream("channel");
    for (int i = 0; i < 100; ++i) CHECK(draw_uniform(a, "channel") == draw_uniform(b, "channel"));
    CHECK(counter_uniform(7, 3) == counter_uniform(7, 3));
}

TEST_CASE("draw_uniform: unknown stream is an error") {
    RngRegistry r(1);
    CHECK_THROWS_AS(draw_uniform(r, "nope"), UnknownStreamError);
}

TEST_CASE("adding a stream does not perturb another stream") {
    RngRegistry a(9), b(9);
    a.add_stream("beacon");
    b.add_stream("beacon");
    b.add_stream("channel");
    for (int i = 0; i < 50; ++i) {
        draw_uniform(b, "channel");
        CHECK(draw_uniform(a, "beacon") == draw_uniform(b, "beacon"));
    }
}

TEST_CASE("10^5 draws have mean 0.5 +- 0.01 and stay in [0, 1)") {
    RngRegistry r(123);
    r.add_stream("x");
    double sum = 0.0;
    bool in_range = true;
    for (int i = 0; i < 100000; ++i) {
        double u = draw_uniform(r, "x");
        if (!(u >= 0.0 && u < 1.0)) in_range = false;
        sum += u;
    }
    CHECK(in_range);
    CHECK(std::fabs(sum / 1e5 - 0.5) < 0.01);
}

TEST_CASE("two streams of one seed are independent (chi-square, 10x10 cells)") {
    RngRegistry r(2024);
    r.add_stream("a");
    r.add_stream("b");
    constexpr int kN = 100000;
    std::array<std::array<int, 10>, 10> cells{};
    for (int i = 0; i < kN; ++i) {
        int x = static_cast<int>(draw_uniform(r, "a") * 10);
        int y = static_cast<int>(draw_uniform(r, "b") * 10);
        ++cells[x][y];
    }
    const double expected = kN / 100.0;
    double chi2 = 0.0;
    for (const auto& row : cells)
        for (int c : row) chi2 += (c - expected) * (c - expected) / expected;
    // 99 degrees of freedom, 0.999 quantile
    CHECK(chi2 < 148.23);
}

TEST_CASE("substreams with different labels differ") {
    RngRegistry r(5);
    auto s1 = r.substream("channel", 1, 2);
    auto s2 = r.substream("channel", 2, 1);
    auto s3 = r.substream("channel", 1, 2);
    CHECK(s1.key() != s2.key());
    CHECK(s1.key() == s3.key());
    CHECK(s1.uniform() == s3.uniform());
}
