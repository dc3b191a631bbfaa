#include <doctest.h>

#include <cmath>

#include "lplatoon/dynamics.hpp"

using namespace lplatoon;
using namespace lplatoon::dynamics;

TEST_CASE("leader_speed: 100 km/h at t=0") {
    LeaderProfile p;
    CHECK(leader_speed(p, 0.0) == doctest::Approx(27.7778).epsilon(1e-4));
}

TEST_CASE("leader_speed: quarter period reaches 105 km/h") {
    LeaderProfile p;
    CHECK(p.amplitude == doctest::Approx(1.3889).epsilon(1e-3));
    CHECK(leader_speed(p, 1.25) == doctest::Approx(105.0 / 3.6).epsilon(1e-9));
    CHECK(leader_speed(p, 1.25) == doctest::Approx(29.17).epsilon(1e-3));
    CHECK(leader_speed(p, 3.75) == doctest::Approx(95.0 / 3.6).epsilon(1e-9));
}

TEST_CASE("leader_speed: zero amplitude is constant") {
    LeaderProfile p;
    p.amplitude = 0.0;
    for (double t : {0.0, 0.7, 13.0, 199.9}) CHECK(leader_speed(p, t) == doctest::Approx(27.7778).epsilon(1e-4));
}

TEST_CASE("leader_accel is the derivative of leader_speed") {
    LeaderProfile p;
    const double h = 1e-5;
    for (double t : {0.0, 0.3, 1.1, 2.6, 4.9}) {
        double fd = (leader_speed(p, t + h) - leader_speed(p, t - h)) / (2 * h);
        CHECK(leader_accel(p, t) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("profile validation") {
    LeaderProfile p;
    p.mean_speed = 1.0;
    p.amplitude = 2.0;
    CHECK_THROWS_AS(validate(p), Error);
    LowerController l;
    l.tau = 0.0;
    CHECK_THROWS_AS(validate(l), Error);
}

TEST_CASE("actuate: first-order lag step") {
    LowerController l;
    CHECK(actuate(l, 0.0, 1.0, 0.01) == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(actuate(l, 0.7, 0.7, 0.01) == 0.7);
}

TEST_CASE("actuate: clamp holds the braking limit") {
    LowerController l;
    double a = 0.0;
    for (int i = 0; i < 1000; ++i) {
        a = actuate(l, a, -10.0, 0.01);
        REQUIRE(a >= -3.0);
    }
    CHECK(a == doctest::Approx(-3.0));
    l.clamp = false;
    double b = 0.0;
    for (int i = 0; i < 1000; ++i) b = actuate(l, b, -10.0, 0.01);
    CHECK(b < -9.9);
}

TEST_CASE("actuate: error decays by e per tau") {
    LowerController l;
    const double target = 1.5;
    double a = 0.0;
    for (int i = 0; i < 50; ++i) a = actuate(l, a, target, 0.01);
    double ratio = std::fabs(a - target) / target;
    CHECK(ratio == doctest::Approx(std::exp(-1.0)).epsilon(0.05));
}

TEST_CASE("integrate: examples") {
    VehicleState s;
    s.speed = 10.0;
    auto a = integrate(s, 0.01);
    CHECK(a.position == doctest::Approx(0.1).epsilon(1e-12));

    VehicleState r;
    r.speed = 0.0;
    r.accel = -1.0;
    CHECK(integrate(r, 0.01).speed == 0.0);

    VehicleState u;
    u.speed = 10.0;
    u.accel = 2.0;
    auto b = integrate(u, 0.01);
    CHECK(b.speed == doctest::Approx(10.02).epsilon(1e-12));
    CHECK(b.position == doctest::Approx(0.1002).epsilon(1e-12));
}

TEST_CASE("integrate: constant accel from rest for 10 s") {
    VehicleState s;
    s.accel = 1.0;
    for (int i = 0; i < 1000; ++i) s = integrate(s, 0.01);
    CHECK(std::fabs(s.speed - 10.0) < 0.001);
    CHECK(std::fabs(s.position - 50.05) < 0.1);
}

TEST_CASE("rear is position minus length") {
    VehicleState s;
    s.position = 100.0;
    s.length = 13.0;
    CHECK(s.rear() == 87.0);
}
