#include "lplatoon/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lplatoon::dynamics {

void validate(const LowerController& lower) {
    if (!(lower.tau > 0.0)) throw Error("engine lag tau must be > 0");
    if (lower.accel_max < 0.0 || lower.decel_max < 0.0)
        throw Error("acceleration limits must be non-negative");
}

void validate(const LeaderProfile& profile) {
    if (profile.mean_speed - std::abs(profile.amplitude) < 0.0)
        throw Error("leader mean speed must be at least the oscillation amplitude");
    if (profile.frequency < 0.0) throw Error("leader oscillation frequency must be >= 0");
}

double leader_speed(const LeaderProfile& profile, double t) {
    return profile.mean_speed +
           profile.amplitude * std::sin(2.0 * std::numbers::pi * profile.frequency * t);
}

double leader_accel(const LeaderProfile& profile, double t) {
    double w = 2.0 * std::numbers::pi * profile.frequency;
    return profile.amplitude * w * std::cos(w * t);
}

double actuate(const LowerController& lower, double actual_accel, double desired_accel,
               double dt) {
    double a = actual_accel + (dt / lower.tau) * (desired_accel - actual_accel);
    if (lower.clamp) a = std::clamp(a, -lower.decel_max, lower.accel_max);
    return a;
}

VehicleState integrate(VehicleState state, double dt) {
    state.speed = std::max(0.0, state.speed + state.accel * dt);
    state.position += state.speed * dt;
    return state;
}

} // namespace lplatoon::dynamics
