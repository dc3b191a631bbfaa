#pragma once

#include "lplatoon/types.hpp"

namespace lplatoon::dynamics {

/// Longitudinal state of one truck on a 1-D highway. `position` is the
/// front bumper; the body extends `length` metres behind it.
struct VehicleState {
    VehicleId id = kNullId;
    double position = 0.0;
    double speed = 0.0;
    double accel = 0.0;
    double length = 13.0;
    int lane = 0;

    double rear() const { return position - length; }
};

/// First-order engine lag between commanded and realised acceleration.
struct LowerController {
    double tau = 0.5;
    double accel_max = 2.0;
    double decel_max = 3.0;
    bool clamp = true;
};

/// Sinusoidal speed profile followed by the platoon leader.
struct LeaderProfile {
    double mean_speed = 100.0 * kKmhToMs;
    double frequency = 0.2;
    double amplitude = 5.0 * kKmhToMs;
};

void validate(const LowerController& lower);
void validate(const LeaderProfile& profile);

double leader_speed(const LeaderProfile& profile, double t);
/// Analytic derivative of leader_speed.
double leader_accel(const LeaderProfile& profile, double t);

/// a <- a + (dt/tau)(desired - a), then clamped when enabled.
double actuate(const LowerController& lower, double actual_accel, double desired_accel, double dt);

/// Semi-implicit Euler: speed first (never negative), then position.
VehicleState integrate(VehicleState state, double dt);

} // namespace lplatoon::dynamics
