#pragma once

#include <optional>
#include <string_view>

#include "lplatoon/dynamics.hpp"

namespace lplatoon::control {

/// Rajamani-style CACC tuning. `omega_n` is used numerically as given.
struct CaccParams {
    double c1 = 0.5;
    double xi = 1.0;
    double omega_n = 0.2;
    double gap_des = 20.0;
};

struct CaccGains {
    double a1 = 0.0; ///< predecessor acceleration
    double a2 = 0.0; ///< leader acceleration
    double a3 = 0.0; ///< spacing-error rate
    double a4 = 0.0; ///< speed difference to the leader
    double a5 = 0.0; ///< spacing error
};

/// Kinematics of another vehicle as last received, `age` seconds old.
struct RemoteKinematics {
    double position = 0.0;
    double speed = 0.0;
    double accel = 0.0;
    double length = 0.0;
    double age = 0.0;
};

struct LeaderReference {
    double speed = 0.0;
    double accel = 0.0;
    double age = 0.0;
};

struct ControlInputs {
    dynamics::VehicleState ego;
    std::optional<RemoteKinematics> predecessor;
    std::optional<LeaderReference> leader;
};

struct FallbackParams {
    double headway = 1.2;          ///< T, s
    double lambda = 0.1;           ///< 1/s
    double speed_gain = 1.0;       ///< k_s, 1/s
    double distance_gain = 0.7;    ///< k_d; accepted but not used by any law
    double desired_speed = 130.0 * kKmhToMs;
    double staleness_timeout = 0.5;
};

enum class Mode { Cacc, Acc, CcHold, CcTarget };

std::string_view to_string(Mode m);
std::optional<Mode> mode_from_string(std::string_view s);

void validate(const CaccParams& p);
void validate(const FallbackParams& p);

/// Throws lplatoon::Error for xi < 1 or any other invalid parameter.
CaccGains compute_alphas(const CaccParams& params);

/// Positive when the bumper-to-bumper gap is smaller than gap_des.
double spacing_error(const ControlInputs& in, double gap_des);
double spacing_error_rate(const ControlInputs& in);

/// Unclamped desired acceleration; requires predecessor and leader data.
double cacc_accel(const CaccParams& params, const ControlInputs& in);
double cacc_accel(const CaccParams& params, const CaccGains& gains, const ControlInputs& in);

/// Constant-time-headway ACC from radar-style predecessor data.
double acc_accel(const FallbackParams& fb, const ControlInputs& in);

/// Proportional speed hold towards `target_speed`.
double cc_accel(const FallbackParams& fb, const dynamics::VehicleState& ego, double target_speed);

/// What the mode policy needs to know about a following vehicle.
struct ModeView {
    bool in_platoon = true;
    std::optional<double> predecessor_age;
    std::optional<double> leader_age;
    bool radar_enabled = false;
    bool predecessor_in_radar_range = false;
};

Mode select_mode(const ModeView& view, const FallbackParams& fb);

} // namespace lplatoon::control
