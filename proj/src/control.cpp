#include "lplatoon/control.hpp"

#include <cmath>
#include <stdexcept>

namespace lplatoon::control {

std::string_view to_string(Mode m) {
    switch (m) {
    case Mode::Cacc: return "CACC";
    case Mode::Acc: return "ACC";
    case Mode::CcHold: return "CC_HOLD";
    case Mode::CcTarget: return "CC_TARGET";
    }
    return "?";
}

std::optional<Mode> mode_from_string(std::string_view s) {
    if (s == "CACC") return Mode::Cacc;
    if (s == "ACC") return Mode::Acc;
    if (s == "CC_HOLD") return Mode::CcHold;
    if (s == "CC_TARGET") return Mode::CcTarget;
    return std::nullopt;
}

void validate(const CaccParams& p) {
    if (!(p.c1 >= 0.0 && p.c1 <= 1.0)) throw Error("C1 must lie in [0, 1]");
    if (!(p.xi >= 1.0)) throw Error("damping ratio xi must be >= 1 (complex roots otherwise)");
    if (!(p.omega_n > 0.0)) throw Error("controller bandwidth omega_n must be > 0");
    if (!(p.gap_des > 0.0)) throw Error("desired gap must be > 0");
}

void validate(const FallbackParams& p) {
    if (!(p.headway > 0.0)) throw Error("headway T must be > 0");
    if (!(p.lambda > 0.0)) throw Error("ACC lambda must be > 0");
    if (!(p.speed_gain > 0.0)) throw Error("speed gain k_s must be > 0");
    if (!(p.staleness_timeout > 0.0)) throw Error("staleness timeout must be > 0");
    if (!(p.desired_speed >= 0.0)) throw Error("desired speed must be >= 0");
}

CaccGains compute_alphas(const CaccParams& params) {
    validate(params);
    const double c1 = params.c1;
    const double xi = params.xi;
    const double wn = params.omega_n;
    const double root = xi + std::sqrt(xi * xi - 1.0);
    CaccGains g;
    g.a1 = 1.0 - c1;
    g.a2 = c1;
    g.a3 = -(2.0 * xi - c1 * root) * wn;
    g.a4 = -c1 * root * wn;
    g.a5 = -wn * wn;
    return g;
}

double spacing_error(const ControlInputs& in, double gap_des) {
    if (!in.predecessor) throw Error("spacing error needs a predecessor");
    const auto& p = *in.predecessor;
    return in.ego.position - p.position + p.length + gap_des;
}

double spacing_error_rate(const ControlInputs& in) {
    if (!in.predecessor) throw Error("spacing error rate needs a predecessor");
    return in.ego.speed - in.predecessor->speed;
}

double cacc_accel(const CaccParams& params, const CaccGains& g, const ControlInputs& in) {
    if (!in.predecessor || !in.leader) throw Error("CACC needs predecessor and leader data");
    const double eps = spacing_error(in, params.gap_des);
    const double eps_dot = spacing_error_rate(in);
    return g.a1 * in.predecessor->accel + g.a2 * in.leader->accel + g.a3 * eps_dot +
           g.a4 * (in.ego.speed - in.leader->speed) + g.a5 * eps;
}

double cacc_accel(const CaccParams& params, const ControlInputs& in) {
    return cacc_accel(params, compute_alphas(params), in);
}

double acc_accel(const FallbackParams& fb, const ControlInputs& in) {
    if (!in.predecessor) throw Error("ACC needs a predecessor");
    const auto& p = *in.predecessor;
    const double eps_t = in.ego.position - p.position + p.length + fb.headway * in.ego.speed;
    const double eps_dot = spacing_error_rate(in);
    return -(1.0 / fb.headway) * (eps_dot + fb.lambda * eps_t);
}

double cc_accel(const FallbackParams& fb, const dynamics::VehicleState& ego, double target_speed) {
    return fb.speed_gain * (target_speed - ego.speed);
}

Mode select_mode(const ModeView& view, const FallbackParams& fb) {
    const auto fresh = [&](const std::optional<double>& age) {
        return age && *age < fb.staleness_timeout;
    };
    if (view.in_platoon && fresh(view.predecessor_age) && fresh(view.leader_age))
        return Mode::Cacc;
    if (view.radar_enabled && view.predecessor_in_radar_range) return Mode::Acc;
    return view.in_platoon ? Mode::CcHold : Mode::CcTarget;
}

} // namespace lplatoon::control
