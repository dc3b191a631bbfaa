#include "lplatoon/protocol/election.hpp"

namespace lplatoon::protocol {

double con_follow(std::span<const FollowerLink> followers) {
    double sum = 0.0;
    for (const auto& f : followers) sum += f.prr_to_follower - f.follower_prr_leader;
    return sum;
}

double vlqi(double gamma, double con_leader, double con_follow) {
    return gamma * con_leader + (1.0 - gamma) * con_follow;
}

double con_follow_from_report(double gamma, double vlqi_value, double prr_leader) {
    if (gamma >= 1.0) return 0.0;
    return (vlqi_value - gamma * prr_leader) / (1.0 - gamma);
}

std::optional<double> ElectionTracker::top_fresh(double now) const {
    std::optional<double> top;
    for (const auto& [id, c] : candidates_) {
        if (now - c.last_time > params_.freshness) continue;
        if (!top || c.vlqi > *top) top = c.vlqi;
    }
    return top;
}

bool ElectionTracker::leads(const Candidate& c, double top) const {
    return c.vlqi >= top - params_.tie_margin &&
           con_follow_from_report(params_.gamma, c.vlqi, c.prr_leader) > params_.theta;
}

void ElectionTracker::observe(VehicleId candidate, double vlqi_value, double prr_leader, double now) {
    auto& c = candidates_[candidate];
    c.vlqi = vlqi_value;
    c.prr_leader = prr_leader;
    c.last_time = now;
    if (leads(c, *top_fresh(now)))
        ++c.streak;
    else
        c.streak = 0;
}

std::optional<VehicleId> ElectionTracker::elect(double now) const {
    auto top = top_fresh(now);
    if (!top) return std::nullopt;
    std::optional<VehicleId> best;
    double best_v = 0.0;
    for (const auto& [id, c] : candidates_) {
        if (now - c.last_time > params_.freshness) continue;
        if (c.streak < params_.beta || !leads(c, *top)) continue;
        // ascending id order, so strict > keeps the lower id on ties
        if (!best || c.vlqi > best_v) {
            best = id;
            best_v = c.vlqi;
        }
    }
    return best;
}

void ElectionTracker::reset_streaks() {
    for (auto& [_, c] : candidates_) c.streak = 0;
}

std::optional<VehicleId> elect_virtual_leader(std::span<const CandidateReport> reports,
                                              const ElectionParams& params) {
    ElectionTracker t(params);
    double now = 0.0;
    for (std::uint32_t round = 0; round < params.beta; ++round) {
        for (const auto& r : reports) t.observe(r.id, r.vlqi, r.prr_leader, now);
    }
    return t.elect(now);
}

} // namespace lplatoon::protocol
