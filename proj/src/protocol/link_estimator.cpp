#include "lplatoon/protocol/link_estimator.hpp"

#include <algorithm>
#include <cmath>

namespace lplatoon::protocol {

double ewmprr_update(double prr, bool received, double weight) {
    double next = (1.0 - weight) * prr + weight * (received ? 1.0 : 0.0);
    return std::clamp(next, 0.0, 1.0);
}

std::uint32_t LinkEstimator::on_receive(VehicleId neighbor, std::uint32_t seq, double now) {
    auto it = links_.find(neighbor);
    if (it == links_.end()) {
        Link l;
        l.last_seq = seq;
        l.last_rx_time = now;
        links_.emplace(neighbor, l);
        return 0;
    }
    Link& l = it->second;
    std::uint32_t gap = seq - l.last_seq;
    if (gap == 0 || gap > 0x7FFFFFFFu) return 0; // duplicate or reordered
    std::uint32_t missed = gap - 1;
    std::uint32_t apply_now = missed > l.misses_charged ? missed - l.misses_charged : 0;
    for (std::uint32_t i = 0; i < apply_now; ++i) apply(l, false);
    apply(l, true);
    l.last_seq = seq;
    l.last_rx_time = now;
    l.misses_charged = 0;
    return apply_now;
}

std::uint32_t LinkEstimator::on_beacon_slot_elapsed(VehicleId neighbor, double now) {
    auto it = links_.find(neighbor);
    if (it == links_.end()) return 0;
    Link& l = it->second;
    double elapsed = now - l.last_rx_time;
    if (elapsed < 1.5 * interval_) return 0;
    auto expected = static_cast<std::uint32_t>(std::floor((elapsed - 0.5 * interval_) / interval_ + 1e-9));
    if (expected <= l.misses_charged) return 0;
    std::uint32_t charge = std::min(expected - l.misses_charged, cap_);
    for (std::uint32_t i = 0; i < charge; ++i) apply(l, false);
    l.misses_charged += charge;
    return charge;
}

void LinkEstimator::on_slot_all(double now) {
    for (auto& [id, _] : links_) on_beacon_slot_elapsed(id, now);
}

void LinkEstimator::set_reported_prr_leader(VehicleId neighbor, double value) {
    auto it = links_.find(neighbor);
    if (it != links_.end()) it->second.reported_prr_leader = std::clamp(value, 0.0, 1.0);
}

double LinkEstimator::prr(VehicleId neighbor) const {
    auto it = links_.find(neighbor);
    return it == links_.end() ? 0.0 : it->second.prr;
}

const LinkEstimator::Link* LinkEstimator::link(VehicleId neighbor) const {
    auto it = links_.find(neighbor);
    return it == links_.end() ? nullptr : &it->second;
}

bool LinkEstimator::heard_within(VehicleId neighbor, double now, double window) const {
    const Link* l = link(neighbor);
    return l && now - l->last_rx_time <= window;
}

} // namespace lplatoon::protocol
