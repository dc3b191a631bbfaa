#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "lplatoon/types.hpp"

namespace lplatoon::protocol {

/// One EWMA step: prr <- (1 - w) prr + w [received].
double ewmprr_update(double prr, bool received, double weight);

/// Per-neighbour exponentially weighted packet reception ratio.
///
/// A neighbour is tracked from its first frame on (PRR starts at 1.0).
/// Misses are charged two ways: sequence gaps when a frame arrives, and
/// elapsed beacon slots while the neighbour is silent. Slot charges are
/// remembered so a later sequence gap is not counted twice.
class LinkEstimator {
public:
    struct Link {
        double prr = 1.0;
        std::uint32_t last_seq = 0;
        double last_rx_time = 0.0;
        std::uint32_t misses_charged = 0; ///< since last reception, by slot timeouts
        double reported_prr_leader = 0.0; ///< the neighbour's own PRR to its leader
    };

    LinkEstimator(double weight, double beacon_interval, std::uint32_t max_charge_per_call = 50)
        : weight_(weight), interval_(beacon_interval), cap_(max_charge_per_call) {}

    double weight() const { return weight_; }

    /// Records a received frame; returns the number of misses applied first.
    std::uint32_t on_receive(VehicleId neighbor, std::uint32_t seq, double now);

    /// Charges misses for a silent neighbour: one per beacon interval elapsed
    /// beyond a 1.5-interval grace. Returns the misses charged by this call.
    std::uint32_t on_beacon_slot_elapsed(VehicleId neighbor, double now);
    void on_slot_all(double now);

    void set_reported_prr_leader(VehicleId neighbor, double value);

    /// 0 for neighbours never heard.
    double prr(VehicleId neighbor) const;
    const Link* link(VehicleId neighbor) const;
    bool heard_within(VehicleId neighbor, double now, double window) const;

    const std::map<VehicleId, Link>& links() const { return links_; }

private:
    void apply(Link& l, bool received) { l.prr = ewmprr_update(l.prr, received, weight_); }

    double weight_;
    double interval_;
    std::uint32_t cap_;
    std::map<VehicleId, Link> links_;
};

} // namespace lplatoon::protocol
