#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lplatoon/scenario/config.hpp"
#include "lplatoon/scenario/records.hpp"

namespace lplatoon::scenario {

struct VehicleMetrics {
    std::optional<double> pdr;      ///< beacons from the original leader received / sent
    std::optional<double> gap_mean; ///< mean |eps| over the convergence window
    std::optional<double> gap_max;  ///< max |eps| over the convergence window
};

struct ElectionRecord {
    double time = 0.0;
    VehicleId elected = kNullId;
    VehicleId by = kNullId;
    VehicleId replaced = kNullId;
};

struct ManeuverDelay {
    VehicleId vehicle = kNullId;
    double request_time = 0.0;
    VehicleId follower = kNullId;  ///< leaves only: the vehicle whose gap recloses
    std::optional<double> delay;   ///< empty when never achieved
};

struct MetricsReport {
    bool converged = false;
    double t_conv = 0.0;
    double vl_completion = 0.0;
    double last_ref_change = 0.0; ///< latest LEADER_REF event of the whole run
    int final_vls = 0;
    std::map<VehicleId, VehicleMetrics> vehicles;
    std::vector<ElectionRecord> elections;
    std::vector<ManeuverDelay> joins;
    std::vector<ManeuverDelay> leaves;
    std::optional<double> comfort_min;
    std::optional<double> comfort_max;
};

/// `trace` must be time-ordered as written by the simulator.
MetricsReport compute_metrics(const std::vector<TraceRecord>& trace,
                              const std::vector<EventRecord>& events, const MetricsParams& params);

/// First sample at or after `from` that opens a run of |eps| < threshold
/// lasting `hold` seconds for `vehicle` while it is in a platoon.
std::optional<double> settle_time(const std::vector<TraceRecord>& trace, VehicleId vehicle,
                                  double from, double threshold, double hold);

/// The key=value text written to metrics.txt.
std::string to_text(const MetricsReport& m);

} // namespace lplatoon::scenario
