#pragma once

#include <string>
#include <vector>

#include "lplatoon/scenario/config.hpp"
#include "lplatoon/scenario/records.hpp"

namespace lplatoon::scenario {

class CollisionError : public Error {
public:
    CollisionError(double time, VehicleId front, VehicleId rear, double gap);
    double time;
    VehicleId front;
    VehicleId rear;
};

struct RunOptions {
    /// Keep a hex dump of every frame put on the air ("time sender hex").
    bool record_frames = false;
};

struct RunResult {
    std::vector<TraceRecord> trace;
    std::vector<EventRecord> events;
    std::vector<std::string> frames;
};

/// Runs one complete simulation. Throws CollisionError if two vehicles in
/// the same lane overlap.
RunResult simulate(const ScenarioConfig& cfg, const RunOptions& options = {});

} // namespace lplatoon::scenario
