#pragma once

#include <map>
#include <span>
#include <string_view>
#include <optional>
#include <vector>

#include "lplatoon/sim/rng.hpp"
#include "lplatoon/types.hpp"

namespace lplatoon::channel {

enum class Variant { Ideal, FreeSpaceSnr, LogisticPdr };

std::string_view to_string(Variant v);
std::optional<Variant> variant_from_string(std::string_view s);

struct ChannelModel {
    Variant variant = Variant::LogisticPdr;
    // FREE_SPACE_SNR
    double tx_power_dbm = 20.0;
    double frequency_hz = 5.89e9;
    double noise_floor_dbm = -85.0;
    double snr_threshold_db = 5.0;
    // LOGISTIC_PDR
    double d50 = 396.0;
    double slope = 13.2;
};

void validate(const ChannelModel& model);

/// Friis free-space loss in dB; throws for distance <= 0.
double path_loss_db(double frequency_hz, double distance_m);

/// Per-packet delivery probability over a link of the given length.
double receive_probability(const ChannelModel& model, double distance_m);

/// Distance at which FREE_SPACE_SNR stops delivering.
double free_space_cutoff(const ChannelModel& model);

struct Receiver {
    VehicleId id = kNullId;
    double position = 0.0;
};

/// Draws one Bernoulli trial per (sender, receiver) link from that link's
/// own stream, so the outcome on one link never depends on who else is on
/// the air. `packet_bytes` is carried for accounting only.
class Medium {
public:
    Medium(ChannelModel model, const sim::RngRegistry& rng) : model_(model), rng_(&rng) {}

    const ChannelModel& model() const { return model_; }

    std::vector<VehicleId> broadcast(VehicleId sender, double sender_position,
                                     std::span<const Receiver> receivers, std::size_t packet_bytes);

    std::uint64_t frames_sent() const { return frames_sent_; }
    std::uint64_t bytes_sent() const { return bytes_sent_; }

private:
    sim::RngStream& link_stream(VehicleId from, VehicleId to);

    ChannelModel model_;
    const sim::RngRegistry* rng_;
    std::map<std::pair<VehicleId, VehicleId>, sim::RngStream> links_;
    std::uint64_t frames_sent_ = 0;
    std::uint64_t bytes_sent_ = 0;
};

/// Single-link form used by tests: returns true if the packet got through.
bool deliver(const ChannelModel& model, double distance_m, sim::RngStream& rng);

struct BeaconSchedule {
    double interval = 0.1;
    double jitter = 0.001;
};

/// Periodic beacon times with a random initial phase and uniform jitter;
/// each vehicle draws from its own sub-stream.
class BeaconScheduler {
public:
    BeaconScheduler(BeaconSchedule schedule, const sim::RngRegistry& rng)
        : schedule_(schedule), rng_(&rng) {}

    const BeaconSchedule& schedule() const { return schedule_; }

    /// Registers a vehicle and returns its first beacon time (start + phase).
    double register_vehicle(VehicleId id, double start_time);
    /// Throws if the vehicle was never registered.
    double next_beacon_time(VehicleId id);
    bool registered(VehicleId id) const { return state_.count(id) != 0; }

private:
    struct PerVehicle {
        sim::RngStream stream;
        double last = 0.0;
    };
    BeaconSchedule schedule_;
    const sim::RngRegistry* rng_;
    std::map<VehicleId, PerVehicle> state_;
};

} // namespace lplatoon::channel
