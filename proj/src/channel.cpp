#include "lplatoon/channel.hpp"

#include <cmath>
#include <sstream>

namespace lplatoon::channel {

std::string_view to_string(Variant v) {
    switch (v) {
    case Variant::Ideal: return "IDEAL";
    case Variant::FreeSpaceSnr: return "FREE_SPACE_SNR";
    case Variant::LogisticPdr: return "LOGISTIC_PDR";
    }
    return "?";
}

std::optional<Variant> variant_from_string(std::string_view s) {
    if (s == "IDEAL") return Variant::Ideal;
    if (s == "FREE_SPACE_SNR") return Variant::FreeSpaceSnr;
    if (s == "LOGISTIC_PDR") return Variant::LogisticPdr;
    return std::nullopt;
}

void validate(const ChannelModel& m) {
    if (m.variant == Variant::LogisticPdr) {
        if (!(m.slope > 0.0)) throw Error("logistic slope must be > 0");
        if (!(m.d50 > 0.0)) throw Error("logistic d50 must be > 0");
    }
    if (m.variant == Variant::FreeSpaceSnr && !(m.frequency_hz > 0.0))
        throw Error("carrier frequency must be > 0");
}

double path_loss_db(double frequency_hz, double distance_m) {
    if (!(distance_m > 0.0)) {
        std::ostringstream os;
        os << "path loss undefined for distance " << distance_m << " m";
        throw Error(os.str());
    }
    return 20.0 * std::log10(distance_m) + 20.0 * std::log10(frequency_hz) - 147.55;
}

double free_space_cutoff(const ChannelModel& m) {
    double budget = m.tx_power_dbm - m.noise_floor_dbm - m.snr_threshold_db;
    return std::pow(10.0, (budget - 20.0 * std::log10(m.frequency_hz) + 147.55) / 20.0);
}

double receive_probability(const ChannelModel& m, double distance_m) {
    switch (m.variant) {
    case Variant::Ideal: return 1.0;
    case Variant::FreeSpaceSnr: {
        if (distance_m <= 0.0) return 1.0;
        double snr = m.tx_power_dbm - path_loss_db(m.frequency_hz, distance_m) - m.noise_floor_dbm;
        return snr >= m.snr_threshold_db ? 1.0 : 0.0;
    }
    case Variant::LogisticPdr: {
        double z = (distance_m - m.d50) / m.slope;
        if (z > 700.0) return 0.0;
        return 1.0 / (1.0 + std::exp(z));
    }
    }
    return 0.0;
}

bool deliver(const ChannelModel& model, double distance_m, sim::RngStream& rng) {
    return rng.uniform() < receive_probability(model, distance_m);
}

sim::RngStream& Medium::link_stream(VehicleId from, VehicleId to) {
    auto key = std::make_pair(from, to);
    auto it = links_.find(key);
    if (it == links_.end()) it = links_.emplace(key, rng_->substream("channel", from, to)).first;
    return it->second;
}

std::vector<VehicleId> Medium::broadcast(VehicleId sender, double sender_position,
                                         std::span<const Receiver> receivers,
                                         std::size_t packet_bytes) {
    ++frames_sent_;
    bytes_sent_ += packet_bytes;
    std::vector<VehicleId> got;
    got.reserve(receivers.size());
    for (const auto& r : receivers) {
        if (r.id == sender) continue;
        if (deliver(model_, std::abs(r.position - sender_position), link_stream(sender, r.id)))
            got.push_back(r.id);
    }
    return got;
}

double BeaconScheduler::register_vehicle(VehicleId id, double start_time) {
    PerVehicle pv{rng_->substream("beacon", id), 0.0};
    pv.last = start_time + pv.stream.uniform() * schedule_.interval;
    double first = pv.last;
    state_.insert_or_assign(id, pv);
    return first;
}

double BeaconScheduler::next_beacon_time(VehicleId id) {
    auto it = state_.find(id);
    if (it == state_.end()) {
        std::ostringstream os;
        os << "vehicle " << id << " has no beacon schedule";
        throw Error(os.str());
    }
    auto& pv = it->second;
    double j = schedule_.jitter > 0.0 ? pv.stream.uniform(-schedule_.jitter, schedule_.jitter) : 0.0;
    pv.last += schedule_.interval + j;
    return pv.last;
}

} // namespace lplatoon::channel
