#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>

#include "lplatoon/types.hpp"

namespace lplatoon::protocol {

/// What a vehicle knows about one audible follower j.
struct FollowerLink {
    VehicleId id = kNullId;
    double prr_to_follower = 0.0;  ///< own EWMPRR towards j
    double follower_prr_leader = 0.0; ///< j's reported PRR to its own leader
};

/// Sum of (PRR_i^j - PRR_j^L) over the given followers.
double con_follow(std::span<const FollowerLink> followers);

double vlqi(double gamma, double con_leader, double con_follow);

/// Recovers the follower component from an advertised (vlqi, prr_leader)
/// pair. Returns 0 when gamma == 1 (the component is not observable).
double con_follow_from_report(double gamma, double vlqi, double prr_leader);

struct ElectionParams {
    double gamma = 0.5;
    std::uint32_t beta = 5;
    double theta = 0.2;
    double freshness = 0.5; ///< candidates silent for longer are not compared
    double tie_margin = 0.0; ///< reports this close to the top one count as leading
};

/// β-hysteresis over the candidates reporting to one leader or VL.
///
/// Every reception of candidate c's report bumps c's streak if c then leads
/// (within tie_margin of the top fresh report) with a follower component
/// above θ, and resets it otherwise. Among leaders holding a β streak the
/// highest report wins, ties to the lower id.
class ElectionTracker {
public:
    struct Candidate {
        double vlqi = 0.0;
        double prr_leader = 0.0;
        double last_time = 0.0;
        std::uint32_t streak = 0;
    };

    explicit ElectionTracker(ElectionParams params = {}) : params_(params) {}

    const ElectionParams& params() const { return params_; }

    void observe(VehicleId candidate, double vlqi, double prr_leader, double now);

    /// The current best candidate if it has held the top for β receptions and
    /// its follower component exceeds θ.
    std::optional<VehicleId> elect(double now) const;

    void forget(VehicleId candidate) { candidates_.erase(candidate); }
    void reset_streaks();
    void clear() { candidates_.clear(); }

    const std::map<VehicleId, Candidate>& candidates() const { return candidates_; }

private:
    std::optional<double> top_fresh(double now) const;
    bool leads(const Candidate& c, double top) const;

    ElectionParams params_;
    std::map<VehicleId, Candidate> candidates_;
};

/// One-shot form over a fixed set of reports seen β times in a row.
struct CandidateReport {
    VehicleId id = kNullId;
    double vlqi = 0.0;
    double prr_leader = 0.0;
};
std::optional<VehicleId> elect_virtual_leader(std::span<const CandidateReport> reports,
                                              const ElectionParams& params);

} // namespace lplatoon::protocol
