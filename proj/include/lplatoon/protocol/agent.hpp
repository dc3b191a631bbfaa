#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lplatoon/protocol/beacon.hpp"
#include "lplatoon/protocol/election.hpp"
#include "lplatoon/protocol/link_estimator.hpp"

namespace lplatoon::protocol {

enum class Role { Leader, VirtualLeader, Member, Free };

std::string_view to_string(Role r);
std::optional<Role> role_from_string(std::string_view s);

struct ProtocolParams {
    bool enabled = true;
    double gamma = 0.5;
    std::uint32_t beta = 5;
    double ewma_weight = 0.1;
    double theta = 0.2;
    double tie_margin = 0.0;
    double follower_window = 0.5;
    double handover_grace = 2.0;
    double retry_interval = 0.5;
    std::uint32_t max_retries = 20;
    double beacon_interval = 0.1;
};

void validate(const ProtocolParams& p);

/// Protocol-level happenings, written to events.csv by the runner.
struct ProtocolEvent {
    double time = 0.0;
    std::string type;
    VehicleId subject = kNullId;
    std::string detail;
};
using EventSink = std::function<void(const ProtocolEvent&)>;

/// Own kinematics as put on the air.
struct Kinematics {
    double position = 0.0;
    double speed = 0.0;
    double accel = 0.0;
    double length = 0.0;
};

/// Latest BEACON frame heard from a neighbour.
struct NeighborInfo {
    Beacon beacon;
    double rx_time = 0.0;
};

/// Per-vehicle L-Platooning state machine.
///
/// Maneuver frames share the beacon layout. The addressee travels in
/// `selected_vl_id`; JOIN_RESP carries the assigned slot in
/// `platoon_position` and the assigned leader in `new_vl_id`; LEAVE_REQ
/// from a virtual leader names its successor in `new_vl_id`.
class Agent {
public:
    Agent(VehicleId id, ProtocolParams params, EventSink sink = {});

    // --- set-up -----------------------------------------------------------
    void init_leader(std::uint32_t platoon_id);
    void init_member(std::uint32_t platoon_id, std::uint16_t platoon_position, VehicleId leader);
    /// Free vehicle that will ask to join once the tail is within `request_distance`.
    void init_joiner(double request_distance);

    // --- driving the state machine --------------------------------------
    void set_kinematics(const Kinematics& k) { kin_ = k; }

    /// Runs periodic work (miss charging, retries, join trigger) and returns
    /// the next periodic beacon. Maneuver frames go to the outbox.
    Beacon on_beacon_timer(double now);
    void on_frame(const Beacon& b, double now);
    std::vector<Beacon> take_outbox();

    /// Starts the leave procedure; returns false if not in a platoon.
    bool request_leave(double now);

    // --- observers --------------------------------------------------------
    VehicleId id() const { return id_; }
    Role role() const { return role_; }
    VehicleId leader_ref() const { return leader_ref_; }
    std::uint32_t platoon_id() const { return platoon_id_; }
    std::uint16_t platoon_position() const { return platoon_position_; }
    VehicleId selected_vl() const { return selected_vl_; }
    bool in_platoon() const { return role_ != Role::Free; }
    bool departed() const { return leave_ == LeaveState::Done; }
    bool leaving() const { return leave_ != LeaveState::Idle; }
    bool join_pending() const { return join_ == JoinState::Approaching || join_ == JoinState::Requesting; }
    bool join_failed() const { return join_ == JoinState::Failed; }

    double prr_leader() const;
    double current_vlqi(double now) const;

    const LinkEstimator& links() const { return links_; }
    const ElectionTracker& tracker() const { return tracker_; }
    const NeighborInfo* neighbor(VehicleId id) const;
    const std::map<VehicleId, NeighborInfo>& neighbors() const { return neighbors_; }
    const ProtocolParams& params() const { return params_; }

private:
    enum class JoinState { None, Approaching, Requesting, Joined, Failed };
    enum class LeaveState { Idle, HandingOver, Requesting, Done };

    struct Handover {
        VehicleId old_vl = kNullId;
        VehicleId new_vl = kNullId;
        double until = -1.0;
    };

    Beacon base_frame(MsgType type, double now);
    void emit(double now, std::string type, VehicleId subject, std::string detail);
    void set_role(double now, Role r);
    void set_leader_ref(double now, VehicleId ref);
    bool is_ahead(VehicleId other) const;
    std::optional<std::uint16_t> position_of(VehicleId other) const;

    void apply_vl_update(const Beacon& b, double now);
    void track_candidate(const Beacon& b, double now);
    void become_vl(double now, VehicleId ref, VehicleId inherited_selected);

    void handle_maneuver(const Beacon& b, double now);
    void serve_join(const Beacon& b, double now);
    void serve_leave(const Beacon& b, double now);

    void join_tick(double now);
    void leave_tick(double now);
    void send_leave_req(double now);

    VehicleId id_;
    ProtocolParams params_;
    EventSink sink_;
    Kinematics kin_;

    Role role_ = Role::Free;
    std::uint32_t platoon_id_ = kNullId;
    std::uint16_t platoon_position_ = 0;
    VehicleId leader_ref_ = kNullId;
    VehicleId selected_vl_ = kNullId;
    Handover handover_;
    std::uint32_t seq_ = 0;

    LinkEstimator links_;
    ElectionTracker tracker_;
    std::map<VehicleId, NeighborInfo> neighbors_;
    std::vector<Beacon> outbox_;

    // join client
    JoinState join_ = JoinState::None;
    double request_distance_ = 0.0;
    VehicleId join_server_ = kNullId;
    std::uint32_t join_attempts_ = 0;
    double join_next_retry_ = 0.0;

    // join server: requester -> assigned slot
    std::map<VehicleId, std::uint16_t> join_assignments_;

    // leave client
    LeaveState leave_ = LeaveState::Idle;
    VehicleId leave_successor_ = kNullId;
    VehicleId leave_server_ = kNullId;
    std::uint32_t leave_attempts_ = 0;
    double leave_next_retry_ = 0.0;
};

} // namespace lplatoon::protocol
