#include "lplatoon/protocol/agent.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace lplatoon::protocol {

namespace {

constexpr double kNever = std::numeric_limits<double>::infinity();
// how long a neighbour's last beacon counts as "currently audible"
constexpr double kAudibleWindow = 1.0;

std::string id_str(VehicleId v) {
    return v == kNullId ? std::string("none") : std::to_string(v);
}

} // namespace

std::string_view to_string(Role r) {
    switch (r) {
    case Role::Leader: return "LEADER";
    case Role::VirtualLeader: return "VIRTUAL_LEADER";
    case Role::Member: return "MEMBER";
    case Role::Free: return "FREE";
    }
    return "?";
}

std::optional<Role> role_from_string(std::string_view s) {
    if (s == "LEADER") return Role::Leader;
    if (s == "VIRTUAL_LEADER") return Role::VirtualLeader;
    if (s == "MEMBER") return Role::Member;
    if (s == "FREE") return Role::Free;
    return std::nullopt;
}

void validate(const ProtocolParams& p) {
    if (!(p.gamma >= 0.0 && p.gamma <= 1.0)) throw Error("protocol.gamma must be in [0, 1]");
    if (p.beta == 0) throw Error("protocol.beta must be >= 1");
    if (!(p.ewma_weight > 0.0 && p.ewma_weight <= 1.0))
        throw Error("protocol.ewma_weight must be in (0, 1]");
    if (!(p.tie_margin >= 0.0)) throw Error("protocol.tie_margin must be >= 0");
    if (!(p.follower_window > 0.0)) throw Error("protocol.follower_window must be > 0");
    if (!(p.handover_grace >= 0.0)) throw Error("protocol.handover_grace must be >= 0");
    if (!(p.retry_interval > 0.0)) throw Error("protocol.retry_interval must be > 0");
    if (!(p.beacon_interval > 0.0)) throw Error("beacon interval must be > 0");
}

Agent::Agent(VehicleId id, ProtocolParams params, EventSink sink)
    : id_(id),
      params_(params),
      sink_(std::move(sink)),
      links_(params.ewma_weight, params.beacon_interval),
      tracker_(ElectionParams{params.gamma, params.beta, params.theta, params.follower_window,
                              params.tie_margin}) {}

void Agent::init_leader(std::uint32_t platoon_id) {
    role_ = Role::Leader;
    platoon_id_ = platoon_id;
    platoon_position_ = 0;
    leader_ref_ = kNullId;
}

void Agent::init_member(std::uint32_t platoon_id, std::uint16_t platoon_position, VehicleId leader) {
    role_ = Role::Member;
    platoon_id_ = platoon_id;
    platoon_position_ = platoon_position;
    leader_ref_ = leader;
}

void Agent::init_joiner(double request_distance) {
    role_ = Role::Free;
    platoon_id_ = kNullId;
    leader_ref_ = kNullId;
    join_ = JoinState::Approaching;
    request_distance_ = request_distance;
}

void Agent::emit(double now, std::string type, VehicleId subject, std::string detail) {
    if (sink_) sink_(ProtocolEvent{now, std::move(type), subject, std::move(detail)});
}

void Agent::set_role(double now, Role r) {
    if (r == role_) return;
    std::string detail = "from=" + std::string(to_string(role_)) + " to=" + std::string(to_string(r));
    role_ = r;
    emit(now, "ROLE", id_, std::move(detail));
}

void Agent::set_leader_ref(double now, VehicleId ref) {
    if (ref == leader_ref_ || ref == id_) return;
    std::string detail = "from=" + id_str(leader_ref_) + " to=" + id_str(ref);
    leader_ref_ = ref;
    tracker_.reset_streaks();
    emit(now, "LEADER_REF", id_, std::move(detail));
}

std::optional<std::uint16_t> Agent::position_of(VehicleId other) const {
    if (other == id_) return platoon_position_;
    auto it = neighbors_.find(other);
    if (it == neighbors_.end() || it->second.beacon.platoon_id != platoon_id_) return std::nullopt;
    return it->second.beacon.platoon_position;
}

bool Agent::is_ahead(VehicleId other) const {
    auto p = position_of(other);
    return p && *p < platoon_position_;
}

const NeighborInfo* Agent::neighbor(VehicleId id) const {
    auto it = neighbors_.find(id);
    return it == neighbors_.end() ? nullptr : &it->second;
}

double Agent::prr_leader() const {
    switch (role_) {
    case Role::Leader: return 1.0;
    case Role::Free: return 0.0;
    default: return links_.prr(leader_ref_);
    }
}

double Agent::current_vlqi(double now) const {
    if (role_ != Role::Member && role_ != Role::VirtualLeader) return 0.0;
    std::vector<FollowerLink> followers;
    for (const auto& [nid, info] : neighbors_) {
        const Beacon& b = info.beacon;
        if (b.platoon_id != platoon_id_ || b.platoon_position <= platoon_position_) continue;
        // a VL behind already heads its own sub-platoon
        if (b.is_virtual_leader()) continue;
        if (!links_.heard_within(nid, now, params_.follower_window)) continue;
        followers.push_back({nid, links_.prr(nid), b.prr_leader});
    }
    return vlqi(params_.gamma, prr_leader(), con_follow(followers));
}

Beacon Agent::base_frame(MsgType type, double now) {
    Beacon b;
    b.msg_type = type;
    b.vehicle_id = id_;
    b.platoon_id = platoon_id_;
    b.seq = seq_++;
    b.timestamp_ms = static_cast<std::uint64_t>(std::llround(now * 1000.0));
    b.position = kin_.position;
    b.speed = kin_.speed;
    b.accel = kin_.accel;
    b.length = kin_.length;
    b.leader_ref_id = leader_ref_;
    b.platoon_position = platoon_position_;
    if (role_ == Role::VirtualLeader) b.flags |= flags::kVirtualLeader;
    if (role_ == Role::Leader) b.flags |= flags::kPlatoonLeader;
    return b;
}

Beacon Agent::on_beacon_timer(double now) {
    links_.on_slot_all(now);
    if (leave_ != LeaveState::HandingOver && handover_.until >= 0.0 && now >= handover_.until)
        handover_ = {};

    join_tick(now);
    leave_tick(now);

    Beacon b = base_frame(MsgType::Beacon, now);
    b.prr_leader = prr_leader();
    if (params_.enabled) {
        b.vlqi = current_vlqi(now);
        if (role_ == Role::Leader || role_ == Role::VirtualLeader) b.selected_vl_id = selected_vl_;
        if (handover_.until >= 0.0) {
            b.old_vl_id = handover_.old_vl;
            b.new_vl_id = handover_.new_vl;
        } else if (role_ == Role::VirtualLeader) {
            b.new_vl_id = id_;
        }
    }
    return b;
}

std::vector<Beacon> Agent::take_outbox() {
    std::vector<Beacon> out;
    out.swap(outbox_);
    return out;
}

void Agent::on_frame(const Beacon& b, double now) {
    if (b.vehicle_id == id_ || b.vehicle_id == kNullId) return;
    links_.on_receive(b.vehicle_id, b.seq, now);
    if (b.msg_type != MsgType::Beacon) {
        if (b.selected_vl_id == id_) handle_maneuver(b, now);
        return;
    }
    neighbors_[b.vehicle_id] = NeighborInfo{b, now};
    links_.set_reported_prr_leader(b.vehicle_id, b.prr_leader);

    if (!params_.enabled || role_ == Role::Free || b.platoon_id != platoon_id_) return;
    apply_vl_update(b, now);
    track_candidate(b, now);
}

void Agent::become_vl(double now, VehicleId ref, VehicleId inherited_selected) {
    set_role(now, Role::VirtualLeader);
    if (ref != kNullId) set_leader_ref(now, ref);
    selected_vl_ = inherited_selected == id_ ? kNullId : inherited_selected;
    tracker_.clear();
    handover_ = {};
}

void Agent::apply_vl_update(const Beacon& b, double now) {
    const VehicleId sender = b.vehicle_id;
    if (role_ == Role::Leader) return;
    const bool sender_leads = b.is_platoon_leader() || b.is_virtual_leader();

    // (1) selected by a leader or VL ahead
    if (b.selected_vl_id == id_ && sender_leads && is_ahead(sender) && leave_ == LeaveState::Idle) {
        if (role_ != Role::VirtualLeader)
            become_vl(now, sender, kNullId);
        else
            set_leader_ref(now, sender);
    }

    const VehicleId old_vl = b.old_vl_id;
    const VehicleId new_vl = b.new_vl_id;

    // (3) my selector replaced me
    if (old_vl == id_ && new_vl != id_ && new_vl != kNullId && role_ == Role::VirtualLeader &&
        sender == leader_ref_ && leave_ == LeaveState::Idle) {
        set_role(now, Role::Member);
        selected_vl_ = kNullId;
        tracker_.clear();
        handover_ = {id_, new_vl, now + params_.handover_grace};
        if (is_ahead(new_vl)) set_leader_ref(now, new_vl);
        return;
    }

    // (4) my reference is being replaced; also covers a VL handing its role to me
    const bool handed_to_me = old_vl == sender && new_vl == id_ && b.is_virtual_leader();
    if (old_vl != kNullId && old_vl != id_ && (old_vl == leader_ref_ || handed_to_me) &&
        (role_ == Role::Member || role_ == Role::VirtualLeader)) {
        if (new_vl == id_) {
            if (role_ != Role::VirtualLeader) {
                VehicleId ref = sender;
                VehicleId sel = kNullId;
                if (const NeighborInfo* o = neighbor(old_vl)) {
                    ref = o->beacon.leader_ref_id;
                    sel = o->beacon.selected_vl_id;
                }
                if (ref == kNullId || ref == id_) ref = leader_ref_ != old_vl ? leader_ref_ : sender;
                become_vl(now, ref, sel);
            }
        } else if (new_vl != kNullId && is_ahead(new_vl)) {
            set_leader_ref(now, new_vl);
        } else if (const NeighborInfo* o = neighbor(old_vl)) {
            VehicleId fallback = o->beacon.leader_ref_id;
            if (fallback != kNullId && fallback != id_ && is_ahead(fallback)) set_leader_ref(now, fallback);
        }
        return;
    }

    // (2) a nearer VL ahead announces itself
    if (role_ == Role::Member && b.is_virtual_leader() && new_vl == sender && is_ahead(sender) &&
        b.leader_ref_id != id_ && leave_ == LeaveState::Idle) {
        auto cur = position_of(leader_ref_);
        if (!cur || *cur < b.platoon_position) set_leader_ref(now, sender);
    }
}

void Agent::track_candidate(const Beacon& b, double now) {
    if (role_ != Role::Leader && role_ != Role::VirtualLeader) return;
    if (leave_ != LeaveState::Idle) return;
    const VehicleId sender = b.vehicle_id;
    if (b.leader_ref_id != id_ || b.platoon_position <= platoon_position_) return;
    if (b.is_virtual_leader() && sender != selected_vl_) return;

    tracker_.observe(sender, b.vlqi, b.prr_leader, now);
    auto elected = tracker_.elect(now);
    if (!elected || *elected == selected_vl_) return;

    VehicleId old = selected_vl_;
    selected_vl_ = *elected;
    if (old != kNullId) handover_ = {old, *elected, now + params_.handover_grace};
    tracker_.reset_streaks();
    emit(now, "ELECTION", *elected, "by=" + id_str(id_) + " old=" + id_str(old));
}

// ---------------------------------------------------------------------------
// maneuvers

void Agent::handle_maneuver(const Beacon& b, double now) {
    switch (b.msg_type) {
    case MsgType::JoinReq:
        if (role_ == Role::Leader || role_ == Role::VirtualLeader) serve_join(b, now);
        break;
    case MsgType::JoinResp:
        if (join_ == JoinState::Requesting || join_ == JoinState::Approaching) {
            join_ = JoinState::Joined;
            platoon_id_ = b.platoon_id;
            platoon_position_ = b.platoon_position;
            set_role(now, Role::Member);
            set_leader_ref(now, b.new_vl_id);
            std::ostringstream os;
            os << "server=" << b.vehicle_id << " position=" << b.platoon_position;
            emit(now, "JOIN_RESP", id_, os.str());
        }
        break;
    case MsgType::LeaveReq:
        if (role_ == Role::Leader || role_ == Role::VirtualLeader) serve_leave(b, now);
        break;
    case MsgType::LeaveResp:
        if (leave_ == LeaveState::Requesting) {
            leave_ = LeaveState::Done;
            emit(now, "LEAVE_RESP", id_, "server=" + id_str(b.vehicle_id));
            set_role(now, Role::Free);
            platoon_id_ = kNullId;
            leader_ref_ = kNullId;
            selected_vl_ = kNullId;
            handover_ = {};
        }
        break;
    case MsgType::Beacon: break;
    }
}

void Agent::serve_join(const Beacon& req, double now) {
    const VehicleId requester = req.vehicle_id;
    auto send = [&](std::uint16_t slot) {
        Beacon r = base_frame(MsgType::JoinResp, now);
        r.selected_vl_id = requester;
        r.platoon_position = slot;
        r.new_vl_id = id_;
        outbox_.push_back(r);
    };
    if (auto it = join_assignments_.find(requester); it != join_assignments_.end()) {
        send(it->second);
        return;
    }

    std::uint16_t tail_pos = platoon_position_;
    double tail_rear = kin_.position - kin_.length;
    for (const auto& [nid, info] : neighbors_) {
        const Beacon& b = info.beacon;
        if (b.platoon_id != platoon_id_ || now - info.rx_time > kAudibleWindow) continue;
        if (b.platoon_position > tail_pos) {
            tail_pos = b.platoon_position;
            tail_rear = b.position - b.length;
        }
    }
    if (!(req.position < tail_rear)) {
        std::ostringstream os;
        os << "requester=" << requester << " reason=not-behind-tail";
        emit(now, "JOIN_REJECT", id_, os.str());
        return;
    }
    std::uint16_t slot = tail_pos;
    for (const auto& [_, s] : join_assignments_) slot = std::max(slot, s);
    ++slot;
    join_assignments_[requester] = slot;
    send(slot);
}

void Agent::serve_leave(const Beacon& req, double now) {
    const VehicleId leaver = req.vehicle_id;
    if (req.new_vl_id != kNullId && selected_vl_ == leaver && req.new_vl_id != id_) {
        selected_vl_ = req.new_vl_id;
        emit(now, "HANDOVER", req.new_vl_id, "old=" + id_str(leaver) + " by=" + id_str(id_));
    }
    tracker_.forget(leaver);
    Beacon r = base_frame(MsgType::LeaveResp, now);
    r.selected_vl_id = leaver;
    outbox_.push_back(r);
}

void Agent::join_tick(double now) {
    if (join_ != JoinState::Approaching && join_ != JoinState::Requesting) return;

    const NeighborInfo* tail = nullptr;
    const NeighborInfo* server = nullptr;
    for (const auto& [nid, info] : neighbors_) {
        const Beacon& b = info.beacon;
        if (b.platoon_id == kNullId || now - info.rx_time > kAudibleWindow) continue;
        if (b.position > kin_.position + b.length) {
            if (!tail || b.position < tail->beacon.position) tail = &info;
        }
        if ((b.is_virtual_leader() || b.is_platoon_leader()) && b.position > kin_.position) {
            if (!server || b.position < server->beacon.position) server = &info;
        }
    }
    if (!tail || !server) return;

    double gap = tail->beacon.position - tail->beacon.length - kin_.position;
    if (join_ == JoinState::Approaching) {
        if (gap > request_distance_) return;
        join_ = JoinState::Requesting;
        join_attempts_ = 0;
        join_next_retry_ = now;
    }
    if (now + 1e-9 < join_next_retry_) return;
    if (join_attempts_ > params_.max_retries) {
        join_ = JoinState::Failed;
        emit(now, "JOIN_FAIL", id_, "attempts=" + std::to_string(join_attempts_));
        return;
    }
    join_server_ = server->beacon.vehicle_id;
    ++join_attempts_;
    join_next_retry_ = now + params_.retry_interval;
    Beacon r = base_frame(MsgType::JoinReq, now);
    r.selected_vl_id = join_server_;
    outbox_.push_back(r);
    std::ostringstream os;
    os << "server=" << join_server_ << " attempt=" << join_attempts_ << " gap=" << gap;
    emit(now, "JOIN_REQ", id_, os.str());
}

bool Agent::request_leave(double now) {
    if (leave_ != LeaveState::Idle) return true;
    if (role_ != Role::Member && role_ != Role::VirtualLeader) return false;

    if (role_ == Role::VirtualLeader) {
        const NeighborInfo* follower = nullptr;
        for (const auto& [nid, info] : neighbors_) {
            const Beacon& b = info.beacon;
            if (b.platoon_id != platoon_id_ || b.platoon_position <= platoon_position_) continue;
            if (now - info.rx_time > kAudibleWindow) continue;
            if (!follower || b.platoon_position < follower->beacon.platoon_position) follower = &info;
        }
        if (follower) {
            leave_ = LeaveState::HandingOver;
            leave_successor_ = follower->beacon.vehicle_id;
            handover_ = {id_, leave_successor_, kNever};
            emit(now, "HANDOVER", leave_successor_, "old=" + id_str(id_) + " by=" + id_str(id_));
            return true;
        }
    }
    leave_ = LeaveState::Requesting;
    leave_attempts_ = 0;
    leave_next_retry_ = now;
    leave_server_ = leader_ref_;
    send_leave_req(now);
    return true;
}

void Agent::send_leave_req(double now) {
    if (leave_attempts_ > params_.max_retries) {
        emit(now, "LEAVE_FAIL", id_, "attempts=" + std::to_string(leave_attempts_));
        leave_ = LeaveState::Idle;
        handover_ = {};
        return;
    }
    ++leave_attempts_;
    leave_next_retry_ = now + params_.retry_interval;
    Beacon r = base_frame(MsgType::LeaveReq, now);
    r.selected_vl_id = leave_server_;
    r.new_vl_id = leave_successor_;
    outbox_.push_back(r);
    std::ostringstream os;
    os << "server=" << id_str(leave_server_) << " attempt=" << leave_attempts_
       << " successor=" << id_str(leave_successor_);
    emit(now, "LEAVE_REQ", id_, os.str());
}

void Agent::leave_tick(double now) {
    if (leave_ == LeaveState::HandingOver) {
        const NeighborInfo* f = neighbor(leave_successor_);
        if (f && f->beacon.is_virtual_leader()) {
            leave_ = LeaveState::Requesting;
            leave_attempts_ = 0;
            leave_server_ = leader_ref_;
            send_leave_req(now);
        }
        return;
    }
    if (leave_ == LeaveState::Requesting && now + 1e-9 >= leave_next_retry_) send_leave_req(now);
}

} // namespace lplatoon::protocol
