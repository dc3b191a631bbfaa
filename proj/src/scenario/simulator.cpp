#include "lplatoon/scenario/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "lplatoon/channel.hpp"
#include "lplatoon/control.hpp"
#include "lplatoon/dynamics.hpp"
#include "lplatoon/protocol/agent.hpp"
#include "lplatoon/sim/kernel.hpp"
#include "lplatoon/sim/rng.hpp"

namespace lplatoon::scenario {

namespace {

std::string collision_message(double time, VehicleId front, VehicleId rear, double gap) {
    std::ostringstream os;
    os << "collision at t=" << time << " s: vehicle " << rear << " overlaps vehicle " << front
       << " (gap " << gap << " m)";
    return os.str();
}

constexpr std::uint32_t kPlatoonId = 1;
constexpr VehicleId kLeaderId = 0;

struct Vehicle {
    dynamics::VehicleState st;
    std::unique_ptr<protocol::Agent> agent;
    control::Mode mode = control::Mode::CcHold;
    double hold_speed = 0.0;
    double commanded = 0.0;
    bool alive = true;
    std::uint64_t leader_rx = 0;
    std::uint64_t leader_expected = 0;
    std::uint64_t sent = 0;
};

class Simulation {
public:
    Simulation(const ScenarioConfig& cfg, const RunOptions& opt)
        : cfg_(cfg),
          opt_(opt),
          cacc_(cfg.effective_cacc()),
          gains_(control::compute_alphas(cacc_)),
          rng_(cfg.seed),
          kernel_(cfg.tick),
          medium_(cfg.channel, rng_),
          beacons_(cfg.beacon, rng_) {
        rng_.add_stream("maneuver");
        trace_every_ = static_cast<std::uint64_t>(std::llround(cfg.trace_interval / cfg.tick));
    }

    RunResult run() {
        const double pitch = cfg_.vehicle_length + cfg_.initial_spacing;
        const double v0 = dynamics::leader_speed(cfg_.leader, 0.0);
        for (int k = 0; k < cfg_.platoon_size; ++k) {
            auto& v = add_vehicle(static_cast<VehicleId>(k), -pitch * k, v0, 0);
            if (k == 0) {
                v.agent->init_leader(kPlatoonId);
                v.mode = control::Mode::CcTarget;
            } else {
                v.agent->init_member(kPlatoonId, static_cast<std::uint16_t>(k), kLeaderId);
            }
        }
        for (const auto& m : cfg_.maneuvers) {
            kernel_.schedule(m.time, sim::EventClass::Timer, [this, m] { maneuver(m); });
        }
        kernel_.set_tick_handler([this](double t) { tick(t); });
        sample(0.0);
        kernel_.run_until(cfg_.duration);

        for (const auto& v : vehicles_) {
            if (v->st.id == kLeaderId) continue;
            std::ostringstream os;
            os << "leader_rx=" << v->leader_rx << " leader_expected=" << v->leader_expected
               << " sent=" << v->sent;
            event(cfg_.duration, "LINK_STATS", v->st.id, os.str());
        }
        event(cfg_.duration, "COMFORT", kNullId,
              "min=" + format_double(comfort_min_) + " max=" + format_double(comfort_max_));
        return std::move(result_);
    }

private:
    Vehicle& add_vehicle(VehicleId id, double position, double speed, double start_time) {
        auto v = std::make_unique<Vehicle>();
        v->st.id = id;
        v->st.position = position;
        v->st.speed = speed;
        v->st.length = cfg_.vehicle_length;
        v->st.lane = 0;
        v->hold_speed = speed;
        v->agent = std::make_unique<protocol::Agent>(
            id, cfg_.protocol, [this](const protocol::ProtocolEvent& e) {
                event(e.time, e.type, e.subject, e.detail);
            });
        v->agent->set_kinematics({position, speed, 0.0, cfg_.vehicle_length});
        double first = beacons_.register_vehicle(id, start_time);
        kernel_.schedule(first, sim::EventClass::Timer, [this, id] { beacon(id); });
        vehicles_.push_back(std::move(v));
        return *vehicles_.back();
    }

    Vehicle* find(VehicleId id) {
        if (id >= vehicles_.size()) return nullptr;
        return vehicles_[id].get();
    }

    void event(double t, std::string type, VehicleId subject, std::string detail) {
        result_.events.push_back(EventRecord{snap_time(t), std::move(type), subject, std::move(detail)});
    }

    /// Alive vehicles of one lane, front first.
    std::vector<Vehicle*> lane_order(int lane) {
        std::vector<Vehicle*> out;
        for (auto& v : vehicles_)
            if (v->alive && v->st.lane == lane) out.push_back(v.get());
        std::sort(out.begin(), out.end(), [](const Vehicle* a, const Vehicle* b) {
            if (a->st.position != b->st.position) return a->st.position > b->st.position;
            return a->st.id < b->st.id;
        });
        return out;
    }

    double desired_accel(Vehicle& v, const Vehicle* pred, double t_state) {
        const auto& fb = cfg_.fallback;
        if (v.st.id == kLeaderId && v.agent->role() == protocol::Role::Leader) {
            v.mode = control::Mode::CcTarget;
            return control::cc_accel(fb, v.st, dynamics::leader_speed(cfg_.leader, t_state));
        }
        const protocol::Agent& a = *v.agent;
        const protocol::NeighborInfo* pred_info = pred ? a.neighbor(pred->st.id) : nullptr;
        const protocol::NeighborInfo* ref_info =
            a.leader_ref() != kNullId ? a.neighbor(a.leader_ref()) : nullptr;

        control::ModeView view;
        view.in_platoon = a.in_platoon();
        if (pred_info) view.predecessor_age = t_state - pred_info->rx_time;
        if (ref_info) view.leader_age = t_state - ref_info->rx_time;
        view.radar_enabled = cfg_.radar_enabled;
        view.predecessor_in_radar_range =
            pred && (pred->st.rear() - v.st.position) <= cfg_.radar_range;
        control::Mode mode = control::select_mode(view, fb);
        if (!view.in_platoon && mode == control::Mode::CcHold) mode = control::Mode::CcTarget;

        if (mode == control::Mode::CcHold && v.mode != control::Mode::CcHold) v.hold_speed = v.st.speed;
        v.mode = mode;

        control::ControlInputs in;
        in.ego = v.st;
        switch (mode) {
        case control::Mode::Cacc: {
            const auto& pb = pred_info->beacon;
            in.predecessor = control::RemoteKinematics{pred->st.position, pb.speed, pb.accel,
                                                       pred->st.length, *view.predecessor_age};
            const auto& rb = ref_info->beacon;
            in.leader = control::LeaderReference{rb.speed, rb.accel, *view.leader_age};
            return control::cacc_accel(cacc_, gains_, in);
        }
        case control::Mode::Acc:
            in.predecessor = control::RemoteKinematics{pred->st.position, pred->st.speed,
                                                       pred->st.accel, pred->st.length, 0.0};
            return control::acc_accel(fb, in);
        case control::Mode::CcHold: return control::cc_accel(fb, v.st, v.hold_speed);
        case control::Mode::CcTarget: return control::cc_accel(fb, v.st, fb.desired_speed);
        }
        return 0.0;
    }

    void tick(double t) {
        const double dt = cfg_.tick;
        const double t_state = t - dt;
        auto order = lane_order(0);

        std::vector<std::pair<Vehicle*, double>> commands;
        commands.reserve(vehicles_.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            commands.emplace_back(order[i], desired_accel(*order[i], i ? order[i - 1] : nullptr, t_state));
        for (auto& v : vehicles_) {
            if (v->alive && v->st.lane != 0) {
                v->mode = control::Mode::CcHold;
                commands.emplace_back(v.get(), control::cc_accel(cfg_.fallback, v->st, v->hold_speed));
            }
        }

        for (auto& [v, des] : commands) {
            v->commanded = des;
            v->st.accel = dynamics::actuate(cfg_.lower, v->st.accel, des, dt);
            v->st = dynamics::integrate(v->st, dt);
            comfort_min_ = std::min(comfort_min_, v->st.accel);
            comfort_max_ = std::max(comfort_max_, v->st.accel);
            double bcast = cfg_.broadcast_accel == BroadcastAccel::Controller ? des : v->st.accel;
            v->agent->set_kinematics({v->st.position, v->st.speed, bcast, v->st.length});
        }

        for (std::size_t i = 1; i < order.size(); ++i) {
            double gap = order[i - 1]->st.rear() - order[i]->st.position;
            if (gap < 0.0) throw CollisionError(t, order[i - 1]->st.id, order[i]->st.id, gap);
        }

        if (kernel_.clock().ticks() % trace_every_ == 0) sample(t);
    }

    void sample(double t) {
        auto order = lane_order(0);
        const double ts = snap_time(t);
        std::vector<TraceRecord> rows;
        for (std::size_t i = 0; i < order.size(); ++i) {
            const Vehicle& v = *order[i];
            TraceRecord r;
            r.time = ts;
            r.vehicle = v.st.id;
            r.position = v.st.position;
            r.speed = v.st.speed;
            r.accel = v.st.accel;
            if (i > 0) {
                const Vehicle& p = *order[i - 1];
                r.gap = p.st.rear() - v.st.position;
                r.eps = v.st.position - p.st.position + p.st.length + cacc_.gap_des;
            }
            r.mode = std::string(control::to_string(v.mode));
            r.role = std::string(protocol::to_string(v.agent->role()));
            r.leader_ref = v.agent->leader_ref();
            r.prr_leader = v.agent->prr_leader();
            rows.push_back(std::move(r));
        }
        std::sort(rows.begin(), rows.end(),
                  [](const TraceRecord& a, const TraceRecord& b) { return a.vehicle < b.vehicle; });
        for (auto& r : rows) result_.trace.push_back(std::move(r));
    }

    void transmit(Vehicle& sender, const protocol::Beacon& frame) {
        const double now = kernel_.now();
        protocol::Frame bytes = protocol::encode_beacon(frame);
        if (opt_.record_frames) {
            result_.frames.push_back(format_double(snap_time(now)) + " " + std::to_string(sender.st.id) +
                                     " " + protocol::hex_dump(bytes));
        }
        ++sender.sent;

        std::vector<channel::Receiver> rx;
        for (auto& v : vehicles_)
            if (v->alive && v.get() != &sender) rx.push_back({v->st.id, v->st.position});
        auto got = medium_.broadcast(sender.st.id, sender.st.position, rx, cfg_.packet_size);

        if (sender.st.id == kLeaderId && frame.msg_type == protocol::MsgType::Beacon) {
            for (const auto& r : rx) ++vehicles_[r.id]->leader_expected;
            for (VehicleId id : got) ++vehicles_[id]->leader_rx;
        }
        if (got.empty()) return;

        protocol::Beacon decoded = protocol::decode_beacon(bytes);
        kernel_.schedule(now, sim::EventClass::Delivery, [this, decoded, got = std::move(got)] {
            for (VehicleId id : got) {
                Vehicle* v = find(id);
                if (!v || !v->alive) continue;
                v->agent->on_frame(decoded, kernel_.now());
                flush(*v);
            }
        });
    }

    void flush(Vehicle& v) {
        for (const auto& f : v.agent->take_outbox()) transmit(v, f);
        if (v.agent->departed() && v.alive) depart(v);
    }

    void beacon(VehicleId id) {
        Vehicle* v = find(id);
        if (!v || !v->alive) return;
        const double now = kernel_.now();
        protocol::Beacon b = v->agent->on_beacon_timer(now);
        transmit(*v, b);
        flush(*v);
        if (v->alive) {
            double next = beacons_.next_beacon_time(id);
            kernel_.schedule(std::max(next, now), sim::EventClass::Timer, [this, id] { beacon(id); });
        }
    }

    void depart(Vehicle& v) {
        auto order = lane_order(v.st.lane);
        VehicleId follower = kNullId;
        for (std::size_t i = 0; i + 1 < order.size(); ++i)
            if (order[i] == &v) follower = order[i + 1]->st.id;
        v.alive = false;
        v.st.lane = 1;
        event(kernel_.now(), "DEPART", v.st.id,
              "follower=" + (follower == kNullId ? std::string("none") : std::to_string(follower)));
    }

    void maneuver(const ManeuverSpec& m) {
        const double now = kernel_.now();
        if (m.action == ManeuverAction::Join) {
            auto order = lane_order(0);
            if (order.empty()) return;
            const Vehicle& tail = *order.back();
            VehicleId id = static_cast<VehicleId>(vehicles_.size());
            double pos = tail.st.rear() - (m.request_distance + cfg_.spawn_margin);
            auto& v = add_vehicle(id, pos, tail.st.speed, now);
            v.agent->init_joiner(m.request_distance);
            v.mode = control::Mode::CcTarget;
            std::ostringstream os;
            os << "position=" << format_double(pos) << " request_distance="
               << format_double(m.request_distance);
            event(now, "SPAWN", id, os.str());
            return;
        }

        auto order = lane_order(0);
        Vehicle* target = nullptr;
        if (m.vehicle == "random_member" || m.vehicle == "random_vl") {
            auto want = m.vehicle == "random_vl" ? protocol::Role::VirtualLeader : protocol::Role::Member;
            std::vector<Vehicle*> pool;
            // only vehicles with someone behind them, so the leave leaves a gap to close
            for (std::size_t i = 0; i + 1 < order.size(); ++i)
                if (order[i]->agent->role() == want && !order[i]->agent->leaving()) pool.push_back(order[i]);
            std::sort(pool.begin(), pool.end(),
                      [](const Vehicle* a, const Vehicle* b) { return a->st.id < b->st.id; });
            if (!pool.empty()) {
                double u = rng_.stream("maneuver").uniform();
                target = pool[std::min(pool.size() - 1, static_cast<std::size_t>(u * pool.size()))];
            }
        } else {
            target = find(static_cast<VehicleId>(std::stoul(m.vehicle)));
            if (target && !target->alive) target = nullptr;
        }
        if (!target || !target->agent->request_leave(now)) {
            event(now, "LEAVE_SKIPPED", target ? target->st.id : kNullId, "selector=" + m.vehicle);
            return;
        }
        flush(*target);
    }

    const ScenarioConfig& cfg_;
    RunOptions opt_;
    control::CaccParams cacc_;
    control::CaccGains gains_;
    sim::RngRegistry rng_;
    sim::Kernel kernel_;
    channel::Medium medium_;
    channel::BeaconScheduler beacons_;
    std::vector<std::unique_ptr<Vehicle>> vehicles_;
    std::uint64_t trace_every_ = 10;
    double comfort_min_ = std::numeric_limits<double>::infinity();
    double comfort_max_ = -std::numeric_limits<double>::infinity();
    RunResult result_;
};

} // namespace

CollisionError::CollisionError(double t, VehicleId f, VehicleId r, double gap)
    : Error(collision_message(t, f, r, gap)), time(t), front(f), rear(r) {}

RunResult simulate(const ScenarioConfig& cfg, const RunOptions& options) {
    validate(cfg);
    Simulation sim(cfg, options);
    return sim.run();
}

} // namespace lplatoon::scenario
