#include "lplatoon/scenario/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lplatoon::scenario {

namespace {

constexpr double kTimeEps = 1e-9;

VehicleId id_from(const std::optional<std::string>& s) {
    if (!s || s->empty() || *s == "none") return kNullId;
    return static_cast<VehicleId>(std::stoul(*s));
}

std::string id_text(VehicleId v) { return v == kNullId ? std::string("none") : std::to_string(v); }

bool in_platoon(const TraceRecord& r) { return r.role != "FREE"; }

} // namespace

std::optional<double> settle_time(const std::vector<TraceRecord>& trace, VehicleId vehicle,
                                  double from, double threshold, double hold) {
    std::optional<double> run_start;
    for (const auto& r : trace) {
        if (r.vehicle != vehicle || r.time + kTimeEps < from) continue;
        bool ok = in_platoon(r) && r.eps && std::fabs(*r.eps) < threshold;
        if (!ok) {
            run_start.reset();
            continue;
        }
        if (!run_start) run_start = r.time;
        if (r.time - *run_start + kTimeEps >= hold) return run_start;
    }
    return std::nullopt;
}

MetricsReport compute_metrics(const std::vector<TraceRecord>& trace,
                              const std::vector<EventRecord>& events, const MetricsParams& params) {
    MetricsReport m;

    // convergence instant: first sample where every platoon vehicle with a
    // predecessor is inside the threshold
    {
        std::size_t i = 0;
        while (i < trace.size()) {
            double t = trace[i].time;
            bool all_ok = true;
            std::size_t j = i;
            for (; j < trace.size() && trace[j].time == t; ++j) {
                const auto& r = trace[j];
                if (!in_platoon(r) || !r.eps) continue;
                if (!(std::fabs(*r.eps) < params.conv_threshold)) all_ok = false;
            }
            if (all_ok) {
                m.converged = true;
                m.t_conv = t;
                break;
            }
            i = j;
        }
    }

    if (m.converged) {
        std::map<VehicleId, std::pair<double, std::size_t>> sums;
        for (const auto& r : trace) {
            if (r.time + kTimeEps < m.t_conv || !in_platoon(r) || !r.eps) continue;
            double e = std::fabs(*r.eps);
            auto& vm = m.vehicles[r.vehicle];
            vm.gap_max = std::max(vm.gap_max.value_or(0.0), e);
            auto& s = sums[r.vehicle];
            s.first += e;
            ++s.second;
        }
        for (auto& [id, s] : sums) m.vehicles[id].gap_mean = s.first / static_cast<double>(s.second);
    }

    if (!trace.empty()) {
        double last = trace.back().time;
        for (auto it = trace.rbegin(); it != trace.rend() && it->time == last; ++it)
            if (it->role == "VIRTUAL_LEADER") ++m.final_vls;
    }

    std::vector<double> ref_changes;
    std::map<VehicleId, double> join_req, leave_req;
    std::vector<VehicleId> join_order, leave_order;
    std::map<VehicleId, std::pair<double, VehicleId>> departures;
    for (const auto& e : events) {
        if (e.type == "LEADER_REF") {
            ref_changes.push_back(e.time);
        } else if (e.type == "ELECTION") {
            m.elections.push_back({e.time, e.subject, id_from(detail_field(e.detail, "by")),
                                   id_from(detail_field(e.detail, "old"))});
        } else if (e.type == "JOIN_REQ") {
            if (join_req.emplace(e.subject, e.time).second) join_order.push_back(e.subject);
        } else if (e.type == "LEAVE_REQ") {
            if (leave_req.emplace(e.subject, e.time).second) leave_order.push_back(e.subject);
        } else if (e.type == "DEPART") {
            departures[e.subject] = {e.time, id_from(detail_field(e.detail, "follower"))};
        } else if (e.type == "LINK_STATS") {
            auto rx = detail_field(e.detail, "leader_rx");
            auto ex = detail_field(e.detail, "leader_expected");
            if (rx && ex) {
                double expected = std::stod(*ex);
                if (expected > 0) m.vehicles[e.subject].pdr = std::stod(*rx) / expected;
            }
        } else if (e.type == "COMFORT") {
            if (auto lo = detail_field(e.detail, "min")) m.comfort_min = parse_double(*lo, "min");
            if (auto hi = detail_field(e.detail, "max")) m.comfort_max = parse_double(*hi, "max");
        }
    }

    // VL assignment completes at the last leader_ref change of the first
    // burst that is followed by a quiet period.
    std::sort(ref_changes.begin(), ref_changes.end());
    if (!ref_changes.empty()) m.last_ref_change = ref_changes.back();
    for (std::size_t k = 0; k < ref_changes.size(); ++k) {
        bool quiet_after = k + 1 == ref_changes.size() ||
                           ref_changes[k + 1] > ref_changes[k] + params.vl_quiet;
        if (quiet_after) {
            m.vl_completion = ref_changes[k];
            break;
        }
    }

    for (VehicleId v : join_order) {
        ManeuverDelay d;
        d.vehicle = v;
        d.request_time = join_req[v];
        if (auto t = settle_time(trace, v, d.request_time, params.settle_threshold, params.settle_hold))
            d.delay = *t - d.request_time;
        m.joins.push_back(d);
    }
    for (VehicleId v : leave_order) {
        ManeuverDelay d;
        d.vehicle = v;
        d.request_time = leave_req[v];
        if (auto it = departures.find(v); it != departures.end()) {
            d.follower = it->second.second;
            if (d.follower != kNullId) {
                if (auto t = settle_time(trace, d.follower, it->second.first, params.settle_threshold,
                                         params.settle_hold))
                    d.delay = *t - d.request_time;
            }
        }
        m.leaves.push_back(d);
    }
    return m;
}

std::string to_text(const MetricsReport& m) {
    std::ostringstream os;
    os << "converged=" << (m.converged ? "true" : "false") << "\n";
    os << "t_conv=" << (m.converged ? format_double(m.t_conv) : std::string("did-not-converge")) << "\n";
    os << "vl_completion=" << format_double(m.vl_completion) << "\n";
    os << "last_ref_change=" << format_double(m.last_ref_change) << "\n";
    os << "final_vls=" << m.final_vls << "\n";
    os << "elections=" << m.elections.size() << "\n";
    for (std::size_t i = 0; i < m.elections.size(); ++i) {
        const auto& e = m.elections[i];
        os << "election." << i << "=time:" << format_double(e.time) << " vl:" << id_text(e.elected)
           << " by:" << id_text(e.by) << " old:" << id_text(e.replaced) << "\n";
    }
    if (m.comfort_min) os << "comfort_min=" << format_double(*m.comfort_min) << "\n";
    if (m.comfort_max) os << "comfort_max=" << format_double(*m.comfort_max) << "\n";
    for (const auto& [id, v] : m.vehicles) {
        if (v.pdr) os << "pdr." << id << "=" << format_double(*v.pdr) << "\n";
        if (v.gap_mean) os << "gap_mean." << id << "=" << format_double(*v.gap_mean) << "\n";
        if (v.gap_max) os << "gap_max." << id << "=" << format_double(*v.gap_max) << "\n";
    }
    for (const auto& j : m.joins) {
        os << "join." << j.vehicle << ".request=" << format_double(j.request_time) << "\n";
        os << "join." << j.vehicle << ".delay="
           << (j.delay ? format_double(*j.delay) : std::string("did-not-complete")) << "\n";
    }
    for (const auto& l : m.leaves) {
        os << "leave." << l.vehicle << ".request=" << format_double(l.request_time) << "\n";
        os << "leave." << l.vehicle << ".follower=" << id_text(l.follower) << "\n";
        os << "leave." << l.vehicle << ".delay="
           << (l.delay ? format_double(*l.delay) : std::string("did-not-complete")) << "\n";
    }
    return os.str();
}

} // namespace lplatoon::scenario
