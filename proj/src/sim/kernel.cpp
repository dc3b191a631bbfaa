#include "lplatoon/sim/kernel.hpp"

#include <cmath>
#include <sstream>

namespace lplatoon::sim {

namespace {
// Absorbs the rounding in k * tick versus independently computed event times.
constexpr double kTimeEps = 1e-9;
} // namespace

SimClock::SimClock(double tick) : tick_(tick) {
    if (!(tick > 0.0)) throw ScheduleError("tick must be positive");
}

void SimClock::advance_to(double t) {
    if (t < now_ - kTimeEps) {
        std::ostringstream os;
        os << "clock cannot move backwards (now=" << now_ << ", t=" << t << ")";
        throw ScheduleError(os.str());
    }
    if (t > now_) now_ = t;
}

void SimClock::step_tick() {
    ++ticks_;
    now_ = static_cast<double>(ticks_) * tick_;
}

EventHandle EventQueue::push(double fire_time, EventClass cls, Callback cb) {
    std::uint64_t seq = next_seq_++;
    heap_.push(Entry{fire_time, cls, seq, std::move(cb)});
    return EventHandle{seq};
}

bool EventQueue::cancel(EventHandle h) {
    if (h.sequence >= next_seq_) return false;
    return cancelled_.insert(h.sequence).second;
}

void EventQueue::drop_cancelled() {
    while (!heap_.empty()) {
        auto it = cancelled_.find(heap_.top().seq);
        if (it == cancelled_.end()) return;
        cancelled_.erase(it);
        heap_.pop();
    }
}

bool EventQueue::empty() {
    drop_cancelled();
    return heap_.empty();
}

double EventQueue::next_time() {
    drop_cancelled();
    return heap_.empty() ? INFINITY : heap_.top().time;
}

EventQueue::Callback EventQueue::pop(double* fire_time) {
    drop_cancelled();
    if (heap_.empty()) return {};
    // priority_queue::top is const; the entry is discarded right after.
    Entry e = std::move(const_cast<Entry&>(heap_.top()));
    heap_.pop();
    if (fire_time) *fire_time = e.time;
    return std::move(e.cb);
}

EventHandle Kernel::schedule(double time, EventClass cls, EventQueue::Callback cb) {
    if (!(time >= clock_.now() - kTimeEps)) {
        std::ostringstream os;
        os << "cannot schedule event at t=" << time << " before now=" << clock_.now();
        throw ScheduleError(os.str());
    }
    return queue_.push(time, cls, std::move(cb));
}

double Kernel::run_until(double t_end) {
    if (t_end < clock_.now() - kTimeEps) throw ScheduleError("t_end is in the past");
    for (;;) {
        double tick_t = clock_.next_tick_time();
        double event_t = queue_.next_time();
        bool tick_due = tick_t <= t_end + kTimeEps;
        bool event_due = event_t <= t_end + kTimeEps;
        if (tick_due && (!event_due || tick_t <= event_t + kTimeEps)) {
            clock_.step_tick();
            if (on_tick_) on_tick_(clock_.now());
        } else if (event_due) {
            double ft = 0.0;
            auto cb = queue_.pop(&ft);
            clock_.advance_to(ft);
            ++events_executed_;
            if (cb) cb();
        } else {
            break;
        }
    }
    clock_.advance_to(t_end);
    return clock_.now();
}

} // namespace lplatoon::sim
