#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_set>
#include <vector>

#include "lplatoon/types.hpp"

namespace lplatoon::sim {

class ScheduleError : public Error {
public:
    using Error::Error;
};

/// Fixed-step simulation clock. `now` only moves forward.
class SimClock {
public:
    explicit SimClock(double tick);

    double now() const { return now_; }
    double tick() const { return tick_; }
    std::uint64_t ticks() const { return ticks_; }
    double next_tick_time() const { return static_cast<double>(ticks_ + 1) * tick_; }

    void advance_to(double t);
    void step_tick();

private:
    double tick_;
    double now_ = 0.0;
    std::uint64_t ticks_ = 0;
};

/// At equal timestamps: dynamics tick, then deliveries, then protocol timers.
enum class EventClass : std::uint8_t { Delivery = 1, Timer = 2 };

struct EventHandle {
    std::uint64_t sequence = 0;
};

class EventQueue {
public:
    using Callback = std::function<void()>;

    EventHandle push(double fire_time, EventClass cls, Callback cb);
    bool cancel(EventHandle h);

    bool empty();
    double next_time();
    /// Removes and returns the earliest live event's callback.
    Callback pop(double* fire_time = nullptr);
    std::size_t size() const { return heap_.size() - cancelled_.size(); }

private:
    struct Entry {
        double time;
        EventClass cls;
        std::uint64_t seq;
        Callback cb;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.time != b.time) return a.time > b.time;
            if (a.cls != b.cls) return a.cls > b.cls;
            return a.seq > b.seq;
        }
    };
    void drop_cancelled();

    std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
    std::unordered_set<std::uint64_t> cancelled_;
    std::uint64_t next_seq_ = 0;
};

/// Clock plus event queue; interleaves fixed-step dynamics ticks with events.
class Kernel {
public:
    using TickFn = std::function<void(double)>;

    explicit Kernel(double tick) : clock_(tick) {}

    const SimClock& clock() const { return clock_; }
    double now() const { return clock_.now(); }

    /// Rejects fire times earlier than now.
    EventHandle schedule(double time, EventClass cls, EventQueue::Callback cb);
    bool cancel(EventHandle h) { return queue_.cancel(h); }

    void set_tick_handler(TickFn fn) { on_tick_ = std::move(fn); }

    /// Processes every tick and event up to and including t_end; returns now (== t_end).
    double run_until(double t_end);

    std::uint64_t ticks_executed() const { return clock_.ticks(); }
    std::uint64_t events_executed() const { return events_executed_; }

private:
    SimClock clock_;
    EventQueue queue_;
    TickFn on_tick_;
    std::uint64_t events_executed_ = 0;
};

} // namespace lplatoon::sim
