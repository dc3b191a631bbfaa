#include "lplatoon/scenario/runner.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <numeric>
#include <thread>

namespace lplatoon::scenario {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write '" + p.string() + "'");
    return out;
}

std::ifstream open_in(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read '" + p.string() + "'");
    return in;
}

} // namespace

void write_run(const fs::path& dir, const ScenarioConfig& cfg, const RunResult& result,
               const MetricsReport& metrics) {
    fs::create_directories(dir);
    {
        auto out = open_out(dir / kTraceFile);
        write_trace_header(out);
        for (const auto& r : result.trace) write_trace_row(out, r);
    }
    {
        auto out = open_out(dir / kEventsFile);
        write_events_header(out);
        for (const auto& e : result.events) write_event_row(out, e);
    }
    {
        auto out = open_out(dir / kMetricsFile);
        out << to_text(metrics);
    }
    {
        auto out = open_out(dir / kScenarioFile);
        out << to_text(cfg);
    }
    if (!result.frames.empty()) {
        auto out = open_out(dir / kFramesFile);
        for (const auto& f : result.frames) out << f << '\n';
    }
}

MetricsReport run_to_directory(const ScenarioConfig& cfg, const fs::path& dir, const RunOptions& options) {
    RunResult r = simulate(cfg, options);
    MetricsReport m = compute_metrics(r.trace, r.events, cfg.metrics);
    write_run(dir, cfg, r, m);
    return m;
}

MetricsReport recompute_metrics(const fs::path& dir) {
    ScenarioConfig cfg = load_scenario(dir / kScenarioFile);
    auto tin = open_in(dir / kTraceFile);
    auto trace = read_trace(tin);
    auto ein = open_in(dir / kEventsFile);
    auto events = read_events(ein);
    return compute_metrics(trace, events, cfg.metrics);
}

std::vector<SweepEntry> sweep(const ScenarioConfig& base, std::uint64_t first, std::uint64_t last,
                              const fs::path& dir, unsigned threads) {
    if (last < first) throw Error("sweep: empty seed range");
    const std::size_t n = static_cast<std::size_t>(last - first + 1);
    std::vector<SweepEntry> entries(n);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            SweepEntry& e = entries[i];
            e.seed = first + i;
            ScenarioConfig cfg = base;
            cfg.seed = e.seed;
            try {
                e.metrics = run_to_directory(cfg, dir / ("seed_" + std::to_string(e.seed)));
                e.ok = true;
            } catch (const std::exception& ex) {
                e.error = ex.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::vector<const SweepEntry*> done;
    for (const auto& e : entries)
        if (e.ok) done.push_back(&e);
    std::stable_sort(done.begin(), done.end(), [](const SweepEntry* a, const SweepEntry* b) {
        if (a->metrics.vl_completion != b->metrics.vl_completion)
            return a->metrics.vl_completion < b->metrics.vl_completion;
        return a->seed < b->seed;
    });
    {
        auto out = open_out(dir / "cdf.csv");
        out << "vl_completion,cdf,seed\n";
        for (std::size_t k = 0; k < done.size(); ++k) {
            out << format_double(done[k]->metrics.vl_completion) << ','
                << format_double(static_cast<double>(k + 1) / static_cast<double>(done.size())) << ','
                << done[k]->seed << '\n';
        }
    }
    {
        auto out = open_out(dir / "summary.txt");
        std::size_t failed = n - done.size();
        std::size_t converged = 0;
        double sum = 0.0;
        for (const auto* e : done) {
            sum += e->metrics.vl_completion;
            if (e->metrics.converged) ++converged;
        }
        out << "runs=" << n << "\n" << "failed=" << failed << "\n" << "converged=" << converged << "\n";
        if (!done.empty()) {
            out << "vl_completion_mean=" << format_double(sum / static_cast<double>(done.size())) << "\n";
            out << "vl_completion_min=" << format_double(done.front()->metrics.vl_completion) << "\n";
            out << "vl_completion_max=" << format_double(done.back()->metrics.vl_completion) << "\n";
        }
        for (const auto& e : entries)
            if (!e.ok) out << "error.seed_" << e.seed << "=" << e.error << "\n";
    }
    return entries;
}

} // namespace lplatoon::scenario
