#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lplatoon/scenario/config.hpp"
#include "lplatoon/scenario/metrics.hpp"
#include "lplatoon/scenario/simulator.hpp"

namespace lplatoon::scenario {

inline constexpr const char* kTraceFile = "trace.csv";
inline constexpr const char* kEventsFile = "events.csv";
inline constexpr const char* kMetricsFile = "metrics.txt";
inline constexpr const char* kScenarioFile = "scenario.toml";
inline constexpr const char* kFramesFile = "frames.txt";

/// Writes trace.csv, events.csv, metrics.txt and the resolved scenario.toml.
void write_run(const std::filesystem::path& dir, const ScenarioConfig& cfg, const RunResult& result,
               const MetricsReport& metrics);

/// simulate + compute_metrics + write_run.
MetricsReport run_to_directory(const ScenarioConfig& cfg, const std::filesystem::path& dir,
                               const RunOptions& options = {});

/// Recomputes metrics from a directory produced by run_to_directory.
MetricsReport recompute_metrics(const std::filesystem::path& dir);

struct SweepEntry {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    MetricsReport metrics;
};

/// Runs seeds [first, last] on `threads` workers (0 = hardware concurrency),
/// one sub-directory per seed plus cdf.csv and summary.txt. The returned
/// entries are in seed order whatever the scheduling.
std::vector<SweepEntry> sweep(const ScenarioConfig& base, std::uint64_t first, std::uint64_t last,
                              const std::filesystem::path& dir, unsigned threads = 0);

} // namespace lplatoon::scenario
