#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lplatoon/scenario/runner.hpp"

namespace fs = std::filesystem;
using namespace lplatoon::scenario;

namespace {

constexpr const char* kOutEnv = "LPLATOON_OUT";

fs::path resolve_out(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv(kOutEnv); env && *env) return env;
    throw lplatoon::Error(std::string("no output directory: pass --out or set ") + kOutEnv);
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& s) {
    auto dots = s.find("..");
    try {
        if (dots == std::string::npos) {
            auto v = std::stoull(s);
            return {v, v};
        }
        return {std::stoull(s.substr(0, dots)), std::stoull(s.substr(dots + 2))};
    } catch (const std::exception&) {
        throw lplatoon::Error("bad seed range '" + s + "' (expected a..b)");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Long-platoon simulator with virtual-leader election"};
    app.require_subcommand(1);

    std::string scenario, out, seeds, trace_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool frames = false;
    unsigned threads = 0;

    auto* run = app.add_subcommand("run", "Run one simulation");
    run->add_option("--scenario", scenario, "Scenario file")->required();
    run->add_option("--seed", seed, "Random seed (overrides the scenario)")
        ->each([&](const std::string&) { seed_given = true; });
    run->add_option("--out", out, "Output directory (or $LPLATOON_OUT)");
    run->add_flag("--frames", frames, "Also write a hex dump of every frame");

    auto* sw = app.add_subcommand("sweep", "Run a range of seeds in parallel");
    sw->add_option("--scenario", scenario, "Scenario file")->required();
    sw->add_option("--seeds", seeds, "Seed range a..b")->required();
    sw->add_option("--out", out, "Output directory (or $LPLATOON_OUT)");
    sw->add_option("--threads", threads, "Worker threads (0 = all cores)");

    auto* met = app.add_subcommand("metrics", "Recompute metrics from a run directory");
    met->add_option("--trace", trace_dir, "Run directory")->required();

    auto* val = app.add_subcommand("validate", "Check a scenario file");
    val->add_option("--scenario", scenario, "Scenario file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            ScenarioConfig cfg = load_scenario(scenario);
            if (seed_given) cfg.seed = seed;
            fs::path dir = resolve_out(out);
            RunOptions opt;
            opt.record_frames = frames;
            MetricsReport m = run_to_directory(cfg, dir, opt);
            std::cout << to_text(m);
        } else if (*sw) {
            ScenarioConfig cfg = load_scenario(scenario);
            auto [a, b] = parse_seed_range(seeds);
            fs::path dir = resolve_out(out);
            auto entries = sweep(cfg, a, b, dir, threads);
            int failed = 0;
            for (const auto& e : entries) {
                if (!e.ok) {
                    ++failed;
                    std::cerr << "seed " << e.seed << ": " << e.error << "\n";
                }
            }
            std::cout << "runs=" << entries.size() << " failed=" << failed << " out=" << dir.string() << "\n";
            return failed ? 1 : 0;
        } else if (*met) {
            std::cout << to_text(recompute_metrics(trace_dir));
        } else if (*val) {
            ScenarioConfig cfg = load_scenario(scenario);
            std::cout << "ok: " << cfg.name << " (" << cfg.platoon_size << " vehicles, "
                      << cfg.duration << " s)\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
