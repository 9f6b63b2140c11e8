#pragma once

#include <optional>
#include <set>
#include <string>

#include "pipesim/perf.hpp"
#include "pipesim/schedule.hpp"
#include "pipesim/search.hpp"

namespace pipesim {

// One parsed tool invocation: sections model/cluster/config/space/run of the
// JSON spec file plus any command-line overrides already applied.
struct RunSpec {
    std::string command;
    ModelSpec model;
    ClusterSpec cluster;
    std::optional<ParallelConfig> config;
    std::optional<SearchSpace> space;

    std::string out_dir = "out";
    std::set<std::string> formats = {"text", "csv"};

    MemoryOptions memory;
    NetworkOptions network;
    std::optional<TimingModel> timing; // explicit values win over derivation
    bool recompute = true;

    double b_crit = 0.0;
    double base_samples = -1.0;
    std::vector<count_t> cluster_sizes;
    FrontierObjective objective = FrontierObjective::MinTime;
    std::vector<PerfPoint> points;  // inline trade-off inputs
    std::string points_file;        // or a CSV of beta,throughput[,schedule]

    std::string gradients_file;
    std::uint64_t seed = 0;
};

struct RunOverrides {
    std::optional<std::string> command;
    std::optional<std::string> model_preset;
    std::optional<std::string> cluster_preset;
    std::optional<std::string> out_dir;
    std::optional<std::string> formats; // comma separated
    std::optional<std::uint64_t> seed;
};

RunSpec parse_run_spec_file(const std::string& path,
                            const RunOverrides& overrides = {});
RunSpec parse_run_spec_text(const std::string& text,
                            const RunOverrides& overrides = {});

// beta,throughput_tflops[,schedule] rows, header optional.
std::vector<PerfPoint> read_perf_points_csv(const std::string& path);

// Per-sample gradients: little-endian binary (u64 count, u64 dim, f64 data)
// or CSV with one sample per line.
std::vector<std::vector<double>> read_gradients(const std::string& path);

} // namespace pipesim
