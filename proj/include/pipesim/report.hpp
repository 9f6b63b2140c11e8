#pragma once

#include <string>

#include "pipesim/memory.hpp"
#include "pipesim/network.hpp"
#include "pipesim/perf.hpp"
#include "pipesim/search.hpp"
#include "pipesim/simulate.hpp"

namespace pipesim {

// "552.0 MiB", "10.2 GiB" and friends; binary units throughout.
std::string format_bytes(double bytes);
double to_gib(double bytes);

// Fixed-precision decimal, locale-independent.
std::string format_number(double value, int decimals);

struct AnalysisReport {
    ModelSpec model;
    ClusterSpec cluster;
    ParallelConfig config;
    BatchStats stats;
    MemoryBreakdown memory;
    NetworkAssessment network;
    MethodProfile profile;
};

AnalysisReport analyze_config(const ModelSpec& model, const ClusterSpec& cluster,
                              const ParallelConfig& config,
                              const MemoryOptions& mem_opts = {},
                              const NetworkOptions& net_opts = {});

std::string analysis_text(const AnalysisReport& report);
std::string analysis_csv(const AnalysisReport& report);

// Chrome trace-event JSON: one process per device, lanes as threads 0..2.
std::string chrome_trace_json(const Timeline& timeline, const TaskGraph& graph);

struct SimulationSummary {
    double makespan = 0.0;
    double bubble = 0.0;
    double throughput = 0.0;  // flop/s per GPU, when cluster context is known
    double utilization = 0.0;
    count_t peak_inflight_layers = 0;
};

std::string summary_text(const SimulationSummary& summary,
                         const Timeline& timeline);

// One row per device lane, time left to right.
std::string gantt_svg(const Timeline& timeline, const TaskGraph& graph);

std::string best_table_csv(const BestTable& table, const ClusterSpec& cluster);

std::string tradeoff_csv(const TradeoffCurve& curve);

// Log-log cost-versus-time chart, one polyline per schedule.
std::string tradeoff_svg(const std::vector<std::pair<Schedule, TradeoffCurve>>& curves);

std::string noise_scale_text(const NoiseScaleEstimate& est, std::size_t n_samples,
                             std::size_t dim);
std::string noise_scale_csv(const NoiseScaleEstimate& est, std::size_t n_samples,
                            std::size_t dim);

} // namespace pipesim
