#pragma once

#include "pipesim/simulate.hpp"
#include "pipesim/types.hpp"

namespace pipesim {

struct PerfPoint {
    double beta = 0.0;       // samples per GPU
    double throughput = 0.0; // flop/s per GPU
    double utilization = 0.0;
    ParallelConfig config;
};

PerfPoint throughput(const ModelSpec& model, const ParallelConfig& config,
                     const Timeline& timeline, const ClusterSpec& cluster);

// Relative sample count needed to reach a fixed loss at batch size B.
double sample_overhead(double batch, double b_crit);

struct NoiseScaleEstimate {
    double b_noise = 0.0;
    double grad_norm_sq = 0.0;
    double trace_sigma0 = 0.0;
};

// Gradient-noise estimate from per-sample gradients: the per-dimension
// variance trace (Bessel-corrected) over the squared norm of the mean.
NoiseScaleEstimate estimate_noise_scale(
    const std::vector<std::vector<double>>& per_sample_gradients);

// One row of the relative method-comparison table. Values are normalized the
// way the comparison is usually quoted: bubble at the minimal micro-batch
// count, memory in layer equivalents, network volume per parameter round.
struct MethodProfile {
    double bubble = 0.0;
    double state_memory_factor = 0.0;      // layer equivalents
    double activation_memory_factor = 0.0; // micro-batch-size equivalents
    double dp_network_volume = 0.0;
    double dp_overlap_fraction = 0.0;
    double pp_network_volume = 0.0; // stage crossings per device and pass
    count_t chimera_pipelines = 0;
};

MethodProfile method_profile(const ModelSpec& model, const ParallelConfig& config);
// The analytic profile of the Chimera alternative (n_ch even, >= 2).
MethodProfile chimera_profile(const ModelSpec& model, const ParallelConfig& config,
                              count_t n_ch);

struct TradeoffPoint {
    count_t n_gpu = 0;
    double batch = 0.0;
    double time_seconds = 0.0;   // relative units when throughput is relative
    double cost_gpu_seconds = 0.0;
    double beta = 0.0;
    Schedule schedule = Schedule::NoPipeline;
};

struct TradeoffCurve {
    double base_samples = 0.0;
    double base_tokens = 0.0;
    std::vector<TradeoffPoint> points;
};

enum class FrontierObjective { MinTime, MinCost };

// Extrapolates measured (beta, throughput) points across cluster sizes with
// constant per-GPU batch and utilization, picking the best point per size.
TradeoffCurve tradeoff_curve(const std::vector<PerfPoint>& perf_points,
                             const ModelSpec& model,
                             const std::vector<count_t>& cluster_sizes,
                             double b_crit, double base_samples = -1.0,
                             FrontierObjective objective = FrontierObjective::MinTime);

} // namespace pipesim
