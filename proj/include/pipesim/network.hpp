#pragma once

#include "pipesim/types.hpp"

namespace pipesim {

enum class Verdict { OverlappedOK, AmortizedOK, Bottleneck };

std::string to_string(Verdict v);

struct TpIntensity {
    double total = 0.0;    // flop per byte over all tensor-parallel traffic
    double blocking = 0.0; // flop per byte over the non-overlappable share
};

struct NetworkOptions {
    // Quantifies the "much larger than" amortization margin: a channel that
    // cannot be overlapped is acceptable when its overhead estimate stays
    // below 1/margin.
    double margin = 10.0;
    // When positive, reported in the assessment in place of the computed
    // hiding threshold (for calibrating against a measured value).
    double beta_net_override = 0.0;
};

struct NetworkAssessment {
    double dp_intensity = 0.0;
    double pp_intensity = 0.0;
    double tp_intensity_total = 0.0;
    double tp_intensity_blocking = 0.0;
    double dp_overhead_est = 0.0;
    double pp_overhead_est = 0.0;
    double tp_overhead_est = 0.0;
    double beta_net = 0.0;
    Verdict dp_verdict = Verdict::OverlappedOK;
    Verdict pp_verdict = Verdict::OverlappedOK;
    Verdict tp_verdict = Verdict::OverlappedOK;
};

// Gradient reduction / weight reconstruction flop-per-byte ratio. Selected by
// (dp_variant, schedule): sharded variants pay the reconstruction surcharge
// and, outside the breadth-first schedule, the per-micro-batch repetition.
double dp_intensity(const ParallelConfig& config, const ModelSpec& model);

// Stage hand-off intensity, 24 * s_hidden * n_layers / (n_pp * n_loop).
// Requires n_pp >= 2.
double pp_intensity(const ModelSpec& model, const ParallelConfig& config);

// Activation all-reduce intensity; requires n_tp >= 2. Two thirds of the
// traffic cannot be hidden, so the blocking intensity is 1.5x the total.
TpIntensity tp_intensity(const ModelSpec& model, const ParallelConfig& config);

// Estimated network/compute time ratio for an operation of the given
// intensity on the given hardware intensity.
double overhead_estimate(double op_intensity, double hw_intensity);

// Smallest batch size per GPU, on the grid reachable by scaling the
// micro-batch size, at which gradient reduction is fully hidden.
double beta_net(const ModelSpec& model, const ParallelConfig& config,
                const ClusterSpec& cluster);

NetworkAssessment assess_network(const ModelSpec& model,
                                 const ParallelConfig& config,
                                 const ClusterSpec& cluster,
                                 const NetworkOptions& opts = {});

} // namespace pipesim
