#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pipesim/error.hpp"

namespace pipesim {

using count_t = std::int64_t;

enum class DpVariant { DP0, DP_PS, DP_FS };
enum class Schedule { NoPipeline, GPipe, OneFOneB, DepthFirst, BreadthFirst };

std::string to_string(DpVariant v);
std::string to_string(Schedule s);
DpVariant dp_variant_from_string(std::string_view s);
Schedule schedule_from_string(std::string_view s);

inline bool is_looped(Schedule s) {
    return s == Schedule::DepthFirst || s == Schedule::BreadthFirst;
}
inline bool is_pipelined(Schedule s) { return s != Schedule::NoPipeline; }

// Transformer architecture. Head/MLP sizes default to the usual
// s_hidden = n_heads * s_head, s_mlp = 4 * s_hidden choices.
struct ModelSpec {
    count_t n_layers = 1;
    count_t s_hidden = 1;
    count_t n_heads = 1;
    count_t s_head = 1;
    count_t s_mlp = 4;
    count_t s_seq = 1;
    count_t s_voc = 1;

    static ModelSpec make(count_t layers, count_t hidden, count_t heads,
                          count_t seq, count_t voc, count_t mlp = -1,
                          count_t head = -1);

    void validate() const;
};

// One homogeneous GPU cluster. Bandwidths are per-device totals
// (input + output); peak_flops is half-precision tensor-core throughput.
struct ClusterSpec {
    count_t n_node = 1;
    count_t s_node = 8;
    double peak_flops = 1.0;        // flop/s per device
    double bw_intra = 1.0;          // bytes/s per device, NVLink
    double bw_inter = 1.0;          // bytes/s per device, InfiniBand or similar
    double pp_latency = 0.0;        // seconds per point-to-point hand-off
    double mem_capacity = 0.0;      // bytes per device
    double kernel_efficiency = 0.6; // fraction of peak reached by dense kernels

    count_t n_gpu() const { return n_node * s_node; }
    void validate() const;
};

enum class Fabric { Intra, Inter };

// The (N_DP, N_TP, N_PP) grid plus micro-batching and schedule choice.
struct ParallelConfig {
    count_t n_dp = 1;
    count_t n_tp = 1;
    count_t n_pp = 1;
    count_t n_mb = 1;   // sequential micro-batches
    count_t s_mb = 1;   // micro-batch size in samples
    count_t n_loop = 1; // transformer stages per device
    DpVariant dp_variant = DpVariant::DP0;
    Schedule schedule = Schedule::NoPipeline;

    count_t n_stage() const { return n_pp * n_loop; }
    count_t batch_size() const { return n_dp * n_mb * s_mb; }
    count_t grid_size() const { return n_dp * n_tp * n_pp; }

    // Internal consistency; does not look at the model or cluster.
    void validate() const;
    // Adds stage divisibility against the model.
    void validate(const ModelSpec& model) const;
    // Adds the grid-size match against the cluster.
    void validate(const ModelSpec& model, const ClusterSpec& cluster) const;
};

struct BatchStats {
    count_t batch = 0;
    double beta = 0.0;
    double beta_min = 0.0;
    count_t n_gpu = 0;
};

// Total parameter count, 12 * n_layers * s_hidden^2. Exact integer.
count_t param_count(const ModelSpec& model);

// Flop per device and per batch: the per-token linear/attention/logit model
// scaled by the tokens processed on one device.
double compute_per_gpu(const ModelSpec& model, const ParallelConfig& config);

// Same, keeping only the leading dense-layer term.
double compute_per_gpu_dense(const ModelSpec& model, const ParallelConfig& config);

// Flop for one sample through the whole model (grid of one).
double compute_per_sample(const ModelSpec& model);

BatchStats batch_stats(const ParallelConfig& config, const ClusterSpec& cluster);

double hardware_intensity(const ClusterSpec& cluster, Fabric fabric);

// Placement convention: tensor ranks are adjacent devices, pipeline ranks
// stride by n_tp, data-parallel ranks stride by n_tp * n_pp.
Fabric dp_fabric(const ParallelConfig& config, const ClusterSpec& cluster);
Fabric pp_fabric(const ParallelConfig& config, const ClusterSpec& cluster);

// Named presets usable anywhere a model/cluster is accepted.
ModelSpec model_preset(std::string_view name);
ClusterSpec cluster_preset(std::string_view name);
std::vector<std::string> model_preset_names();
std::vector<std::string> cluster_preset_names();

} // namespace pipesim
