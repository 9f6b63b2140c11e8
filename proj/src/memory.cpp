#include "pipesim/memory.hpp"

#include <algorithm>

namespace pipesim {

double state_memory(const ModelSpec& model, const ParallelConfig& config,
                    const MemoryOptions& opts) {
    config.validate(model);
    const double params = static_cast<double>(param_count(model));
    const double model_split =
        static_cast<double>(config.n_pp) * static_cast<double>(config.n_tp);
    switch (config.dp_variant) {
    case DpVariant::DP0:
        return opts.dp0_bytes_per_param * params / model_split;
    case DpVariant::DP_PS: {
        // Gradients can be reduced as soon as a stage finishes its backward
        // passes, halving the buffer footprint.
        const bool immediate_reduce =
            config.schedule == Schedule::BreadthFirst || config.n_mb == 1;
        const double k = immediate_reduce ? 2.0 : 4.0;
        return k * params / model_split;
    }
    case DpVariant::DP_FS:
        // Two reconstructed layers resident at a time.
        return 8.0 * params /
               (static_cast<double>(model.n_layers) *
                static_cast<double>(config.n_tp));
    }
    return 0.0;
}

double activation_memory(const ModelSpec& model, const ParallelConfig& config) {
    config.validate(model);
    const double tp = static_cast<double>(config.n_tp);
    const double factor =
        10.0 + 24.0 / tp +
        5.0 * static_cast<double>(model.s_seq) *
            static_cast<double>(model.n_heads) /
            (static_cast<double>(model.s_hidden) * tp);
    return static_cast<double>(model.s_seq) * static_cast<double>(config.s_mb) *
           static_cast<double>(model.s_hidden) * factor;
}

double checkpoint_count(const ModelSpec& model, const ParallelConfig& config) {
    config.validate(model);
    const double layers = static_cast<double>(model.n_layers);
    const double p = static_cast<double>(config.n_pp);
    const double mb = static_cast<double>(config.n_mb);
    switch (config.schedule) {
    case Schedule::NoPipeline:
        return mb * layers;
    case Schedule::GPipe:
    case Schedule::BreadthFirst:
        return mb * layers / p;
    case Schedule::OneFOneB:
        return std::min(mb * layers / p, (2.0 * p - 1.0) * layers / p);
    case Schedule::DepthFirst:
        return std::min(mb * layers / p, layers + p - 1.0);
    }
    return 0.0;
}

double checkpoint_memory(const ModelSpec& model, const ParallelConfig& config) {
    const double per_checkpoint = 2.0 * static_cast<double>(model.s_seq) *
                                  static_cast<double>(config.s_mb) *
                                  static_cast<double>(model.s_hidden) /
                                  static_cast<double>(config.n_tp);
    return checkpoint_count(model, config) * per_checkpoint;
}

MemoryBreakdown total_memory(const ModelSpec& model, const ParallelConfig& config,
                             const MemoryOptions& opts) {
    MemoryBreakdown mb;
    mb.state_bytes = state_memory(model, config, opts);
    mb.activation_bytes = activation_memory(model, config);
    mb.checkpoint_bytes = checkpoint_memory(model, config);
    mb.total_bytes = mb.state_bytes + mb.activation_bytes + mb.checkpoint_bytes;
    return mb;
}

bool feasible(const ModelSpec& model, const ParallelConfig& config,
              const ClusterSpec& cluster, const MemoryOptions& opts) {
    const MemoryBreakdown mb = total_memory(model, config, opts);
    return mb.total_bytes <= opts.headroom * cluster.mem_capacity;
}

} // namespace pipesim
