#pragma once

#include "pipesim/types.hpp"

namespace pipesim {

struct MemoryBreakdown {
    double state_bytes = 0.0;
    double activation_bytes = 0.0;
    double checkpoint_bytes = 0.0;
    double total_bytes = 0.0;
};

struct MemoryOptions {
    // Per-parameter byte multiplier for non-sharded training state. The full
    // range is 12 (state only) to 20 (state plus gradients and both
    // half-precision buffers); the default is the worst case.
    double dp0_bytes_per_param = 20.0;
    // Fraction of device memory the analytic total may occupy before a
    // configuration is declared infeasible (fragmentation allowance).
    double headroom = 0.85;
};

// Training-state bytes per device, by data-parallel variant.
double state_memory(const ModelSpec& model, const ParallelConfig& config,
                    const MemoryOptions& opts = {});

// Full activations plus gradients for one resident micro-batch.
double activation_memory(const ModelSpec& model, const ParallelConfig& config);

// Live stage-boundary checkpoints; the count is capped per schedule.
double checkpoint_count(const ModelSpec& model, const ParallelConfig& config);
double checkpoint_memory(const ModelSpec& model, const ParallelConfig& config);

MemoryBreakdown total_memory(const ModelSpec& model, const ParallelConfig& config,
                             const MemoryOptions& opts = {});

bool feasible(const ModelSpec& model, const ParallelConfig& config,
              const ClusterSpec& cluster, const MemoryOptions& opts = {});

} // namespace pipesim
