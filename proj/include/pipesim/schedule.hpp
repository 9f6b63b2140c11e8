#pragma once

#include <array>
#include <vector>

#include "pipesim/types.hpp"

namespace pipesim {

// Stage s lives on device s mod n_pp; every device hosts n_loop stages.
struct StagePlacement {
    count_t n_stage = 1;
    count_t n_pp = 1;
    count_t layers_per_stage = 1;
    std::vector<count_t> assignment; // stage index -> pipeline rank

    count_t device_of(count_t stage) const { return assignment[stage]; }
};

StagePlacement place_stages(const ModelSpec& model, const ParallelConfig& config);

// Task-level durations for one simulated pipeline group. Values can be set
// directly or derived from a model/cluster pair.
struct TimingModel {
    double t_fwd_stage = 1.0;          // forward, one micro-batch, one stage
    double bwd_ratio = 2.0;            // backward time relative to forward
    double t_pp_transfer = 0.0;        // stage hand-off, bandwidth term
    double pp_latency = 0.0;           // stage hand-off, fixed term
    double t_dp_reduce_stage = 0.0;    // gradient reduction of one stage
    double t_dp_reconstruct_stage = 0.0; // weight all-gather of one stage

    void validate() const;

    // Derives task durations from the analytic compute/traffic volumes.
    // Tensor-parallel overhead is folded into the compute times; recompute
    // folds the extra forward into the backward task (ratio 3).
    static TimingModel derive(const ModelSpec& model, const ParallelConfig& config,
                              const ClusterSpec& cluster, bool recompute = true);
};

enum class Lane : int { Compute = 0, DpNet = 1, PpNet = 2 };
enum class TaskKind { Fwd, Bwd, Reduce, Reconstruct, Transfer };

std::string to_string(TaskKind k);

using TaskId = int;

struct Task {
    TaskId id = -1;
    count_t device = 0;       // pipeline rank (transfers: sending device)
    count_t peer_device = -1; // transfers: receiving device
    Lane lane = Lane::Compute;
    TaskKind kind = TaskKind::Fwd;
    count_t micro_batch = -1;
    count_t stage = -1;
    int priority = 0; // rank within its lane program
    std::vector<TaskId> deps;
};

struct TaskGraph {
    count_t n_devices = 1;
    std::vector<Task> tasks;
    // Per device, the ordered compute program; the simulator runs it strictly
    // in order, which is what realizes each schedule's discipline.
    std::vector<std::vector<TaskId>> compute_program;

    std::vector<TaskId> tasks_of_kind(TaskKind kind) const;
};

// Builds the task DAG and per-device programs for the configured schedule.
// Data-parallel traffic tasks are emitted when n_dp >= 2; reconstruction
// tasks additionally require the fully sharded variant.
TaskGraph build_tasks(const ModelSpec& model, const ParallelConfig& config,
                      const StagePlacement& placement);

// Pure data-parallel gradient accumulation over layer-granular stages on a
// single device (n_pp = 1), in both traversal orders.
enum class AccumulationOrder { DepthFirst, BreadthFirst };

TaskGraph build_accumulation_tasks(const ModelSpec& model, DpVariant dp_variant,
                                   AccumulationOrder order, count_t n_mb);

} // namespace pipesim
