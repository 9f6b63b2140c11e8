#include "pipesim/schedule.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

#include "pipesim/network.hpp"

namespace pipesim {

std::string to_string(TaskKind k) {
    switch (k) {
    case TaskKind::Fwd: return "Fwd";
    case TaskKind::Bwd: return "Bwd";
    case TaskKind::Reduce: return "Reduce";
    case TaskKind::Reconstruct: return "Reconstruct";
    case TaskKind::Transfer: return "Transfer";
    }
    return "?";
}

StagePlacement place_stages(const ModelSpec& model, const ParallelConfig& config) {
    config.validate(model);
    StagePlacement pl;
    pl.n_stage = config.n_stage();
    pl.n_pp = config.n_pp;
    pl.layers_per_stage = model.n_layers / pl.n_stage;
    pl.assignment.resize(static_cast<std::size_t>(pl.n_stage));
    for (count_t s = 0; s < pl.n_stage; ++s)
        pl.assignment[static_cast<std::size_t>(s)] = s % config.n_pp;
    return pl;
}

void TimingModel::validate() const {
    if (t_fwd_stage < 0 || t_pp_transfer < 0 || pp_latency < 0 ||
        t_dp_reduce_stage < 0 || t_dp_reconstruct_stage < 0)
        throw SpecError("timing: durations must be non-negative");
    if (bwd_ratio < 1.0)
        throw SpecError("timing: bwd_ratio must be >= 1");
}

TimingModel TimingModel::derive(const ModelSpec& model,
                                const ParallelConfig& config,
                                const ClusterSpec& cluster, bool recompute) {
    config.validate(model, cluster);
    TimingModel t;
    t.bwd_ratio = recompute ? 3.0 : 2.0;

    double effective = cluster.peak_flops * cluster.kernel_efficiency;
    if (config.n_tp >= 2) {
        const double blocking = tp_intensity(model, config).blocking;
        const double oh = hardware_intensity(cluster, Fabric::Intra) / blocking;
        effective /= 1.0 + oh;
    }
    const double flop_per_device = compute_per_gpu(model, config);
    const double stage_passes =
        static_cast<double>(config.n_mb) * static_cast<double>(config.n_loop);
    t.t_fwd_stage =
        flop_per_device / (stage_passes * (1.0 + t.bwd_ratio) * effective);

    const double pp_bw = pp_fabric(config, cluster) == Fabric::Intra
                             ? cluster.bw_intra
                             : cluster.bw_inter;
    // 4 bytes per token and hidden channel counts both endpoints' traffic.
    t.t_pp_transfer = 4.0 * static_cast<double>(model.s_hidden) *
                      static_cast<double>(model.s_seq) *
                      static_cast<double>(config.s_mb) /
                      (static_cast<double>(config.n_tp) * pp_bw);
    t.pp_latency = cluster.pp_latency;

    const double dp_bw = dp_fabric(config, cluster) == Fabric::Intra
                             ? cluster.bw_intra
                             : cluster.bw_inter;
    const double stage_params = 12.0 * static_cast<double>(model.s_hidden) *
                                static_cast<double>(model.s_hidden) *
                                static_cast<double>(model.n_layers) /
                                (static_cast<double>(config.n_stage()) *
                                 static_cast<double>(config.n_tp));
    if (config.n_dp >= 2) {
        // 8 bytes per parameter for the reduction, 2 per reconstruction pass.
        t.t_dp_reduce_stage = 8.0 * stage_params / dp_bw;
        t.t_dp_reconstruct_stage = 2.0 * stage_params / dp_bw;
    }
    return t;
}

std::vector<TaskId> TaskGraph::tasks_of_kind(TaskKind kind) const {
    std::vector<TaskId> out;
    for (const Task& t : tasks)
        if (t.kind == kind) out.push_back(t.id);
    return out;
}

namespace {

struct ComputeStep {
    TaskKind kind; // Fwd or Bwd
    count_t mb;
    count_t stage;
};

// How often sharded-DP network operations repeat, and at which granularity
// gradients are reduced.
enum class DpGranularity { PerStage, PerGroup, PerMicroBatch };

struct BuildParams {
    count_t n_devices = 1;
    count_t n_stage = 1;
    count_t n_mb = 1;
    DpVariant dp_variant = DpVariant::DP0;
    bool with_dp_traffic = false;
    DpGranularity granularity = DpGranularity::PerStage;
    count_t group_size = 1; // micro-batches per depth-first sequence
};

class GraphBuilder {
public:
    GraphBuilder(const StagePlacement& pl, BuildParams params)
        : pl_(pl), params_(params) {
        graph_.n_devices = params.n_devices;
        graph_.compute_program.resize(
            static_cast<std::size_t>(params.n_devices));
        fwd_id_.assign(index(params.n_mb, params.n_stage), -1);
        bwd_id_.assign(index(params.n_mb, params.n_stage), -1);
    }

    TaskId add_task(count_t device, Lane lane, TaskKind kind, count_t mb,
                    count_t stage) {
        Task t;
        t.id = static_cast<TaskId>(graph_.tasks.size());
        t.device = device;
        t.lane = lane;
        t.kind = kind;
        t.micro_batch = mb;
        t.stage = stage;
        graph_.tasks.push_back(std::move(t));
        return graph_.tasks.back().id;
    }

    void set_programs(const std::vector<std::vector<ComputeStep>>& programs) {
        for (count_t d = 0; d < params_.n_devices; ++d) {
            for (const ComputeStep& step :
                 programs[static_cast<std::size_t>(d)]) {
                const TaskId id =
                    add_task(d, Lane::Compute, step.kind, step.mb, step.stage);
                auto& slot = step.kind == TaskKind::Fwd
                                 ? fwd_id_[index(step.mb, step.stage)]
                                 : bwd_id_[index(step.mb, step.stage)];
                if (slot != -1)
                    throw SpecError("schedule: duplicate compute step");
                slot = id;
                Task& t = graph_.tasks[static_cast<std::size_t>(id)];
                t.priority = static_cast<int>(
                    graph_.compute_program[static_cast<std::size_t>(d)].size());
                graph_.compute_program[static_cast<std::size_t>(d)].push_back(id);
            }
        }
        for (count_t mb = 0; mb < params_.n_mb; ++mb)
            for (count_t s = 0; s < params_.n_stage; ++s)
                if (fwd(mb, s) == -1 || bwd(mb, s) == -1)
                    throw SpecError("schedule: incomplete compute program");
    }

    TaskId fwd(count_t mb, count_t stage) const { return fwd_id_[index(mb, stage)]; }
    TaskId bwd(count_t mb, count_t stage) const { return bwd_id_[index(mb, stage)]; }

    void add_dep(TaskId task, TaskId dep) {
        graph_.tasks[static_cast<std::size_t>(task)].deps.push_back(dep);
    }

    // Stage hand-offs; a transfer occupies the PP lane of both endpoints.
    void wire_pipeline() {
        int seq = 0;
        for (count_t s = 0; s + 1 < params_.n_stage; ++s) {
            const count_t src = pl_.device_of(s);
            const count_t dst = pl_.device_of(s + 1);
            for (count_t mb = 0; mb < params_.n_mb; ++mb) {
                if (src == dst) {
                    add_dep(fwd(mb, s + 1), fwd(mb, s));
                } else {
                    const TaskId t =
                        add_task(src, Lane::PpNet, TaskKind::Transfer, mb, s);
                    graph_.tasks[static_cast<std::size_t>(t)].peer_device = dst;
                    graph_.tasks[static_cast<std::size_t>(t)].priority = seq++;
                    add_dep(t, fwd(mb, s));
                    add_dep(fwd(mb, s + 1), t);
                }
            }
        }
        for (count_t s = params_.n_stage; s-- > 1;) {
            const count_t src = pl_.device_of(s);
            const count_t dst = pl_.device_of(s - 1);
            for (count_t mb = 0; mb < params_.n_mb; ++mb) {
                if (src == dst) {
                    add_dep(bwd(mb, s - 1), bwd(mb, s));
                } else {
                    const TaskId t =
                        add_task(src, Lane::PpNet, TaskKind::Transfer, mb, s);
                    graph_.tasks[static_cast<std::size_t>(t)].peer_device = dst;
                    graph_.tasks[static_cast<std::size_t>(t)].priority = seq++;
                    add_dep(t, bwd(mb, s));
                    add_dep(bwd(mb, s - 1), t);
                }
            }
        }
        for (count_t mb = 0; mb < params_.n_mb; ++mb)
            for (count_t s = 0; s < params_.n_stage; ++s)
                add_dep(bwd(mb, s), fwd(mb, s));
    }

    void wire_dp_traffic() {
        if (!params_.with_dp_traffic) return;
        if (params_.dp_variant == DpVariant::DP_FS) wire_reconstruction();
        wire_reduction();
        assign_dp_priorities();
    }

    TaskGraph take() { return std::move(graph_); }

private:
    std::size_t index(count_t mb, count_t stage) const {
        return static_cast<std::size_t>(mb * params_.n_stage + stage);
    }

    count_t unit_of(count_t mb) const {
        switch (params_.granularity) {
        case DpGranularity::PerStage: return 0;
        case DpGranularity::PerGroup: return mb / params_.group_size;
        case DpGranularity::PerMicroBatch: return mb;
        }
        return 0;
    }

    int program_pos(TaskId id) const {
        return graph_.tasks[static_cast<std::size_t>(id)].priority;
    }

    // One gradient reduction per (stage, accumulation unit), eligible as soon
    // as the unit's last backward for that stage completes.
    void wire_reduction() {
        for (count_t d = 0; d < params_.n_devices; ++d) {
            std::map<std::pair<count_t, count_t>, TaskId> last_bwd;
            for (const TaskId id :
                 graph_.compute_program[static_cast<std::size_t>(d)]) {
                const Task& t = graph_.tasks[static_cast<std::size_t>(id)];
                if (t.kind != TaskKind::Bwd) continue;
                last_bwd[{t.stage, unit_of(t.micro_batch)}] = id;
            }
            for (const auto& [key, dep] : last_bwd) {
                const Task& b = graph_.tasks[static_cast<std::size_t>(dep)];
                const TaskId r = add_task(d, Lane::DpNet, TaskKind::Reduce,
                                          b.micro_batch, key.first);
                add_dep(r, dep);
                dp_order_.push_back({r, 2 * program_pos(dep) + 1});
            }
        }
    }

    // Weight all-gathers for the fully sharded variant. A reconstruction is
    // issued once the buffer two uses back is released (double buffering) and
    // gates every compute task of its (direction, unit, stage) slot.
    void wire_reconstruction() {
        for (count_t d = 0; d < params_.n_devices; ++d) {
            struct Unit {
                std::vector<TaskId> gated;
            };
            std::vector<Unit> units;
            std::map<std::tuple<int, count_t, count_t>, std::size_t> seen;
            for (const TaskId id :
                 graph_.compute_program[static_cast<std::size_t>(d)]) {
                const Task& t = graph_.tasks[static_cast<std::size_t>(id)];
                if (t.kind != TaskKind::Fwd && t.kind != TaskKind::Bwd) continue;
                const auto key =
                    std::make_tuple(t.kind == TaskKind::Fwd ? 0 : 1,
                                    unit_of(t.micro_batch), t.stage);
                auto [it, inserted] = seen.try_emplace(key, units.size());
                if (inserted) units.push_back({});
                units[it->second].gated.push_back(id);
            }
            for (std::size_t j = 0; j < units.size(); ++j) {
                const Task& first =
                    graph_.tasks[static_cast<std::size_t>(units[j].gated.front())];
                const TaskId r = add_task(d, Lane::DpNet, TaskKind::Reconstruct,
                                          first.micro_batch, first.stage);
                for (const TaskId gated : units[j].gated) add_dep(gated, r);
                int release_pos = -1;
                if (j >= 2) {
                    const TaskId release = units[j - 2].gated.back();
                    add_dep(r, release);
                    release_pos = program_pos(release);
                }
                dp_order_.push_back({r, 2 * release_pos});
            }
        }
    }

    void assign_dp_priorities() {
        std::stable_sort(dp_order_.begin(), dp_order_.end(),
                         [](const auto& a, const auto& b) {
                             return a.second < b.second;
                         });
        int rank = 0;
        for (const auto& [id, key] : dp_order_)
            graph_.tasks[static_cast<std::size_t>(id)].priority = rank++;
    }

    const StagePlacement& pl_;
    BuildParams params_;
    TaskGraph graph_;
    std::vector<TaskId> fwd_id_, bwd_id_;
    std::vector<std::pair<TaskId, int>> dp_order_;
};

std::vector<std::vector<ComputeStep>> forward_first_programs(
    const StagePlacement& pl, count_t n_mb) {
    const count_t p = pl.n_pp;
    const count_t v = pl.n_stage / p;
    std::vector<std::vector<ComputeStep>> programs(
        static_cast<std::size_t>(p));
    for (count_t d = 0; d < p; ++d) {
        auto& prog = programs[static_cast<std::size_t>(d)];
        for (count_t c = 0; c < v; ++c)
            for (count_t mb = 0; mb < n_mb; ++mb)
                prog.push_back({TaskKind::Fwd, mb, c * p + d});
        for (count_t c = v; c-- > 0;)
            for (count_t mb = 0; mb < n_mb; ++mb)
                prog.push_back({TaskKind::Bwd, mb, c * p + d});
    }
    return programs;
}

// Interleaves warm-up forwards with the steady one-forward-one-backward
// alternation, then drains the remaining backwards.
std::vector<ComputeStep> interleave_1f1b(const std::vector<ComputeStep>& fwd,
                                         const std::vector<ComputeStep>& bwd,
                                         std::size_t warmup) {
    std::vector<ComputeStep> prog;
    prog.reserve(fwd.size() + bwd.size());
    warmup = std::min(warmup, fwd.size());
    for (std::size_t k = 0; k < warmup; ++k) prog.push_back(fwd[k]);
    std::size_t next_bwd = 0;
    for (std::size_t k = warmup; k < fwd.size(); ++k) {
        prog.push_back(fwd[k]);
        prog.push_back(bwd[next_bwd++]);
    }
    for (; next_bwd < bwd.size(); ++next_bwd) prog.push_back(bwd[next_bwd]);
    return prog;
}

std::vector<std::vector<ComputeStep>> backward_first_programs(
    const StagePlacement& pl, count_t n_mb) {
    const count_t p = pl.n_pp;
    const count_t v = pl.n_stage / p;
    std::vector<std::vector<ComputeStep>> programs(
        static_cast<std::size_t>(p));
    for (count_t d = 0; d < p; ++d) {
        std::vector<ComputeStep> fwd, bwd;
        for (count_t g = 0; g < n_mb / p; ++g) {
            for (count_t c = 0; c < v; ++c)
                for (count_t i = 0; i < p; ++i)
                    fwd.push_back({TaskKind::Fwd, g * p + i, c * p + d});
            for (count_t c = v; c-- > 0;)
                for (count_t i = 0; i < p; ++i)
                    bwd.push_back({TaskKind::Bwd, g * p + i, c * p + d});
        }
        // With a single micro-batch sequence the whole forward pass runs
        // ahead of any backward.
        const std::size_t warmup =
            n_mb == p ? fwd.size()
                      : static_cast<std::size_t>(2 * (p - d - 1) + (v - 1) * p);
        programs[static_cast<std::size_t>(d)] = interleave_1f1b(fwd, bwd, warmup);
    }
    return programs;
}

std::vector<std::vector<ComputeStep>> plain_1f1b_programs(
    const StagePlacement& pl, count_t n_mb) {
    const count_t p = pl.n_pp;
    std::vector<std::vector<ComputeStep>> programs(
        static_cast<std::size_t>(p));
    for (count_t d = 0; d < p; ++d) {
        std::vector<ComputeStep> fwd, bwd;
        for (count_t mb = 0; mb < n_mb; ++mb) {
            fwd.push_back({TaskKind::Fwd, mb, d});
            bwd.push_back({TaskKind::Bwd, mb, d});
        }
        programs[static_cast<std::size_t>(d)] =
            interleave_1f1b(fwd, bwd, static_cast<std::size_t>(p - d - 1));
    }
    return programs;
}

BuildParams dp_params(const ParallelConfig& config) {
    BuildParams params;
    params.n_mb = config.n_mb;
    params.dp_variant = config.dp_variant;
    params.with_dp_traffic = config.n_dp >= 2;
    switch (config.schedule) {
    case Schedule::BreadthFirst:
        params.granularity = DpGranularity::PerStage;
        break;
    case Schedule::DepthFirst:
        params.granularity = DpGranularity::PerGroup;
        params.group_size = config.n_pp;
        break;
    default:
        // Standard gradient accumulation repeats the sharded operations for
        // every micro-batch.
        params.granularity = DpGranularity::PerMicroBatch;
        break;
    }
    // Non-sharded variants keep full gradient buffers and reduce once per
    // stage regardless of the schedule.
    if (config.dp_variant != DpVariant::DP_FS)
        params.granularity = DpGranularity::PerStage;
    return params;
}

} // namespace

TaskGraph build_tasks(const ModelSpec& model, const ParallelConfig& config,
                      const StagePlacement& placement) {
    config.validate(model);
    if (placement.n_stage != config.n_stage() || placement.n_pp != config.n_pp)
        throw SpecError("schedule: placement does not match the configuration");

    BuildParams params = dp_params(config);
    params.n_devices = config.n_pp;
    params.n_stage = placement.n_stage;

    std::vector<std::vector<ComputeStep>> programs;
    switch (config.schedule) {
    case Schedule::NoPipeline:
    case Schedule::GPipe:
    case Schedule::BreadthFirst:
        programs = forward_first_programs(placement, config.n_mb);
        break;
    case Schedule::OneFOneB:
        programs = plain_1f1b_programs(placement, config.n_mb);
        break;
    case Schedule::DepthFirst:
        programs = backward_first_programs(placement, config.n_mb);
        break;
    }

    GraphBuilder builder(placement, params);
    builder.set_programs(programs);
    builder.wire_pipeline();
    builder.wire_dp_traffic();
    return builder.take();
}

TaskGraph build_accumulation_tasks(const ModelSpec& model, DpVariant dp_variant,
                                   AccumulationOrder order, count_t n_mb) {
    model.validate();
    if (n_mb < 1) throw SpecError("accumulation: n_mb must be >= 1");

    StagePlacement pl;
    pl.n_stage = model.n_layers;
    pl.n_pp = 1;
    pl.layers_per_stage = 1;
    pl.assignment.assign(static_cast<std::size_t>(model.n_layers), 0);

    BuildParams params;
    params.n_devices = 1;
    params.n_stage = pl.n_stage;
    params.n_mb = n_mb;
    params.dp_variant = dp_variant;
    params.with_dp_traffic = true;
    params.granularity = order == AccumulationOrder::BreadthFirst
                             ? DpGranularity::PerStage
                             : DpGranularity::PerMicroBatch;
    if (dp_variant != DpVariant::DP_FS)
        params.granularity = DpGranularity::PerStage;

    std::vector<std::vector<ComputeStep>> programs(1);
    auto& prog = programs[0];
    if (order == AccumulationOrder::DepthFirst) {
        for (count_t mb = 0; mb < n_mb; ++mb) {
            for (count_t l = 0; l < pl.n_stage; ++l)
                prog.push_back({TaskKind::Fwd, mb, l});
            for (count_t l = pl.n_stage; l-- > 0;)
                prog.push_back({TaskKind::Bwd, mb, l});
        }
    } else {
        for (count_t l = 0; l < pl.n_stage; ++l)
            for (count_t mb = 0; mb < n_mb; ++mb)
                prog.push_back({TaskKind::Fwd, mb, l});
        for (count_t l = pl.n_stage; l-- > 0;)
            for (count_t mb = 0; mb < n_mb; ++mb)
                prog.push_back({TaskKind::Bwd, mb, l});
    }

    GraphBuilder builder(pl, params);
    builder.set_programs(programs);
    builder.wire_pipeline();
    builder.wire_dp_traffic();
    return builder.take();
}

} // namespace pipesim
