#include "pipesim/simulate.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace pipesim {

double Timeline::compute_busy_max() const {
    double best = 0.0;
    for (const auto& lanes : lane_busy)
        best = std::max(best, lanes[static_cast<int>(Lane::Compute)]);
    return best;
}

namespace {

double duration_of(const Task& t, const TimingModel& timing) {
    switch (t.kind) {
    case TaskKind::Fwd: return timing.t_fwd_stage;
    case TaskKind::Bwd: return timing.bwd_ratio * timing.t_fwd_stage;
    case TaskKind::Transfer: return timing.t_pp_transfer + timing.pp_latency;
    case TaskKind::Reduce: return timing.t_dp_reduce_stage;
    case TaskKind::Reconstruct: return timing.t_dp_reconstruct_stage;
    }
    return 0.0;
}

struct LaneKey {
    count_t device;
    Lane lane;
    bool operator<(const LaneKey& o) const {
        return std::tie(device, lane) < std::tie(o.device, o.lane);
    }
};

} // namespace

Timeline simulate(const TaskGraph& graph, const TimingModel& timing) {
    timing.validate();
    const std::size_t n = graph.tasks.size();

    Timeline tl;
    tl.n_devices = graph.n_devices;
    tl.events.resize(n);
    tl.lane_busy.assign(static_cast<std::size_t>(graph.n_devices),
                        {0.0, 0.0, 0.0});

    std::vector<int> pending_deps(n, 0);
    std::vector<std::vector<TaskId>> dependents(n);
    for (const Task& t : graph.tasks) {
        pending_deps[static_cast<std::size_t>(t.id)] =
            static_cast<int>(t.deps.size());
        for (const TaskId d : t.deps)
            dependents[static_cast<std::size_t>(d)].push_back(t.id);
    }

    std::map<LaneKey, double> lane_free;
    std::vector<std::size_t> cursor(static_cast<std::size_t>(graph.n_devices), 0);
    std::vector<bool> ready(n, false), done(n, false);
    std::set<std::pair<int, TaskId>> net_ready; // (priority, id), unstarted
    std::size_t remaining = n;

    auto mark_ready = [&](TaskId id) {
        ready[static_cast<std::size_t>(id)] = true;
        const Task& t = graph.tasks[static_cast<std::size_t>(id)];
        if (t.lane != Lane::Compute) net_ready.insert({t.priority, id});
    };
    for (std::size_t i = 0; i < n; ++i)
        if (pending_deps[i] == 0) mark_ready(static_cast<TaskId>(i));

    // (end time, id) of running tasks.
    std::priority_queue<std::pair<double, TaskId>,
                        std::vector<std::pair<double, TaskId>>, std::greater<>>
        running;

    auto lanes_of = [&](const Task& t) {
        std::vector<LaneKey> lanes;
        lanes.push_back({t.device, t.lane});
        if (t.kind == TaskKind::Transfer)
            lanes.push_back({t.peer_device, Lane::PpNet});
        return lanes;
    };

    auto start_task = [&](const Task& t, double now) {
        const double dur = duration_of(t, timing);
        tl.events[static_cast<std::size_t>(t.id)] = {t.id, now, now + dur};
        for (const LaneKey& lk : lanes_of(t)) {
            lane_free[lk] = now + dur;
            tl.lane_busy[static_cast<std::size_t>(lk.device)]
                        [static_cast<int>(lk.lane)] += dur;
        }
        running.push({now + dur, t.id});
    };

    double now = 0.0;
    while (remaining > 0) {
        // Start everything startable at the current instant; restart the scan
        // after each start since lanes become busy.
        bool progressed = true;
        while (progressed) {
            progressed = false;
            for (count_t d = 0; d < graph.n_devices; ++d) {
                const auto& prog =
                    graph.compute_program[static_cast<std::size_t>(d)];
                const std::size_t c = cursor[static_cast<std::size_t>(d)];
                if (c >= prog.size()) continue;
                const Task& t = graph.tasks[static_cast<std::size_t>(prog[c])];
                if (!ready[static_cast<std::size_t>(t.id)]) continue;
                if (lane_free[{d, Lane::Compute}] > now) continue;
                start_task(t, now);
                cursor[static_cast<std::size_t>(d)]++;
                progressed = true;
            }
            // Priority order; a started task only makes lanes busier, so one
            // pass starts exactly the tasks a restart-per-start loop would.
            for (auto it = net_ready.begin(); it != net_ready.end();) {
                const Task& t =
                    graph.tasks[static_cast<std::size_t>(it->second)];
                bool free = true;
                for (const LaneKey& lk : lanes_of(t))
                    if (lane_free[lk] > now) free = false;
                if (free) {
                    start_task(t, now);
                    it = net_ready.erase(it);
                    progressed = true;
                } else {
                    ++it;
                }
            }
        }

        if (running.empty()) {
            std::ostringstream os;
            os << "simulate: deadlock with " << remaining
               << " tasks pending (inconsistent program order and dependencies)";
            throw SimError(os.str());
        }

        // Retire every task finishing at the earliest end time.
        now = running.top().first;
        while (!running.empty() && running.top().first <= now) {
            const TaskId id = running.top().second;
            running.pop();
            if (done[static_cast<std::size_t>(id)]) continue;
            done[static_cast<std::size_t>(id)] = true;
            --remaining;
            for (const TaskId dep : dependents[static_cast<std::size_t>(id)])
                if (--pending_deps[static_cast<std::size_t>(dep)] == 0)
                    mark_ready(dep);
        }
        tl.makespan = std::max(tl.makespan, now);
    }

    return tl;
}

double bubble_fraction(const Timeline& timeline) {
    const double busy = timeline.compute_busy_max();
    if (busy <= 0.0) return 0.0;
    return (timeline.makespan - busy) / busy;
}

std::vector<count_t> peak_inflight(const Timeline& timeline,
                                   const TaskGraph& graph,
                                   const StagePlacement& placement) {
    // Per device: +1 at each forward end, -1 at the matching backward end;
    // deaths sort before births at equal times.
    std::vector<std::vector<std::pair<double, int>>> marks(
        static_cast<std::size_t>(timeline.n_devices));
    for (const Task& t : graph.tasks) {
        if (t.lane != Lane::Compute) continue;
        const auto& ev = timeline.events[static_cast<std::size_t>(t.id)];
        const int delta = t.kind == TaskKind::Fwd ? +1 : -1;
        marks[static_cast<std::size_t>(t.device)].push_back({ev.end, delta});
    }
    std::vector<count_t> peaks(static_cast<std::size_t>(timeline.n_devices), 0);
    for (std::size_t d = 0; d < marks.size(); ++d) {
        auto& m = marks[d];
        std::sort(m.begin(), m.end());
        count_t live = 0, peak = 0;
        for (const auto& [time, delta] : m) {
            live += delta;
            peak = std::max(peak, live);
        }
        peaks[d] = peak * placement.layers_per_stage;
    }
    return peaks;
}

Timeline accumulation_timeline(const ModelSpec& model, DpVariant dp_variant,
                               AccumulationOrder order, count_t n_mb,
                               const TimingModel& timing) {
    const TaskGraph graph =
        build_accumulation_tasks(model, dp_variant, order, n_mb);
    return simulate(graph, timing);
}

} // namespace pipesim
