#pragma once

#include <array>

#include "pipesim/schedule.hpp"

namespace pipesim {

struct TimelineEvent {
    TaskId task = -1;
    double start = 0.0;
    double end = 0.0;
};

struct Timeline {
    count_t n_devices = 1;
    std::vector<TimelineEvent> events; // indexed by task id
    double makespan = 0.0;
    std::vector<std::array<double, 3>> lane_busy; // [device][lane]

    double compute_busy_max() const;
};

// Deterministic list scheduling over the three lanes of every device.
// Compute lanes run their program strictly in order; network lanes run the
// lowest-priority ready task. Transfers hold the PP lane of both endpoints.
// Throws SimError if the program wedges with tasks still pending.
Timeline simulate(const TaskGraph& graph, const TimingModel& timing);

// (makespan - busiest compute lane) / busiest compute lane.
double bubble_fraction(const Timeline& timeline);

// Peak live activation-checkpoint count per device, in layers. A unit is
// born when its forward ends and dies when its backward ends.
std::vector<count_t> peak_inflight(const Timeline& timeline,
                                   const TaskGraph& graph,
                                   const StagePlacement& placement);

// Convenience wrapper over build_accumulation_tasks + simulate.
Timeline accumulation_timeline(const ModelSpec& model, DpVariant dp_variant,
                               AccumulationOrder order, count_t n_mb,
                               const TimingModel& timing);

} // namespace pipesim
