// Measured best-configuration datasets for the 52B and 6.6B studies on the
// 64-GPU V100 cluster (InfiniBand and Ethernet variants). Used as regression
// fixtures: every row ran on 32 GiB devices, so each must pass validity and
// the analytic feasibility check.
#pragma once

#include <vector>

#include "pipesim/types.hpp"

namespace pipesim::fixtures {

enum class Impl { Ours, Reference };

struct MeasuredRow {
    const char* model; // "52b" or "6.6b"
    int table;         // 3 = 52B, 4 = 6.6B, 5 = 6.6B Ethernet
    Schedule schedule;
    Impl impl;
    count_t batch;
    count_t n_pp;
    count_t n_tp;
    count_t s_mb;
    count_t n_mb;
    count_t n_loop;
    bool sharded;
    double tflops;
};

inline const std::vector<MeasuredRow>& measured_rows() {
    using S = Schedule;
    static const std::vector<MeasuredRow> rows = {
        // 52B, breadth-first
        {"52b", 3, S::BreadthFirst, Impl::Ours, 8, 8, 8, 1, 8, 4, false, 36.28},
        {"52b", 3, S::BreadthFirst, Impl::Ours, 9, 8, 8, 1, 9, 8, false, 42.33},
        {"52b", 3, S::BreadthFirst, Impl::Ours, 12, 8, 8, 1, 12, 4, false, 42.77},
        {"52b", 3, S::BreadthFirst, Impl::Ours, 16, 4, 8, 1, 8, 8, true, 44.49},
        {"52b", 3, S::BreadthFirst, Impl::Ours, 24, 4, 8, 2, 6, 8, true, 50.76},
        {"52b", 3, S::BreadthFirst, Impl::Ours, 32, 8, 4, 1, 16, 4, true, 51.17},
        {"52b", 3, S::BreadthFirst, Impl::Ours, 48, 8, 2, 1, 12, 8, true, 55.34},
        {"52b", 3, S::BreadthFirst, Impl::Ours, 64, 4, 2, 1, 8, 16, true, 54.01},
        {"52b", 3, S::BreadthFirst, Impl::Ours, 128, 4, 2, 2, 8, 8, true, 52.85},
        {"52b", 3, S::BreadthFirst, Impl::Ours, 256, 2, 2, 1, 16, 32, true, 48.97},
        // 52B, depth-first
        {"52b", 3, S::DepthFirst, Impl::Reference, 8, 8, 8, 1, 8, 2, false, 29.53},
        {"52b", 3, S::DepthFirst, Impl::Reference, 16, 8, 8, 2, 8, 4, false, 38.16},
        {"52b", 3, S::DepthFirst, Impl::Reference, 24, 8, 8, 1, 24, 2, false, 38.37},
        {"52b", 3, S::DepthFirst, Impl::Reference, 32, 8, 8, 4, 8, 4, false, 43.50},
        {"52b", 3, S::DepthFirst, Impl::Reference, 48, 8, 8, 2, 24, 2, false, 45.52},
        {"52b", 3, S::DepthFirst, Impl::Reference, 64, 8, 8, 4, 16, 4, false, 48.52},
        {"52b", 3, S::DepthFirst, Impl::Reference, 128, 8, 8, 4, 32, 4, false, 51.46},
        {"52b", 3, S::DepthFirst, Impl::Reference, 256, 16, 4, 4, 64, 2, false, 54.91},
        {"52b", 3, S::DepthFirst, Impl::Reference, 512, 8, 8, 4, 128, 2, false, 55.41},
        // 52B, non-looped
        {"52b", 3, S::GPipe, Impl::Ours, 8, 8, 8, 1, 8, 1, false, 26.04},
        {"52b", 3, S::GPipe, Impl::Ours, 9, 8, 8, 1, 9, 1, false, 27.59},
        {"52b", 3, S::GPipe, Impl::Ours, 12, 8, 8, 1, 12, 1, false, 30.74},
        {"52b", 3, S::GPipe, Impl::Ours, 16, 8, 8, 1, 16, 1, false, 33.54},
        {"52b", 3, S::GPipe, Impl::Ours, 24, 8, 8, 1, 24, 1, false, 37.46},
        {"52b", 3, S::GPipe, Impl::Ours, 32, 8, 8, 2, 16, 1, false, 39.62},
        {"52b", 3, S::GPipe, Impl::Ours, 48, 8, 4, 1, 24, 1, true, 44.30},
        {"52b", 3, S::GPipe, Impl::Ours, 64, 8, 4, 1, 32, 1, true, 46.74},
        {"52b", 3, S::OneFOneB, Impl::Reference, 128, 8, 8, 2, 64, 1, false, 49.35},
        {"52b", 3, S::OneFOneB, Impl::Reference, 256, 16, 4, 2, 128, 1, false, 53.72},
        {"52b", 3, S::OneFOneB, Impl::Reference, 512, 8, 8, 4, 128, 1, false, 55.52},
        // 52B, no pipeline
        {"52b", 3, S::NoPipeline, Impl::Ours, 8, 1, 8, 1, 1, 1, true, 4.73},
        {"52b", 3, S::NoPipeline, Impl::Ours, 16, 1, 8, 2, 1, 1, true, 9.43},
        {"52b", 3, S::NoPipeline, Impl::Ours, 24, 1, 8, 3, 1, 1, true, 14.07},
        {"52b", 3, S::NoPipeline, Impl::Ours, 32, 1, 8, 4, 1, 1, true, 18.79},
        {"52b", 3, S::NoPipeline, Impl::Ours, 48, 1, 8, 6, 1, 1, true, 27.66},
        {"52b", 3, S::NoPipeline, Impl::Ours, 64, 1, 8, 8, 1, 1, true, 35.97},
        {"52b", 3, S::NoPipeline, Impl::Ours, 128, 1, 2, 4, 1, 1, true, 53.01},
        {"52b", 3, S::NoPipeline, Impl::Ours, 256, 1, 2, 4, 2, 1, true, 51.57},
        {"52b", 3, S::NoPipeline, Impl::Ours, 512, 1, 2, 4, 4, 1, true, 62.40},
        // 6.6B, breadth-first
        {"6.6b", 4, S::BreadthFirst, Impl::Ours, 32, 4, 2, 1, 4, 4, false, 35.72},
        {"6.6b", 4, S::BreadthFirst, Impl::Ours, 48, 4, 2, 1, 6, 8, false, 43.66},
        {"6.6b", 4, S::BreadthFirst, Impl::Ours, 64, 2, 2, 1, 4, 4, true, 46.60},
        {"6.6b", 4, S::BreadthFirst, Impl::Ours, 96, 2, 1, 1, 3, 8, true, 54.07},
        {"6.6b", 4, S::BreadthFirst, Impl::Ours, 128, 2, 1, 1, 4, 8, true, 57.03},
        {"6.6b", 4, S::BreadthFirst, Impl::Ours, 192, 2, 1, 2, 3, 8, true, 59.55},
        {"6.6b", 4, S::BreadthFirst, Impl::Ours, 256, 2, 1, 2, 4, 8, true, 60.45},
        {"6.6b", 4, S::BreadthFirst, Impl::Ours, 384, 2, 1, 4, 3, 8, true, 59.02},
        {"6.6b", 4, S::BreadthFirst, Impl::Ours, 512, 2, 1, 4, 4, 16, true, 57.44},
        // 6.6B, depth-first
        {"6.6b", 4, S::DepthFirst, Impl::Reference, 32, 4, 2, 1, 4, 2, false, 27.27},
        {"6.6b", 4, S::DepthFirst, Impl::Reference, 64, 4, 2, 2, 4, 4, false, 35.24},
        {"6.6b", 4, S::DepthFirst, Impl::Reference, 96, 4, 2, 1, 12, 2, false, 38.00},
        {"6.6b", 4, S::DepthFirst, Impl::Reference, 128, 4, 2, 4, 4, 4, false, 42.33},
        {"6.6b", 4, S::DepthFirst, Impl::Reference, 192, 4, 2, 2, 12, 2, false, 45.55},
        {"6.6b", 4, S::DepthFirst, Impl::Reference, 256, 4, 2, 4, 8, 4, false, 47.89},
        {"6.6b", 4, S::DepthFirst, Impl::Reference, 384, 4, 2, 4, 12, 2, false, 50.14},
        {"6.6b", 4, S::DepthFirst, Impl::Reference, 512, 4, 2, 4, 16, 2, false, 51.92},
        // 6.6B, non-looped
        {"6.6b", 4, S::GPipe, Impl::Ours, 32, 4, 2, 1, 4, 1, false, 25.42},
        {"6.6b", 4, S::GPipe, Impl::Ours, 48, 4, 2, 1, 6, 1, false, 30.88},
        {"6.6b", 4, S::GPipe, Impl::Ours, 64, 4, 2, 1, 8, 1, false, 34.63},
        {"6.6b", 4, S::GPipe, Impl::Ours, 96, 4, 2, 1, 12, 1, false, 39.13},
        {"6.6b", 4, S::GPipe, Impl::Ours, 128, 4, 2, 1, 16, 1, false, 41.72},
        {"6.6b", 4, S::GPipe, Impl::Ours, 192, 4, 1, 1, 12, 1, true, 47.09},
        {"6.6b", 4, S::GPipe, Impl::Ours, 256, 4, 1, 1, 16, 1, true, 50.25},
        {"6.6b", 4, S::GPipe, Impl::Ours, 384, 4, 1, 1, 24, 1, true, 52.90},
        {"6.6b", 4, S::GPipe, Impl::Ours, 512, 4, 1, 2, 16, 1, true, 52.78},
        // 6.6B, no pipeline
        {"6.6b", 4, S::NoPipeline, Impl::Ours, 32, 1, 8, 4, 1, 1, false, 23.19},
        {"6.6b", 4, S::NoPipeline, Impl::Ours, 48, 1, 8, 6, 1, 1, false, 32.64},
        {"6.6b", 4, S::NoPipeline, Impl::Ours, 64, 1, 8, 8, 1, 1, false, 40.73},
        {"6.6b", 4, S::NoPipeline, Impl::Ours, 96, 1, 8, 12, 1, 1, false, 47.44},
        {"6.6b", 4, S::NoPipeline, Impl::Ours, 128, 1, 2, 4, 1, 1, true, 55.73},
        {"6.6b", 4, S::NoPipeline, Impl::Ours, 192, 1, 2, 6, 1, 1, true, 57.74},
        {"6.6b", 4, S::NoPipeline, Impl::Ours, 256, 1, 1, 4, 1, 1, true, 60.02},
        {"6.6b", 4, S::NoPipeline, Impl::Ours, 384, 1, 1, 6, 1, 1, true, 59.45},
        {"6.6b", 4, S::NoPipeline, Impl::Ours, 512, 1, 1, 8, 1, 1, true, 59.01},
        // 6.6B over Ethernet, breadth-first
        {"6.6b", 5, S::BreadthFirst, Impl::Ours, 64, 4, 4, 2, 8, 4, false, 31.31},
        {"6.6b", 5, S::BreadthFirst, Impl::Ours, 96, 4, 4, 4, 6, 4, false, 36.31},
        {"6.6b", 5, S::BreadthFirst, Impl::Ours, 128, 2, 4, 4, 4, 8, false, 40.00},
        {"6.6b", 5, S::BreadthFirst, Impl::Ours, 192, 2, 4, 8, 3, 8, false, 47.44},
        {"6.6b", 5, S::BreadthFirst, Impl::Ours, 256, 2, 4, 4, 8, 8, false, 46.85},
        {"6.6b", 5, S::BreadthFirst, Impl::Ours, 384, 2, 4, 16, 3, 4, false, 50.86},
        {"6.6b", 5, S::BreadthFirst, Impl::Ours, 512, 2, 4, 16, 4, 8, false, 50.80},
        // 6.6B over Ethernet, depth-first
        {"6.6b", 5, S::DepthFirst, Impl::Reference, 64, 8, 2, 2, 8, 2, false, 25.40},
        {"6.6b", 5, S::DepthFirst, Impl::Reference, 96, 8, 2, 1, 24, 2, false, 26.94},
        {"6.6b", 5, S::DepthFirst, Impl::Reference, 128, 8, 1, 1, 16, 2, false, 31.28},
        {"6.6b", 5, S::DepthFirst, Impl::Reference, 192, 8, 1, 1, 24, 2, false, 33.70},
        {"6.6b", 5, S::DepthFirst, Impl::Reference, 256, 8, 1, 2, 16, 2, false, 36.37},
        {"6.6b", 5, S::DepthFirst, Impl::Reference, 384, 8, 1, 2, 24, 2, false, 39.24},
        {"6.6b", 5, S::DepthFirst, Impl::Reference, 512, 8, 1, 2, 32, 2, false, 40.75},
        // 6.6B over Ethernet, non-looped
        {"6.6b", 5, S::GPipe, Impl::Ours, 64, 8, 2, 1, 16, 1, false, 29.70},
        {"6.6b", 5, S::GPipe, Impl::Ours, 96, 8, 2, 1, 24, 1, false, 33.91},
        {"6.6b", 5, S::GPipe, Impl::Ours, 128, 8, 2, 1, 32, 1, false, 36.05},
        {"6.6b", 5, S::GPipe, Impl::Ours, 192, 8, 1, 1, 24, 1, false, 40.42},
        {"6.6b", 5, S::GPipe, Impl::Ours, 256, 8, 1, 1, 32, 1, false, 43.66},
        {"6.6b", 5, S::GPipe, Impl::Ours, 384, 8, 1, 1, 48, 1, false, 47.58},
        {"6.6b", 5, S::GPipe, Impl::Ours, 512, 8, 1, 1, 64, 1, false, 48.48},
        // 6.6B over Ethernet, no pipeline
        {"6.6b", 5, S::NoPipeline, Impl::Ours, 64, 1, 8, 8, 1, 1, false, 15.37},
        {"6.6b", 5, S::NoPipeline, Impl::Ours, 96, 1, 8, 12, 1, 1, false, 21.43},
        {"6.6b", 5, S::NoPipeline, Impl::Ours, 128, 1, 8, 16, 1, 1, false, 27.65},
        {"6.6b", 5, S::NoPipeline, Impl::Ours, 192, 1, 8, 24, 1, 1, false, 37.35},
        {"6.6b", 5, S::NoPipeline, Impl::Ours, 256, 1, 8, 32, 1, 1, false, 45.99},
        {"6.6b", 5, S::NoPipeline, Impl::Ours, 384, 1, 8, 48, 1, 1, true, 46.81},
        {"6.6b", 5, S::NoPipeline, Impl::Ours, 512, 1, 8, 32, 2, 1, false, 46.40},
    };
    return rows;
}

// The sharded column maps onto a variant by method: the looped/no-pipeline
// runs shard fully, the non-looped ones shard the optimizer state only.
inline DpVariant variant_of(const MeasuredRow& row) {
    if (!row.sharded) return DpVariant::DP0;
    switch (row.schedule) {
    case Schedule::GPipe:
    case Schedule::OneFOneB:
        return DpVariant::DP_PS;
    default:
        return DpVariant::DP_FS;
    }
}

inline ParallelConfig config_of(const MeasuredRow& row, count_t n_gpu) {
    ParallelConfig c;
    c.schedule = row.schedule;
    c.dp_variant = variant_of(row);
    c.n_pp = row.n_pp;
    c.n_tp = row.n_tp;
    c.s_mb = row.s_mb;
    c.n_mb = row.n_mb;
    c.n_loop = row.n_loop;
    c.n_dp = n_gpu / (row.n_pp * row.n_tp);
    return c;
}

} // namespace pipesim::fixtures
