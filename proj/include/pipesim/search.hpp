#pragma once

#include <optional>
#include <set>

#include "pipesim/memory.hpp"
#include "pipesim/network.hpp"
#include "pipesim/perf.hpp"
#include "pipesim/types.hpp"

namespace pipesim {

enum class Scoring { Analytic, Simulate };

Scoring scoring_from_string(std::string_view s);
std::string to_string(Scoring s);

struct SearchSpace {
    std::set<Schedule> schedules;
    std::set<count_t> n_pp_choices;
    std::set<count_t> n_tp_choices;
    std::set<count_t> s_mb_choices;
    std::set<count_t> n_mb_choices;
    std::set<count_t> n_loop_choices;
    std::set<DpVariant> dp_variants;
    std::set<count_t> batch_sizes;
    Scoring scoring = Scoring::Analytic;

    void validate() const;
};

struct RankedConfig {
    ParallelConfig config;
    double score = 0.0; // flop/s per GPU
    MemoryBreakdown memory;
    NetworkAssessment verdicts;
};

struct SearchOptions {
    MemoryOptions memory;
    NetworkOptions network;
    int threads = 1; // 0 selects the hardware concurrency
};

// Cartesian product filtered by grid consistency, schedule constraints and
// the sharding policy: DP_FS only combines with breadth-first or
// non-pipelined runs, DP_PS only with the non-looped schedules.
std::vector<ParallelConfig> enumerate_configs(const SearchSpace& space,
                                              const ModelSpec& model,
                                              const ClusterSpec& cluster);

double analytic_score(const ModelSpec& model, const ParallelConfig& config,
                      const ClusterSpec& cluster,
                      const NetworkOptions& opts = {});

double simulate_score(const ModelSpec& model, const ParallelConfig& config,
                      const ClusterSpec& cluster);

// Scores and sorts the feasible configurations, best first. Ties break
// toward lower memory, then less model parallelism.
std::vector<RankedConfig> rank_configs(const std::vector<ParallelConfig>& configs,
                                       const ModelSpec& model,
                                       const ClusterSpec& cluster,
                                       Scoring scoring,
                                       const SearchOptions& opts = {});

struct BestTableRow {
    Schedule schedule;
    count_t batch = 0;
    RankedConfig best;
};

struct BestTable {
    std::vector<BestTableRow> rows;
    // (schedule, batch) cells whose feasible set was empty.
    std::vector<std::pair<Schedule, count_t>> empty_cells;
};

BestTable best_table(const SearchSpace& space, const ModelSpec& model,
                     const ClusterSpec& cluster, const SearchOptions& opts = {});

} // namespace pipesim
