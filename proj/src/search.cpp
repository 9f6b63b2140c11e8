#include "pipesim/search.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <tuple>

#include "pipesim/schedule.hpp"
#include "pipesim/simulate.hpp"

namespace pipesim {

Scoring scoring_from_string(std::string_view s) {
    if (s == "analytic") return Scoring::Analytic;
    if (s == "simulate") return Scoring::Simulate;
    throw SpecError("unknown scoring mode '" + std::string(s) +
                    "' (expected analytic or simulate)");
}

std::string to_string(Scoring s) {
    return s == Scoring::Analytic ? "analytic" : "simulate";
}

void SearchSpace::validate() const {
    if (schedules.empty() || n_pp_choices.empty() || n_tp_choices.empty() ||
        s_mb_choices.empty() || n_mb_choices.empty() || n_loop_choices.empty() ||
        dp_variants.empty() || batch_sizes.empty())
        throw SpecError("search space: all choice sets must be nonempty");
}

namespace {

bool sharding_policy_allows(Schedule schedule, DpVariant variant) {
    switch (variant) {
    case DpVariant::DP0:
        return true;
    case DpVariant::DP_PS:
        return schedule == Schedule::GPipe || schedule == Schedule::OneFOneB;
    case DpVariant::DP_FS:
        return schedule == Schedule::BreadthFirst ||
               schedule == Schedule::NoPipeline;
    }
    return false;
}

std::tuple<count_t, count_t, count_t, count_t, count_t, count_t, int, int>
config_key(const ParallelConfig& c) {
    return {c.n_pp,
            c.n_tp,
            c.s_mb,
            c.n_mb,
            c.n_loop,
            c.n_dp,
            static_cast<int>(c.dp_variant),
            static_cast<int>(c.schedule)};
}

} // namespace

std::vector<ParallelConfig> enumerate_configs(const SearchSpace& space,
                                              const ModelSpec& model,
                                              const ClusterSpec& cluster) {
    space.validate();
    model.validate();
    cluster.validate();
    const count_t n_gpu = cluster.n_gpu();

    std::vector<ParallelConfig> out;
    std::set<decltype(config_key(ParallelConfig{}))> seen;
    for (const Schedule schedule : space.schedules)
        for (const DpVariant variant : space.dp_variants) {
            if (!sharding_policy_allows(schedule, variant)) continue;
            for (const count_t n_pp : space.n_pp_choices)
                for (const count_t n_tp : space.n_tp_choices)
                    for (const count_t s_mb : space.s_mb_choices)
                        for (const count_t n_mb : space.n_mb_choices)
                            for (const count_t n_loop : space.n_loop_choices)
                                for (const count_t batch : space.batch_sizes) {
                                    ParallelConfig c;
                                    c.schedule = schedule;
                                    c.dp_variant = variant;
                                    c.n_pp = schedule == Schedule::NoPipeline
                                                 ? 1
                                                 : n_pp;
                                    c.n_loop = is_looped(schedule) ? n_loop : 1;
                                    c.n_tp = n_tp;
                                    c.s_mb = s_mb;
                                    c.n_mb = n_mb;
                                    if (c.n_tp * c.n_pp > n_gpu) continue;
                                    if (n_gpu % (c.n_tp * c.n_pp) != 0) continue;
                                    c.n_dp = n_gpu / (c.n_tp * c.n_pp);
                                    if (c.batch_size() != batch) continue;
                                    try {
                                        c.validate(model, cluster);
                                    } catch (const SpecError&) {
                                        continue;
                                    }
                                    if (seen.insert(config_key(c)).second)
                                        out.push_back(c);
                                }
        }
    std::sort(out.begin(), out.end(),
              [](const ParallelConfig& a, const ParallelConfig& b) {
                  return config_key(a) < config_key(b);
              });
    return out;
}

double analytic_score(const ModelSpec& model, const ParallelConfig& config,
                      const ClusterSpec& cluster, const NetworkOptions& opts) {
    const NetworkAssessment a = assess_network(model, config, cluster, opts);
    const double bubble =
        config.n_pp > 1 ? static_cast<double>(config.n_pp - 1) /
                              (static_cast<double>(config.n_mb) *
                               static_cast<double>(config.n_loop))
                        : 0.0;
    double overhead = 0.0;
    if (config.n_tp >= 2) overhead += a.tp_overhead_est;
    if (config.n_dp >= 2 && a.dp_verdict != Verdict::OverlappedOK)
        overhead += a.dp_overhead_est;
    if (config.n_pp >= 2 && a.pp_verdict != Verdict::OverlappedOK)
        overhead += a.pp_overhead_est;
    return cluster.peak_flops * cluster.kernel_efficiency /
           ((1.0 + bubble) * (1.0 + overhead));
}

double simulate_score(const ModelSpec& model, const ParallelConfig& config,
                      const ClusterSpec& cluster) {
    const StagePlacement placement = place_stages(model, config);
    const TaskGraph graph = build_tasks(model, config, placement);
    const TimingModel timing = TimingModel::derive(model, config, cluster);
    const Timeline timeline = simulate(graph, timing);
    return throughput(model, config, timeline, cluster).throughput;
}

std::vector<RankedConfig> rank_configs(const std::vector<ParallelConfig>& configs,
                                       const ModelSpec& model,
                                       const ClusterSpec& cluster,
                                       Scoring scoring,
                                       const SearchOptions& opts) {
    std::vector<RankedConfig> ranked;
    std::vector<const ParallelConfig*> feasible;
    for (const ParallelConfig& c : configs)
        if (pipesim::feasible(model, c, cluster, opts.memory))
            feasible.push_back(&c);

    std::vector<RankedConfig> scored(feasible.size());
    auto evaluate = [&](std::size_t i) {
        RankedConfig rc;
        rc.config = *feasible[i];
        rc.memory = total_memory(model, rc.config, opts.memory);
        rc.verdicts = assess_network(model, rc.config, cluster, opts.network);
        rc.score = scoring == Scoring::Analytic
                       ? analytic_score(model, rc.config, cluster, opts.network)
                       : simulate_score(model, rc.config, cluster);
        scored[i] = std::move(rc);
    };

    unsigned threads = opts.threads > 0
                           ? static_cast<unsigned>(opts.threads)
                           : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(
        threads, static_cast<unsigned>(std::max<std::size_t>(1, scored.size())));
    if (threads <= 1 || scored.size() <= 1) {
        for (std::size_t i = 0; i < scored.size(); ++i) evaluate(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < scored.size();
                     i = next.fetch_add(1))
                    evaluate(i);
            });
        for (std::thread& th : pool) th.join();
    }

    std::stable_sort(scored.begin(), scored.end(),
                     [](const RankedConfig& a, const RankedConfig& b) {
                         const auto key = [](const RankedConfig& r) {
                             return std::make_tuple(
                                 -r.score, r.memory.total_bytes, r.config.n_tp,
                                 r.config.n_pp, config_key(r.config));
                         };
                         return key(a) < key(b);
                     });
    return scored;
}

BestTable best_table(const SearchSpace& space, const ModelSpec& model,
                     const ClusterSpec& cluster, const SearchOptions& opts) {
    const std::vector<ParallelConfig> all =
        enumerate_configs(space, model, cluster);
    BestTable table;
    for (const Schedule schedule : space.schedules)
        for (const count_t batch : space.batch_sizes) {
            std::vector<ParallelConfig> cell;
            for (const ParallelConfig& c : all)
                if (c.schedule == schedule && c.batch_size() == batch)
                    cell.push_back(c);
            const std::vector<RankedConfig> ranked =
                rank_configs(cell, model, cluster, space.scoring, opts);
            if (ranked.empty()) {
                table.empty_cells.push_back({schedule, batch});
                continue;
            }
            table.rows.push_back({schedule, batch, ranked.front()});
        }
    return table;
}

} // namespace pipesim
