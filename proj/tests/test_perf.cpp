#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "pipesim/perf.hpp"
#include "pipesim/schedule.hpp"

using namespace pipesim;

namespace {

ParallelConfig cfg(Schedule s, DpVariant v, count_t pp, count_t tp, count_t mb,
                   count_t smb = 1, count_t loop = 1, count_t dp = 1) {
    ParallelConfig c;
    c.schedule = s;
    c.dp_variant = v;
    c.n_pp = pp;
    c.n_tp = tp;
    c.n_mb = mb;
    c.s_mb = smb;
    c.n_loop = loop;
    c.n_dp = dp;
    return c;
}

// Explicit covariance-matrix route: build Sigma0, then take its trace.
NoiseScaleEstimate brute_force_noise(const std::vector<std::vector<double>>& g) {
    const std::size_t n = g.size(), d = g.front().size();
    std::vector<double> mean(d, 0.0);
    for (const auto& row : g)
        for (std::size_t i = 0; i < d; ++i) mean[i] += row[i] / double(n);
    std::vector<std::vector<double>> sigma(d, std::vector<double>(d, 0.0));
    for (const auto& row : g)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                sigma[i][j] += (row[i] - mean[i]) * (row[j] - mean[j]) /
                               double(n - 1);
    NoiseScaleEstimate est;
    for (std::size_t i = 0; i < d; ++i) {
        est.trace_sigma0 += sigma[i][i];
        est.grad_norm_sq += mean[i] * mean[i];
    }
    est.b_noise = est.trace_sigma0 / est.grad_norm_sq;
    return est;
}

} // namespace

TEST_CASE("throughput and utilization") {
    ModelSpec m = model_preset("52b");
    ClusterSpec cl = cluster_preset("v100-dgx1");
    ParallelConfig c = cfg(Schedule::BreadthFirst, DpVariant::DP_FS, 8, 2, 12, 1, 8, 4);

    Timeline tl;
    tl.makespan = compute_per_gpu(m, c) / 55.34e12;
    tl.n_devices = 8;
    const PerfPoint p = throughput(m, c, tl, cl);
    CHECK(p.throughput == doctest::Approx(55.34e12).epsilon(1e-9));
    CHECK(p.utilization == doctest::Approx(0.443).epsilon(0.01));
    CHECK(p.beta == doctest::Approx(48.0 / 64.0));

    Timeline slower = tl;
    slower.makespan *= 2.0;
    CHECK(throughput(m, c, slower, cl).utilization ==
          doctest::Approx(p.utilization / 2.0));
}

TEST_CASE("utilization approaches the kernel efficiency without overheads") {
    // Large micro-batch count, no tensor parallelism, idealized fabric: the
    // only loss against the derivation efficiency is the shrinking bubble.
    ModelSpec m = ModelSpec::make(8, 512, 8, 256, 1000);
    ClusterSpec cl;
    cl.n_node = 1;
    cl.s_node = 2;
    cl.peak_flops = 1e12;
    cl.bw_intra = cl.bw_inter = 1e18;
    cl.mem_capacity = 1e12;
    cl.kernel_efficiency = 0.6;
    ParallelConfig c = cfg(Schedule::BreadthFirst, DpVariant::DP0, 2, 1, 64, 1, 4, 1);
    const TimingModel t = TimingModel::derive(m, c, cl);
    const StagePlacement pl = place_stages(m, c);
    const Timeline tl = simulate(build_tasks(m, c, pl), t);
    const PerfPoint p = throughput(m, c, tl, cl);
    CHECK(p.utilization ==
          doctest::Approx(cl.kernel_efficiency / (1.0 + 1.0 / (64.0 * 4.0)))
              .epsilon(1e-6));
    CHECK(p.utilization > 0.59);
}

TEST_CASE("sample overhead law") {
    CHECK(sample_overhead(1024, 6780) == doctest::Approx(1.1511).epsilon(1e-4));
    CHECK(sample_overhead(1024, 3430) == doctest::Approx(1.2986).epsilon(1e-4));
    CHECK(sample_overhead(3e6, 10e6) == doctest::Approx(1.30));
    CHECK(sample_overhead(0, 6780) == 1.0);
    CHECK_THROWS_AS(sample_overhead(1024, 0), SpecError);
}

TEST_CASE("gradient noise scale") {
    SUBCASE("identical gradients have no noise") {
        std::vector<std::vector<double>> g = {{1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
        CHECK(estimate_noise_scale(g).b_noise == 0.0);
    }
    SUBCASE("hand-computed two-sample case") {
        std::vector<std::vector<double>> g = {{1, 0}, {0, 1}};
        const NoiseScaleEstimate est = estimate_noise_scale(g);
        CHECK(est.grad_norm_sq == doctest::Approx(0.5));
        CHECK(est.trace_sigma0 == doctest::Approx(1.0));
        CHECK(est.b_noise == doctest::Approx(2.0));
    }
    SUBCASE("scaling all gradients leaves the estimate unchanged") {
        std::vector<std::vector<double>> g = {{1, 0.5}, {2, -0.25}, {0.5, 1}};
        const double base = estimate_noise_scale(g).b_noise;
        for (auto& row : g)
            for (double& x : row) x *= 8.0; // exact binary scale
        CHECK(estimate_noise_scale(g).b_noise == base);
    }
    SUBCASE("agrees with the covariance-matrix route") {
        std::mt19937 rng(123);
        std::normal_distribution<double> noise(0.0, 1.0);
        std::uniform_int_distribution<std::size_t> dims(1, 8), counts(2, 32);
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t d = dims(rng), n = counts(rng);
            std::vector<double> truth(d);
            for (double& x : truth) x = noise(rng) + 2.0;
            std::vector<std::vector<double>> g(n, std::vector<double>(d));
            for (auto& row : g)
                for (std::size_t i = 0; i < d; ++i)
                    row[i] = truth[i] + noise(rng);
            const NoiseScaleEstimate fast = estimate_noise_scale(g);
            const NoiseScaleEstimate slow = brute_force_noise(g);
            CHECK(fast.b_noise ==
                  doctest::Approx(slow.b_noise).epsilon(1e-10));
            CHECK(fast.trace_sigma0 ==
                  doctest::Approx(slow.trace_sigma0).epsilon(1e-10));
        }
    }
    SUBCASE("rejects a zero mean gradient") {
        std::vector<std::vector<double>> g = {{1, 0}, {-1, 0}};
        CHECK_THROWS_AS(estimate_noise_scale(g), SpecError);
    }
    SUBCASE("rejects mismatched dimensions and tiny sample sets") {
        CHECK_THROWS_AS(estimate_noise_scale({{1, 2}, {1}}), SpecError);
        CHECK_THROWS_AS(estimate_noise_scale({{1, 2}}), SpecError);
    }
}

TEST_CASE("method profiles") {
    ModelSpec m = ModelSpec::make(32, 64, 4, 128, 1000, -1, 16);
    SUBCASE("fully sharded breadth-first row") {
        auto c = cfg(Schedule::BreadthFirst, DpVariant::DP_FS, 4, 1, 8, 1, 4, 2);
        const MethodProfile p = method_profile(m, c);
        CHECK(p.bubble == doctest::Approx(0.25));
        CHECK(p.state_memory_factor == 2.0);
        CHECK(p.dp_network_volume == doctest::Approx(3.0 / 4.0));
        CHECK(p.dp_overlap_fraction == doctest::Approx(1.0 - 4.0 / 32.0));
        CHECK(p.pp_network_volume == 4.0);
    }
    SUBCASE("fully sharded without a pipeline") {
        auto c = cfg(Schedule::NoPipeline, DpVariant::DP_FS, 1, 1, 6, 1, 1, 2);
        CHECK(method_profile(m, c).dp_network_volume == doctest::Approx(18.0));
    }
    SUBCASE("fully sharded alternating schedule overlaps per stage") {
        auto c = cfg(Schedule::OneFOneB, DpVariant::DP_FS, 4, 1, 8, 1, 1, 2);
        const MethodProfile p = method_profile(m, c);
        CHECK(p.dp_overlap_fraction == doctest::Approx(1.0 - 4.0 / 32.0));
        CHECK(p.dp_network_volume == doctest::Approx(24.0)); // 3 * n_mb
    }
    SUBCASE("looped and non-looped bubbles stay consistent") {
        for (count_t loop : {2, 4, 8}) {
            auto bf = cfg(Schedule::BreadthFirst, DpVariant::DP0, 4, 1, 8, 1, loop);
            auto gp = cfg(Schedule::GPipe, DpVariant::DP0, 4, 1, 8);
            CHECK(method_profile(m, bf).bubble * static_cast<double>(loop) ==
                  doctest::Approx(method_profile(m, gp).bubble));
        }
    }
    SUBCASE("the pipeline-replicating alternative") {
        auto c = cfg(Schedule::OneFOneB, DpVariant::DP0, 4, 1, 8);
        const MethodProfile p = chimera_profile(m, c, 2);
        CHECK(p.bubble == doctest::Approx(0.5));
        CHECK(p.state_memory_factor == doctest::Approx(2.0 * 32.0 / 4.0));
        CHECK(p.dp_network_volume == doctest::Approx(1.0));
        CHECK(p.chimera_pipelines == 2);
        CHECK_THROWS_AS(chimera_profile(m, c, 3), SpecError);
    }
}

TEST_CASE("cost and time extrapolation") {
    ModelSpec m52 = model_preset("52b");
    ModelSpec m66 = model_preset("6.6b");
    PerfPoint pt;
    pt.beta = 0.25;
    pt.throughput = 50e12;
    pt.config.schedule = Schedule::BreadthFirst;

    SUBCASE("base training lengths") {
        const TradeoffCurve c52 = tradeoff_curve({pt}, m52, {64}, 6780.0);
        CHECK(c52.base_tokens == doctest::Approx(347.1e9).epsilon(1e-3));
        const TradeoffCurve c66 = tradeoff_curve({pt}, m66, {64}, 3430.0);
        CHECK(c66.base_tokens == doctest::Approx(176e9).epsilon(3e-3));
    }
    SUBCASE("small-batch scaling halves time at near-constant cost") {
        const TradeoffCurve c =
            tradeoff_curve({pt}, m52, {64, 128}, 6780.0);
        REQUIRE(c.points.size() == 2);
        CHECK(c.points[1].time_seconds <
              0.51 * c.points[0].time_seconds); // B << b_crit here
        CHECK(c.points[1].cost_gpu_seconds ==
              doctest::Approx(c.points[0].cost_gpu_seconds).epsilon(0.01));
    }
    SUBCASE("frontier is monotone in the cluster size") {
        std::vector<PerfPoint> points;
        for (double beta : {0.125, 0.25, 1.0, 4.0}) {
            PerfPoint p;
            p.beta = beta;
            p.throughput = 30e12 + 8e12 * beta; // bigger batches run faster
            points.push_back(p);
        }
        std::vector<count_t> sizes;
        for (count_t n = 64; n <= 1 << 20; n *= 2) sizes.push_back(n);
        const TradeoffCurve c = tradeoff_curve(points, m52, sizes, 6780.0);
        for (std::size_t i = 1; i < c.points.size(); ++i) {
            CHECK(c.points[i].time_seconds <= c.points[i - 1].time_seconds * (1 + 1e-12));
            CHECK(c.points[i].cost_gpu_seconds >=
                  c.points[i - 1].cost_gpu_seconds * (1 - 1e-12));
        }
    }
    SUBCASE("a single point sweeps out a convex cost-versus-time trace") {
        std::vector<count_t> sizes;
        for (count_t n = 64; n <= (1 << 16); n *= 2) sizes.push_back(n);
        const TradeoffCurve c = tradeoff_curve({pt}, m52, sizes, 6780.0);
        // Points ordered by increasing time (decreasing cluster size);
        // chord slopes must be non-decreasing for a convex trace.
        std::vector<TradeoffPoint> pts(c.points.rbegin(), c.points.rend());
        double prev_slope = -1e300;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            const double slope =
                (pts[i].cost_gpu_seconds - pts[i - 1].cost_gpu_seconds) /
                (pts[i].time_seconds - pts[i - 1].time_seconds);
            CHECK(slope >= prev_slope);
            prev_slope = slope;
        }
    }
    SUBCASE("a cost-minimizing frontier never costs more") {
        std::vector<PerfPoint> points;
        for (double beta : {0.25, 2.0}) {
            PerfPoint p;
            p.beta = beta;
            p.throughput = 30e12 + 10e12 * beta;
            points.push_back(p);
        }
        const std::vector<count_t> sizes = {256, 4096, 65536};
        const TradeoffCurve t = tradeoff_curve(points, m52, sizes, 6780.0);
        const TradeoffCurve k = tradeoff_curve(points, m52, sizes, 6780.0, -1.0,
                                               FrontierObjective::MinCost);
        for (std::size_t i = 0; i < sizes.size(); ++i)
            CHECK(k.points[i].cost_gpu_seconds <=
                  t.points[i].cost_gpu_seconds * (1 + 1e-12));
    }
    SUBCASE("input validation") {
        CHECK_THROWS_AS(tradeoff_curve({}, m52, {64}, 6780.0), SpecError);
        CHECK_THROWS_AS(tradeoff_curve({pt}, m52, {64}, 0.0), SpecError);
    }
}
