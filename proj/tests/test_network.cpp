#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pipesim/network.hpp"

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

ClusterSpec flat_cluster(double hw_inter, count_t n_node, count_t s_node,
                         double s_seq_scale = 1.0) {
    // A synthetic device whose inter-node hardware intensity is exactly
    // hw_inter (bandwidth 1 byte/s keeps the arithmetic transparent).
    ClusterSpec c;
    c.n_node = n_node;
    c.s_node = s_node;
    c.peak_flops = hw_inter * s_seq_scale;
    c.bw_intra = s_seq_scale;
    c.bw_inter = s_seq_scale;
    c.mem_capacity = 1e15;
    return c;
}

} // namespace

TEST_CASE("data-parallel intensity by variant and schedule") {
    ModelSpec m = ModelSpec::make(8, 64, 4, 2048, 1000, -1, 16);
    CHECK(dp_intensity(cfg(Schedule::NoPipeline, DpVariant::DP0, 1, 1, 1), m) ==
          2048.0);
    CHECK(dp_intensity(cfg(Schedule::NoPipeline, DpVariant::DP_FS, 1, 1, 1, 8), m) ==
          doctest::Approx(10922.0 + 2.0 / 3.0).epsilon(1e-9));
    SUBCASE("optimizer sharding keeps the unsharded intensity") {
        auto c0 = cfg(Schedule::GPipe, DpVariant::DP0, 4, 1, 8, 2);
        auto cps = cfg(Schedule::GPipe, DpVariant::DP_PS, 4, 1, 8, 2);
        CHECK(dp_intensity(c0, m) == dp_intensity(cps, m));
    }
    SUBCASE("breadth-first recovers the micro-batch count under full sharding") {
        auto bf = cfg(Schedule::BreadthFirst, DpVariant::DP_FS, 4, 1, 8, 1, 2);
        auto nl = cfg(Schedule::OneFOneB, DpVariant::DP_FS, 4, 1, 8, 1, 1);
        CHECK(dp_intensity(bf, m) == doctest::Approx(8.0 * dp_intensity(nl, m)));
        auto df = cfg(Schedule::DepthFirst, DpVariant::DP_FS, 4, 1, 8, 1, 2);
        CHECK(dp_intensity(df, m) == doctest::Approx(4.0 * dp_intensity(nl, m)));
    }
    SUBCASE("ordering across schedules at fixed batch") {
        for (count_t pp : {2, 4})
            for (count_t mb = pp; mb <= 3 * pp; pp == 2 ? mb += 2 : mb += 4) {
                auto bf = cfg(Schedule::BreadthFirst, DpVariant::DP_FS, pp, 1, mb,
                              1, 2);
                auto df =
                    cfg(Schedule::DepthFirst, DpVariant::DP_FS, pp, 1, mb, 1, 2);
                auto nl = cfg(Schedule::GPipe, DpVariant::DP_FS, pp, 1, mb);
                CHECK(dp_intensity(bf, m) >= dp_intensity(df, m));
                CHECK(dp_intensity(df, m) >= dp_intensity(nl, m));
            }
    }
}

TEST_CASE("pipeline-parallel intensity") {
    ModelSpec gpt3 = model_preset("gpt3");
    ModelSpec t1 = model_preset("1t");
    CHECK(pp_intensity(gpt3, cfg(Schedule::GPipe, DpVariant::DP0, 4, 8, 4)) ==
          7077888.0);
    CHECK(pp_intensity(gpt3, cfg(Schedule::BreadthFirst, DpVariant::DP0, 4, 8,
                                 4, 1, 24)) == 294912.0);
    CHECK(pp_intensity(t1, cfg(Schedule::BreadthFirst, DpVariant::DP0, 4, 8, 4,
                               1, 32)) == 614400.0);
    CHECK(pp_intensity(t1, cfg(Schedule::GPipe, DpVariant::DP0, 4, 8, 4)) ==
          19660800.0);
    CHECK_THROWS_AS(
        pp_intensity(gpt3, cfg(Schedule::NoPipeline, DpVariant::DP0, 1, 8, 1)),
        SpecError);
    SUBCASE("strictly decreasing in the loop count") {
        double prev = 1e300;
        for (count_t loop : {1, 2, 4, 8}) {
            const double i = pp_intensity(
                gpt3, cfg(loop == 1 ? Schedule::GPipe : Schedule::BreadthFirst,
                          DpVariant::DP0, 4, 8, 4, 1, loop));
            CHECK(i < prev);
            prev = i;
        }
    }
}

TEST_CASE("tensor-parallel intensity") {
    ModelSpec gpt3 = model_preset("gpt3");
    ModelSpec t1 = model_preset("1t");
    const TpIntensity g = tp_intensity(gpt3, cfg(Schedule::GPipe, DpVariant::DP0, 4, 8, 4));
    CHECK(g.total == 3072.0);
    CHECK(g.blocking / g.total == doctest::Approx(1.5));
    CHECK(tp_intensity(t1, cfg(Schedule::GPipe, DpVariant::DP0, 4, 8, 4)).total ==
          6400.0);
    CHECK_THROWS_AS(
        tp_intensity(gpt3, cfg(Schedule::GPipe, DpVariant::DP0, 4, 1, 4)),
        SpecError);
    SUBCASE("strictly decreasing in the group size") {
        double prev = 1e300;
        for (count_t tp : {2, 4, 8}) {
            const double i =
                tp_intensity(gpt3, cfg(Schedule::GPipe, DpVariant::DP0, 4, tp, 4))
                    .total;
            CHECK(i < prev);
            prev = i;
        }
    }
}

TEST_CASE("overhead estimates") {
    CHECK(overhead_estimate(4608.0, 520.0) == doctest::Approx(0.113).epsilon(0.01));
    CHECK(overhead_estimate(9600.0, 520.0) == doctest::Approx(0.054).epsilon(0.01));
    CHECK(overhead_estimate(520.0, 520.0) == 1.0);
    CHECK_THROWS_AS(overhead_estimate(0.0, 520.0), SpecError);
}

TEST_CASE("hiding threshold for gradient reduction") {
    ModelSpec m = ModelSpec::make(8, 64, 4, 2048, 1000, -1, 16);
    ClusterSpec a100 = cluster_preset("a100");
    a100.n_node = 4;
    SUBCASE("canonical non-pipelined case") {
        auto c = cfg(Schedule::NoPipeline, DpVariant::DP0, 1, 1, 1, 1, 1, 32);
        CHECK(beta_net(m, c, a100) == 4.0);
    }
    SUBCASE("a long enough sequence hides a single sample") {
        ModelSpec longseq = ModelSpec::make(8, 64, 4, 8192, 1000, -1, 16);
        auto c = cfg(Schedule::NoPipeline, DpVariant::DP0, 1, 1, 1, 1, 1, 32);
        CHECK(beta_net(longseq, c, a100) == 1.0);
    }
    SUBCASE("halving the inter-node bandwidth never lowers the threshold") {
        auto c = cfg(Schedule::NoPipeline, DpVariant::DP0, 1, 1, 1, 1, 1, 32);
        ClusterSpec slower = a100;
        slower.bw_inter /= 2;
        CHECK(beta_net(m, c, slower) >= beta_net(m, c, a100));
    }
    SUBCASE("the threshold lands on the achievable grid") {
        auto c = cfg(Schedule::BreadthFirst, DpVariant::DP0, 4, 2, 4, 1, 2, 4);
        const double b = beta_net(m, c, a100);
        const double step = 4.0 / (4.0 * 2.0);
        CHECK(std::abs(b / step - std::round(b / step)) < 1e-9);
    }
}

TEST_CASE("efficiency verdicts") {
    ModelSpec m = ModelSpec::make(8, 64, 4, 2048, 1000, -1, 16);
    SUBCASE("breadth-first at the exact overlap boundary") {
        // Hardware intensity 4 * s_seq; a 4-micro-batch breadth-first run
        // overlaps the whole batch and sits exactly on the boundary.
        ClusterSpec cl = flat_cluster(4.0 * 2048.0, 8, 2);
        auto c = cfg(Schedule::BreadthFirst, DpVariant::DP0, 4, 1, 4, 1, 2, 4);
        const NetworkAssessment a = assess_network(m, c, cl);
        CHECK(a.dp_verdict == Verdict::OverlappedOK);
    }
    SUBCASE("non-looped run that can neither overlap nor amortize") {
        ClusterSpec cl = flat_cluster(4.0 * 2048.0, 8, 2);
        auto c = cfg(Schedule::GPipe, DpVariant::DP0, 2, 1, 8, 1, 1, 4);
        // One overlapped micro-batch is too small, and the total is only
        // twice the hardware intensity.
        const NetworkAssessment a = assess_network(m, c, cl);
        CHECK(a.dp_verdict == Verdict::Bottleneck);
        CHECK(a.dp_overhead_est == doctest::Approx(0.5));
    }
    SUBCASE("large micro-batches overlap on stock hardware") {
        ClusterSpec a100 = cluster_preset("a100");
        a100.n_node = 4;
        auto c = cfg(Schedule::NoPipeline, DpVariant::DP0, 1, 1, 1, 8, 1, 32);
        const NetworkAssessment a = assess_network(m, c, a100);
        CHECK(a.dp_verdict == Verdict::OverlappedOK);
    }
    SUBCASE("raising beta never downgrades a verdict") {
        ClusterSpec cl = flat_cluster(6.0 * 2048.0, 16, 2);
        auto rank = [](Verdict v) {
            return v == Verdict::OverlappedOK ? 2 : v == Verdict::AmortizedOK ? 1 : 0;
        };
        for (Schedule s : {Schedule::GPipe, Schedule::BreadthFirst,
                           Schedule::DepthFirst}) {
            int prev = -1;
            for (count_t mb = 4; mb <= 64; mb *= 2) {
                auto c = cfg(s, DpVariant::DP0, 4, 1, mb, 1,
                             s == Schedule::GPipe ? 1 : 2, 8);
                const NetworkAssessment a = assess_network(m, c, cl);
                CHECK(rank(a.dp_verdict) >= prev);
                prev = rank(a.dp_verdict);
            }
        }
    }
    SUBCASE("tensor-parallel blocking share drives its overhead") {
        ModelSpec gpt3 = model_preset("gpt3");
        ClusterSpec a100 = cluster_preset("a100");
        auto c = cfg(Schedule::GPipe, DpVariant::DP0, 4, 8, 4);
        const NetworkAssessment a = assess_network(gpt3, c, a100);
        CHECK(a.tp_overhead_est == doctest::Approx(0.113).epsilon(0.01));
        ModelSpec t1 = model_preset("1t");
        const NetworkAssessment b = assess_network(t1, c, a100);
        CHECK(b.tp_overhead_est == doctest::Approx(0.054).epsilon(0.01));
    }
}
