#include "pipesim/perf.hpp"

#include <algorithm>
#include <cmath>

namespace pipesim {

PerfPoint throughput(const ModelSpec& model, const ParallelConfig& config,
                     const Timeline& timeline, const ClusterSpec& cluster) {
    config.validate(model, cluster);
    if (timeline.makespan <= 0)
        throw SpecError("throughput: timeline has no extent");
    PerfPoint p;
    p.config = config;
    p.beta = static_cast<double>(config.batch_size()) /
             static_cast<double>(cluster.n_gpu());
    p.throughput = compute_per_gpu(model, config) / timeline.makespan;
    p.utilization = p.throughput / cluster.peak_flops;
    return p;
}

double sample_overhead(double batch, double b_crit) {
    if (b_crit <= 0) throw SpecError("sample_overhead: b_crit must be positive");
    if (batch < 0) throw SpecError("sample_overhead: batch must be non-negative");
    return 1.0 + batch / b_crit;
}

NoiseScaleEstimate estimate_noise_scale(
    const std::vector<std::vector<double>>& per_sample_gradients) {
    const std::size_t n = per_sample_gradients.size();
    if (n < 2)
        throw SpecError("noise scale: need at least two gradient samples");
    const std::size_t dim = per_sample_gradients.front().size();
    if (dim == 0) throw SpecError("noise scale: empty gradient vectors");
    for (const auto& g : per_sample_gradients)
        if (g.size() != dim)
            throw SpecError("noise scale: gradient dimensions differ");

    std::vector<double> mean(dim, 0.0);
    for (const auto& g : per_sample_gradients)
        for (std::size_t i = 0; i < dim; ++i) mean[i] += g[i];
    for (double& m : mean) m /= static_cast<double>(n);

    double trace = 0.0;
    double sample_sq = 0.0;
    for (const auto& g : per_sample_gradients) {
        for (std::size_t i = 0; i < dim; ++i) {
            const double d = g[i] - mean[i];
            trace += d * d;
            sample_sq += g[i] * g[i];
        }
    }
    trace /= static_cast<double>(n - 1);
    sample_sq /= static_cast<double>(n);

    NoiseScaleEstimate est;
    est.trace_sigma0 = trace;
    for (const double m : mean) est.grad_norm_sq += m * m;
    if (est.grad_norm_sq <= 1e-12 * sample_sq)
        throw SpecError("noise scale: mean gradient is zero to tolerance");
    est.b_noise = est.trace_sigma0 / est.grad_norm_sq;
    return est;
}

MethodProfile method_profile(const ModelSpec& model, const ParallelConfig& config) {
    config.validate(model);
    const double layers = static_cast<double>(model.n_layers);
    const double p = static_cast<double>(config.n_pp);
    const double loop = static_cast<double>(config.n_loop);
    const double mb = static_cast<double>(config.n_mb);
    const double smb = static_cast<double>(config.s_mb);
    const bool fs = config.dp_variant == DpVariant::DP_FS;

    MethodProfile mp;
    switch (config.schedule) {
    case Schedule::NoPipeline:
        mp.bubble = 0.0;
        mp.state_memory_factor = fs ? 2.0 : layers;
        mp.activation_memory_factor = smb;
        mp.dp_network_volume = fs ? 3.0 * mb : 2.0;
        mp.dp_overlap_fraction = (1.0 - 1.0 / layers) / mb;
        mp.pp_network_volume = 0.0;
        break;
    case Schedule::GPipe:
        mp.bubble = 1.0;
        mp.state_memory_factor = fs ? 2.0 : layers / p;
        mp.activation_memory_factor = smb * mb / p;
        mp.dp_network_volume = fs ? 3.0 * mb : 2.0 / p;
        mp.dp_overlap_fraction =
            fs ? 1.0 - p / layers : (1.0 - p / layers) / mb;
        mp.pp_network_volume = 1.0;
        break;
    case Schedule::OneFOneB:
        mp.bubble = 1.0;
        mp.state_memory_factor = fs ? 2.0 : layers / p;
        mp.activation_memory_factor = 2.0 * smb;
        mp.dp_network_volume = fs ? 3.0 * mb : 2.0 / p;
        mp.dp_overlap_fraction =
            fs ? 1.0 - p / layers : (1.0 - p / layers) / mb;
        mp.pp_network_volume = 1.0;
        break;
    case Schedule::DepthFirst:
        mp.bubble = 1.0 / loop;
        mp.state_memory_factor = layers / p;
        mp.activation_memory_factor = smb + smb / loop;
        mp.dp_network_volume = 2.0 / p;
        mp.dp_overlap_fraction = (1.0 - p / layers) * p / mb;
        mp.pp_network_volume = loop;
        break;
    case Schedule::BreadthFirst:
        mp.bubble = 1.0 / loop;
        mp.state_memory_factor = fs ? 2.0 : layers / p;
        mp.activation_memory_factor = smb * mb / p;
        mp.dp_network_volume = fs ? 3.0 / p : 2.0 / p;
        mp.dp_overlap_fraction = 1.0 - p / layers;
        mp.pp_network_volume = loop;
        break;
    }
    return mp;
}

MethodProfile chimera_profile(const ModelSpec& model, const ParallelConfig& config,
                              count_t n_ch) {
    config.validate(model);
    if (n_ch < 2 || n_ch % 2 != 0)
        throw SpecError("chimera profile: n_ch must be an even count >= 2");
    const double layers = static_cast<double>(model.n_layers);
    const double p = static_cast<double>(config.n_pp);
    const double ch = static_cast<double>(n_ch);

    MethodProfile mp;
    mp.bubble = 1.0 / ch;
    mp.state_memory_factor = ch * layers / p;
    mp.activation_memory_factor = 2.0 * static_cast<double>(config.s_mb);
    mp.dp_network_volume = 2.0 * ch / p;
    mp.dp_overlap_fraction = 1.0 - 1.0 / ch;
    mp.pp_network_volume = 1.0;
    mp.chimera_pipelines = n_ch;
    return mp;
}

TradeoffCurve tradeoff_curve(const std::vector<PerfPoint>& perf_points,
                             const ModelSpec& model,
                             const std::vector<count_t>& cluster_sizes,
                             double b_crit, double base_samples,
                             FrontierObjective objective) {
    if (perf_points.empty())
        throw SpecError("tradeoff: need at least one performance point");
    if (b_crit <= 0) throw SpecError("tradeoff: b_crit must be positive");

    TradeoffCurve curve;
    curve.base_samples = base_samples > 0 ? base_samples : 50000.0 * b_crit;
    curve.base_tokens = curve.base_samples * static_cast<double>(model.s_seq);
    const double flop_per_sample = compute_per_sample(model);

    for (const count_t n_gpu : cluster_sizes) {
        if (n_gpu < 1) throw SpecError("tradeoff: cluster sizes must be >= 1");
        bool have = false;
        TradeoffPoint best;
        for (const PerfPoint& p : perf_points) {
            if (p.throughput <= 0 || p.beta <= 0)
                throw SpecError("tradeoff: performance points must be positive");
            const double batch = p.beta * static_cast<double>(n_gpu);
            const double samples =
                curve.base_samples * sample_overhead(batch, b_crit);
            const double time = samples * flop_per_sample /
                                (static_cast<double>(n_gpu) * p.throughput);
            TradeoffPoint cand;
            cand.n_gpu = n_gpu;
            cand.batch = batch;
            cand.time_seconds = time;
            cand.cost_gpu_seconds = time * static_cast<double>(n_gpu);
            cand.beta = p.beta;
            cand.schedule = p.config.schedule;
            const double key = objective == FrontierObjective::MinTime
                                   ? cand.time_seconds
                                   : cand.cost_gpu_seconds;
            const double best_key = objective == FrontierObjective::MinTime
                                        ? best.time_seconds
                                        : best.cost_gpu_seconds;
            if (!have || key < best_key) {
                best = cand;
                have = true;
            }
        }
        curve.points.push_back(best);
    }
    return curve;
}

} // namespace pipesim
