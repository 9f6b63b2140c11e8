#include "pipesim/network.hpp"

#include <algorithm>
#include <cmath>

namespace pipesim {

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::OverlappedOK: return "overlapped";
    case Verdict::AmortizedOK: return "amortized";
    case Verdict::Bottleneck: return "bottleneck";
    }
    return "?";
}

double dp_intensity(const ParallelConfig& config, const ModelSpec& model) {
    config.validate();
    const double seq = static_cast<double>(model.s_seq);
    const double smb = static_cast<double>(config.s_mb);
    const double nmb = static_cast<double>(config.n_mb);
    if (config.dp_variant != DpVariant::DP_FS) return nmb * smb * seq;
    switch (config.schedule) {
    case Schedule::DepthFirst:
        return (2.0 / 3.0) * static_cast<double>(config.n_pp) * smb * seq;
    case Schedule::BreadthFirst:
        return (2.0 / 3.0) * nmb * smb * seq;
    default:
        return (2.0 / 3.0) * smb * seq;
    }
}

double pp_intensity(const ModelSpec& model, const ParallelConfig& config) {
    config.validate(model);
    if (config.n_pp < 2)
        throw SpecError("pp_intensity: no pipeline traffic with n_pp = 1");
    return 24.0 * static_cast<double>(model.s_hidden) *
           static_cast<double>(model.n_layers) /
           (static_cast<double>(config.n_pp) * static_cast<double>(config.n_loop));
}

TpIntensity tp_intensity(const ModelSpec& model, const ParallelConfig& config) {
    config.validate();
    model.validate();
    if (config.n_tp < 2)
        throw SpecError("tp_intensity: no tensor-parallel traffic with n_tp = 1");
    TpIntensity ti;
    ti.total = 2.0 * static_cast<double>(model.s_hidden) /
               static_cast<double>(config.n_tp);
    ti.blocking = 1.5 * ti.total;
    return ti;
}

double overhead_estimate(double op_intensity, double hw_intensity) {
    if (op_intensity <= 0 || hw_intensity <= 0)
        throw SpecError("overhead_estimate: intensities must be positive");
    return hw_intensity / op_intensity;
}

namespace {

// Non-sharded gradient reduction overlaps a schedule-dependent window of
// micro-batches; sharded variants are bounded by their own (repeated)
// operations, so the whole intensity is the overlappable one.
double dp_overlap_intensity(const ParallelConfig& config, const ModelSpec& model) {
    if (config.dp_variant == DpVariant::DP_FS)
        return dp_intensity(config, model);
    double window = 1.0;
    if (config.schedule == Schedule::BreadthFirst)
        window = static_cast<double>(config.n_mb);
    else if (config.schedule == Schedule::DepthFirst)
        window = static_cast<double>(std::min(config.n_pp, config.n_mb));
    return window * static_cast<double>(config.s_mb) *
           static_cast<double>(model.s_seq);
}

} // namespace

double beta_net(const ModelSpec& model, const ParallelConfig& config,
                const ClusterSpec& cluster) {
    config.validate(model);
    const double hw = hardware_intensity(cluster, Fabric::Inter);
    // Scale the micro-batch size until the reduction hides; the per-unit
    // intensity is what one s_mb = 1 micro-batch contributes.
    ParallelConfig unit = config;
    unit.s_mb = 1;
    const double per_unit = dp_intensity(unit, model);
    const double s = std::max(1.0, std::ceil(hw / per_unit));
    return static_cast<double>(config.n_mb) * s /
           (static_cast<double>(config.n_pp) * static_cast<double>(config.n_tp));
}

NetworkAssessment assess_network(const ModelSpec& model,
                                 const ParallelConfig& config,
                                 const ClusterSpec& cluster,
                                 const NetworkOptions& opts) {
    config.validate(model);
    cluster.validate();
    NetworkAssessment a;

    if (config.n_dp >= 2) {
        const double hw = hardware_intensity(cluster, dp_fabric(config, cluster));
        a.dp_intensity = dp_intensity(config, model);
        a.dp_overhead_est = overhead_estimate(a.dp_intensity, hw);
        a.beta_net = opts.beta_net_override > 0 ? opts.beta_net_override
                                                : beta_net(model, config, cluster);
        const double overlap = dp_overlap_intensity(config, model);
        if (overlap >= hw)
            a.dp_verdict = Verdict::OverlappedOK;
        else if (a.dp_intensity >= opts.margin * hw)
            a.dp_verdict = Verdict::AmortizedOK;
        else
            a.dp_verdict = Verdict::Bottleneck;
    }

    if (config.n_pp >= 2) {
        const double hw = hardware_intensity(cluster, pp_fabric(config, cluster));
        a.pp_intensity = pp_intensity(model, config);
        a.pp_overhead_est = overhead_estimate(a.pp_intensity, hw);
        const bool overlappable = (config.schedule == Schedule::GPipe ||
                                   config.schedule == Schedule::BreadthFirst) &&
                                  config.n_mb >= config.n_pp + 1;
        if (overlappable)
            a.pp_verdict = Verdict::OverlappedOK;
        else if (a.pp_intensity >= opts.margin * hw)
            a.pp_verdict = Verdict::AmortizedOK;
        else
            a.pp_verdict = Verdict::Bottleneck;
    }

    if (config.n_tp >= 2) {
        const double hw = hardware_intensity(cluster, Fabric::Intra);
        const TpIntensity ti = tp_intensity(model, config);
        a.tp_intensity_total = ti.total;
        a.tp_intensity_blocking = ti.blocking;
        a.tp_overhead_est = overhead_estimate(ti.blocking, hw);
        // The blocking share cannot be hidden by construction.
        a.tp_verdict = ti.blocking >= opts.margin * hw ? Verdict::AmortizedOK
                                                       : Verdict::Bottleneck;
    }

    return a;
}

} // namespace pipesim
