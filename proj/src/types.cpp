#include "pipesim/types.hpp"

#include <cmath>
#include <sstream>

namespace pipesim {

namespace {

[[noreturn]] void fail(const std::string& what) { throw SpecError(what); }

void require(bool ok, const std::string& what) {
    if (!ok) fail(what);
}

} // namespace

std::string to_string(DpVariant v) {
    switch (v) {
    case DpVariant::DP0: return "dp0";
    case DpVariant::DP_PS: return "dp_ps";
    case DpVariant::DP_FS: return "dp_fs";
    }
    return "?";
}

std::string to_string(Schedule s) {
    switch (s) {
    case Schedule::NoPipeline: return "no_pipeline";
    case Schedule::GPipe: return "gpipe";
    case Schedule::OneFOneB: return "1f1b";
    case Schedule::DepthFirst: return "depth_first";
    case Schedule::BreadthFirst: return "breadth_first";
    }
    return "?";
}

DpVariant dp_variant_from_string(std::string_view s) {
    if (s == "dp0") return DpVariant::DP0;
    if (s == "dp_ps") return DpVariant::DP_PS;
    if (s == "dp_fs") return DpVariant::DP_FS;
    fail("unknown data-parallel variant '" + std::string(s) +
         "' (expected dp0, dp_ps or dp_fs)");
}

Schedule schedule_from_string(std::string_view s) {
    if (s == "no_pipeline") return Schedule::NoPipeline;
    if (s == "gpipe") return Schedule::GPipe;
    if (s == "1f1b") return Schedule::OneFOneB;
    if (s == "depth_first") return Schedule::DepthFirst;
    if (s == "breadth_first") return Schedule::BreadthFirst;
    fail("unknown schedule '" + std::string(s) +
         "' (expected no_pipeline, gpipe, 1f1b, depth_first or breadth_first)");
}

ModelSpec ModelSpec::make(count_t layers, count_t hidden, count_t heads,
                          count_t seq, count_t voc, count_t mlp, count_t head) {
    ModelSpec m;
    m.n_layers = layers;
    m.s_hidden = hidden;
    m.n_heads = heads;
    m.s_head = head > 0 ? head : (heads > 0 ? hidden / heads : 0);
    m.s_mlp = mlp > 0 ? mlp : 4 * hidden;
    m.s_seq = seq;
    m.s_voc = voc;
    m.validate();
    return m;
}

void ModelSpec::validate() const {
    require(n_layers >= 1 && s_hidden >= 1 && n_heads >= 1 && s_head >= 1 &&
                s_mlp >= 1 && s_seq >= 1 && s_voc >= 1,
            "model: all size fields must be >= 1");
    require(n_heads * s_head == s_hidden,
            "model: n_heads * s_head must equal s_hidden");
}

void ClusterSpec::validate() const {
    require(n_node >= 1 && s_node >= 1, "cluster: node counts must be >= 1");
    require(peak_flops > 0, "cluster: peak_flops must be positive");
    require(bw_intra > 0 && bw_inter > 0,
            "cluster: bandwidths must be positive");
    require(pp_latency >= 0, "cluster: pp_latency must be non-negative");
    require(mem_capacity >= 0, "cluster: mem_capacity must be non-negative");
    require(kernel_efficiency > 0 && kernel_efficiency <= 1,
            "cluster: kernel_efficiency must be in (0, 1]");
    require(std::isfinite(peak_flops / bw_intra) &&
                std::isfinite(peak_flops / bw_inter),
            "cluster: hardware intensities must be finite");
}

void ParallelConfig::validate() const {
    require(n_dp >= 1 && n_tp >= 1 && n_pp >= 1 && n_mb >= 1 && s_mb >= 1 &&
                n_loop >= 1,
            "config: all grid and batching fields must be >= 1");
    if (schedule == Schedule::NoPipeline) {
        require(n_pp == 1, "config: no_pipeline requires n_pp = 1");
        require(n_loop == 1, "config: no_pipeline requires n_loop = 1");
    }
    if (schedule == Schedule::GPipe || schedule == Schedule::OneFOneB)
        require(n_loop == 1, "config: non-looped schedules require n_loop = 1");
    if (is_pipelined(schedule) && n_pp > 1)
        require(n_mb >= n_pp, "config: pipelined schedules require n_mb >= n_pp");
    if (schedule == Schedule::DepthFirst)
        require(n_mb % n_pp == 0,
                "config: depth_first requires n_mb to be a multiple of n_pp");
}

void ParallelConfig::validate(const ModelSpec& model) const {
    validate();
    model.validate();
    if (model.n_layers % n_stage() != 0) {
        std::ostringstream os;
        os << "config: divisibility violated, n_stage = n_pp * n_loop = "
           << n_stage() << " does not divide n_layers = " << model.n_layers;
        fail(os.str());
    }
}

void ParallelConfig::validate(const ModelSpec& model,
                              const ClusterSpec& cluster) const {
    validate(model);
    cluster.validate();
    if (grid_size() != cluster.n_gpu()) {
        std::ostringstream os;
        os << "config: grid mismatch, n_dp * n_tp * n_pp = " << grid_size()
           << " but the cluster has " << cluster.n_gpu() << " devices";
        fail(os.str());
    }
}

count_t param_count(const ModelSpec& model) {
    return 12 * model.n_layers * model.s_hidden * model.s_hidden;
}

double compute_per_gpu(const ModelSpec& model, const ParallelConfig& config) {
    const double h = static_cast<double>(model.s_hidden);
    const double per_token = 96.0 * static_cast<double>(config.n_mb) *
                             static_cast<double>(config.s_mb) *
                             static_cast<double>(model.n_layers) * h *
                             (h + static_cast<double>(model.s_seq) / 6.0 +
                              static_cast<double>(model.s_voc) /
                                  (16.0 * static_cast<double>(model.n_layers)));
    return static_cast<double>(model.s_seq) * per_token /
           (static_cast<double>(config.n_pp) * static_cast<double>(config.n_tp));
}

double compute_per_gpu_dense(const ModelSpec& model,
                             const ParallelConfig& config) {
    const double h = static_cast<double>(model.s_hidden);
    return static_cast<double>(model.s_seq) * 96.0 *
           static_cast<double>(config.n_mb) * static_cast<double>(config.s_mb) *
           static_cast<double>(model.n_layers) * h * h /
           (static_cast<double>(config.n_pp) * static_cast<double>(config.n_tp));
}

double compute_per_sample(const ModelSpec& model) {
    ParallelConfig unit;
    return compute_per_gpu(model, unit);
}

BatchStats batch_stats(const ParallelConfig& config, const ClusterSpec& cluster) {
    config.validate();
    cluster.validate();
    if (config.grid_size() != cluster.n_gpu()) {
        std::ostringstream os;
        os << "config: grid mismatch, n_dp * n_tp * n_pp = " << config.grid_size()
           << " but the cluster has " << cluster.n_gpu() << " devices";
        fail(os.str());
    }
    BatchStats st;
    st.batch = config.batch_size();
    st.n_gpu = cluster.n_gpu();
    st.beta = static_cast<double>(st.batch) / static_cast<double>(st.n_gpu);
    st.beta_min = 1.0 / static_cast<double>(config.n_tp);
    return st;
}

double hardware_intensity(const ClusterSpec& cluster, Fabric fabric) {
    cluster.validate();
    return cluster.peak_flops /
           (fabric == Fabric::Intra ? cluster.bw_intra : cluster.bw_inter);
}

Fabric dp_fabric(const ParallelConfig& config, const ClusterSpec& cluster) {
    // Data-parallel neighbours sit n_tp * n_pp devices apart.
    return config.n_dp * config.n_tp * config.n_pp <= cluster.s_node
               ? Fabric::Intra
               : Fabric::Inter;
}

Fabric pp_fabric(const ParallelConfig& config, const ClusterSpec& cluster) {
    return config.n_tp * config.n_pp <= cluster.s_node ? Fabric::Intra
                                                       : Fabric::Inter;
}

ModelSpec model_preset(std::string_view name) {
    if (name == "gpt3") return ModelSpec::make(96, 12288, 96, 2048, 51200);
    // The trillion-parameter example: 160 heads of size 160, 128 layers.
    if (name == "1t") return ModelSpec::make(128, 25600, 160, 2048, 51200);
    if (name == "52b") return ModelSpec::make(64, 8192, 64, 1024, 30592);
    if (name == "6.6b") return ModelSpec::make(32, 4096, 32, 1024, 30592);
    fail("unknown model preset '" + std::string(name) + "'");
}

ClusterSpec cluster_preset(std::string_view name) {
    ClusterSpec c;
    if (name == "a100") {
        c.n_node = 4;
        c.s_node = 8;
        c.peak_flops = 312e12;
        c.bw_intra = 600e9; // NVLink, input + output
        c.bw_inter = 50e9;  // InfiniBand, input + output
        c.pp_latency = 20e-6;
        c.mem_capacity = 80.0 * (1ull << 30);
        c.kernel_efficiency = 0.6;
        return c;
    }
    if (name == "v100-dgx1") {
        c.n_node = 8;
        c.s_node = 8;
        c.peak_flops = 125e12;
        c.bw_intra = 300e9;
        c.bw_inter = 32e9;
        c.pp_latency = 30e-6;
        c.mem_capacity = 32.0 * (1ull << 30);
        c.kernel_efficiency = 0.6;
        return c;
    }
    fail("unknown cluster preset '" + std::string(name) + "'");
}

std::vector<std::string> model_preset_names() {
    return {"gpt3", "1t", "52b", "6.6b"};
}

std::vector<std::string> cluster_preset_names() {
    return {"a100", "v100-dgx1"};
}

} // namespace pipesim
