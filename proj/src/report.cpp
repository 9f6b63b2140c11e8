#include "pipesim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

namespace pipesim {

namespace {

using nlohmann::json;

const char* lane_name(int lane) {
    switch (lane) {
    case 0: return "compute";
    case 1: return "dp-net";
    case 2: return "pp-net";
    }
    return "?";
}

} // namespace

std::string format_number(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return buf;
}

double to_gib(double bytes) { return bytes / (1024.0 * 1024.0 * 1024.0); }

std::string format_bytes(double bytes) {
    static const char* units[] = {"B", "KiB", "MiB", "GiB", "TiB"};
    double v = bytes;
    int u = 0;
    while (v >= 1024.0 && u < 4) {
        v /= 1024.0;
        ++u;
    }
    return format_number(v, u == 0 ? 0 : 1) + " " + units[u];
}

AnalysisReport analyze_config(const ModelSpec& model, const ClusterSpec& cluster,
                              const ParallelConfig& config,
                              const MemoryOptions& mem_opts,
                              const NetworkOptions& net_opts) {
    config.validate(model, cluster);
    AnalysisReport r;
    r.model = model;
    r.cluster = cluster;
    r.config = config;
    r.stats = batch_stats(config, cluster);
    r.memory = total_memory(model, config, mem_opts);
    r.network = assess_network(model, config, cluster, net_opts);
    r.profile = method_profile(model, config);
    return r;
}

std::string analysis_text(const AnalysisReport& r) {
    std::ostringstream os;
    os << "configuration: schedule=" << to_string(r.config.schedule)
       << " dp_variant=" << to_string(r.config.dp_variant)
       << " n_dp=" << r.config.n_dp << " n_tp=" << r.config.n_tp
       << " n_pp=" << r.config.n_pp << " n_mb=" << r.config.n_mb
       << " s_mb=" << r.config.s_mb << " n_loop=" << r.config.n_loop << "\n";
    os << "batch: B=" << r.stats.batch << " beta="
       << format_number(r.stats.beta, 4)
       << " beta_min=" << format_number(r.stats.beta_min, 4)
       << " n_gpu=" << r.stats.n_gpu << "\n";
    os << "parameters: " << param_count(r.model) << "\n";
    os << "\nmemory per device\n";
    os << "  state:       " << format_bytes(r.memory.state_bytes) << "\n";
    os << "  activations: " << format_bytes(r.memory.activation_bytes) << "\n";
    os << "  checkpoints: " << format_bytes(r.memory.checkpoint_bytes) << "\n";
    os << "  total:       " << format_bytes(r.memory.total_bytes) << "\n";
    os << "\nnetwork\n";
    if (r.config.n_dp >= 2) {
        os << "  dp intensity: " << format_number(r.network.dp_intensity, 1)
           << " flop/B, overhead est "
           << format_number(100.0 * r.network.dp_overhead_est, 1) << "%, "
           << to_string(r.network.dp_verdict)
           << ", beta_net=" << format_number(r.network.beta_net, 4) << "\n";
    }
    if (r.config.n_pp >= 2) {
        os << "  pp intensity: " << format_number(r.network.pp_intensity, 1)
           << " flop/B, overhead est "
           << format_number(100.0 * r.network.pp_overhead_est, 2) << "%, "
           << to_string(r.network.pp_verdict) << "\n";
    }
    if (r.config.n_tp >= 2) {
        os << "  tp intensity: " << format_number(r.network.tp_intensity_total, 1)
           << " flop/B total, "
           << format_number(r.network.tp_intensity_blocking, 1)
           << " blocking, overhead est "
           << format_number(100.0 * r.network.tp_overhead_est, 1) << "%, "
           << to_string(r.network.tp_verdict) << "\n";
    }
    os << "\nmethod profile (relative)\n";
    os << "  bubble: " << format_number(r.profile.bubble, 4) << "\n";
    os << "  state memory factor: "
       << format_number(r.profile.state_memory_factor, 2) << " layers\n";
    os << "  activation memory factor: "
       << format_number(r.profile.activation_memory_factor, 2)
       << " micro-batch sizes\n";
    os << "  dp network volume: "
       << format_number(r.profile.dp_network_volume, 4) << "\n";
    os << "  dp overlap fraction: "
       << format_number(r.profile.dp_overlap_fraction, 4) << "\n";
    os << "  pp network volume: "
       << format_number(r.profile.pp_network_volume, 2) << "\n";
    return os.str();
}

std::string analysis_csv(const AnalysisReport& r) {
    std::ostringstream os;
    os << "key,value\n";
    os << "schedule," << to_string(r.config.schedule) << "\n";
    os << "dp_variant," << to_string(r.config.dp_variant) << "\n";
    os << "n_dp," << r.config.n_dp << "\n";
    os << "n_tp," << r.config.n_tp << "\n";
    os << "n_pp," << r.config.n_pp << "\n";
    os << "n_mb," << r.config.n_mb << "\n";
    os << "s_mb," << r.config.s_mb << "\n";
    os << "n_loop," << r.config.n_loop << "\n";
    os << "batch," << r.stats.batch << "\n";
    os << "beta," << format_number(r.stats.beta, 6) << "\n";
    os << "beta_min," << format_number(r.stats.beta_min, 6) << "\n";
    os << "param_count," << param_count(r.model) << "\n";
    os << "state_bytes," << static_cast<long long>(std::llround(r.memory.state_bytes)) << "\n";
    os << "activation_bytes," << static_cast<long long>(std::llround(r.memory.activation_bytes)) << "\n";
    os << "checkpoint_bytes," << static_cast<long long>(std::llround(r.memory.checkpoint_bytes)) << "\n";
    os << "total_bytes," << static_cast<long long>(std::llround(r.memory.total_bytes)) << "\n";
    os << "state_human," << format_bytes(r.memory.state_bytes) << "\n";
    os << "activation_human," << format_bytes(r.memory.activation_bytes) << "\n";
    os << "checkpoint_human," << format_bytes(r.memory.checkpoint_bytes) << "\n";
    os << "dp_intensity," << format_number(r.network.dp_intensity, 4) << "\n";
    os << "pp_intensity," << format_number(r.network.pp_intensity, 4) << "\n";
    os << "tp_intensity_total," << format_number(r.network.tp_intensity_total, 4) << "\n";
    os << "tp_intensity_blocking," << format_number(r.network.tp_intensity_blocking, 4) << "\n";
    os << "dp_overhead_est," << format_number(r.network.dp_overhead_est, 6) << "\n";
    os << "pp_overhead_est," << format_number(r.network.pp_overhead_est, 6) << "\n";
    os << "tp_overhead_est," << format_number(r.network.tp_overhead_est, 6) << "\n";
    os << "beta_net," << format_number(r.network.beta_net, 6) << "\n";
    os << "dp_verdict," << to_string(r.network.dp_verdict) << "\n";
    os << "pp_verdict," << to_string(r.network.pp_verdict) << "\n";
    os << "tp_verdict," << to_string(r.network.tp_verdict) << "\n";
    os << "profile_bubble," << format_number(r.profile.bubble, 6) << "\n";
    os << "profile_state_factor," << format_number(r.profile.state_memory_factor, 4) << "\n";
    os << "profile_activation_factor," << format_number(r.profile.activation_memory_factor, 4) << "\n";
    os << "profile_dp_network," << format_number(r.profile.dp_network_volume, 6) << "\n";
    os << "profile_dp_overlap," << format_number(r.profile.dp_overlap_fraction, 6) << "\n";
    os << "profile_pp_network," << format_number(r.profile.pp_network_volume, 4) << "\n";
    return os.str();
}

std::string chrome_trace_json(const Timeline& timeline, const TaskGraph& graph) {
    json root;
    root["displayTimeUnit"] = "ms";
    json events = json::array();

    for (count_t d = 0; d < timeline.n_devices; ++d) {
        json p;
        p["name"] = "process_name";
        p["ph"] = "M";
        p["pid"] = d;
        p["args"]["name"] = "device " + std::to_string(d);
        events.push_back(p);
        for (int lane = 0; lane < 3; ++lane) {
            json t;
            t["name"] = "thread_name";
            t["ph"] = "M";
            t["pid"] = d;
            t["tid"] = lane;
            t["args"]["name"] = lane_name(lane);
            events.push_back(t);
        }
    }

    std::vector<const Task*> order;
    order.reserve(graph.tasks.size());
    for (const Task& t : graph.tasks) order.push_back(&t);
    std::sort(order.begin(), order.end(), [&](const Task* a, const Task* b) {
        const auto& ea = timeline.events[static_cast<std::size_t>(a->id)];
        const auto& eb = timeline.events[static_cast<std::size_t>(b->id)];
        return std::tie(ea.start, a->device, a->lane, a->id) <
               std::tie(eb.start, b->device, b->lane, b->id);
    });
    for (const Task* t : order) {
        const auto& ev = timeline.events[static_cast<std::size_t>(t->id)];
        std::ostringstream name;
        name << to_string(t->kind) << " mb" << t->micro_batch << " s" << t->stage;
        json e;
        e["name"] = name.str();
        e["ph"] = "X";
        e["ts"] = ev.start * 1e6;
        e["dur"] = (ev.end - ev.start) * 1e6;
        e["pid"] = t->device;
        e["tid"] = static_cast<int>(t->lane);
        events.push_back(e);
        if (t->kind == TaskKind::Transfer) {
            // Mirror the hand-off on the receiving device's lane.
            e["pid"] = t->peer_device;
            events.push_back(e);
        }
    }
    root["traceEvents"] = std::move(events);
    return root.dump(2) + "\n";
}

std::string summary_text(const SimulationSummary& s, const Timeline& timeline) {
    std::ostringstream os;
    os << "makespan_seconds," << format_number(s.makespan, 9) << "\n";
    os << "bubble_fraction," << format_number(s.bubble, 9) << "\n";
    if (s.throughput > 0) {
        os << "throughput_tflops," << format_number(s.throughput / 1e12, 4) << "\n";
        os << "utilization," << format_number(s.utilization, 6) << "\n";
    }
    os << "peak_inflight_layers," << s.peak_inflight_layers << "\n";
    for (count_t d = 0; d < timeline.n_devices; ++d) {
        const auto& lanes = timeline.lane_busy[static_cast<std::size_t>(d)];
        os << "busy_device" << d;
        for (int l = 0; l < 3; ++l)
            os << "," << lane_name(l) << "=" << format_number(lanes[l], 9);
        os << "\n";
    }
    return os.str();
}

namespace {

const char* kind_color(TaskKind k) {
    switch (k) {
    case TaskKind::Fwd: return "#5b9bd5";
    case TaskKind::Bwd: return "#2e5e94";
    case TaskKind::Reduce: return "#e8a33d";
    case TaskKind::Reconstruct: return "#8e5cc7";
    case TaskKind::Transfer: return "#57b894";
    }
    return "#888888";
}

} // namespace

std::string gantt_svg(const Timeline& timeline, const TaskGraph& graph) {
    const double width = 1000.0, row_h = 14.0, left = 70.0, top = 10.0;
    const double span = std::max(timeline.makespan, 1e-12);
    const double scale = (width - left - 10.0) / span;
    const count_t rows = timeline.n_devices * 3;
    const double height = top * 2 + row_h * static_cast<double>(rows);

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
       << "\" height=\"" << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (count_t d = 0; d < timeline.n_devices; ++d)
        for (int l = 0; l < 3; ++l) {
            const double y = top + row_h * static_cast<double>(d * 3 + l);
            os << "<text x=\"2\" y=\"" << format_number(y + row_h - 4, 1)
               << "\" font-size=\"9\" font-family=\"monospace\">d" << d << " "
               << lane_name(l) << "</text>\n";
        }
    std::vector<const Task*> order;
    for (const Task& t : graph.tasks) order.push_back(&t);
    std::sort(order.begin(), order.end(),
              [](const Task* a, const Task* b) { return a->id < b->id; });
    for (const Task* t : order) {
        const auto& ev = timeline.events[static_cast<std::size_t>(t->id)];
        const double w = std::max((ev.end - ev.start) * scale, 0.5);
        auto draw = [&](count_t device) {
            const double x = left + ev.start * scale;
            const double y =
                top + row_h * static_cast<double>(device * 3 +
                                                  static_cast<int>(t->lane));
            os << "<rect x=\"" << format_number(x, 2) << "\" y=\""
               << format_number(y + 1, 2) << "\" width=\"" << format_number(w, 2)
               << "\" height=\"" << format_number(row_h - 2, 2) << "\" fill=\""
               << kind_color(t->kind) << "\" stroke=\"#333333\" stroke-width=\"0.2\">"
               << "<title>" << to_string(t->kind) << " mb" << t->micro_batch
               << " s" << t->stage << "</title></rect>\n";
        };
        draw(t->device);
        if (t->kind == TaskKind::Transfer) draw(t->peer_device);
    }
    os << "</svg>\n";
    return os.str();
}

std::string best_table_csv(const BestTable& table, const ClusterSpec& cluster) {
    std::ostringstream os;
    os << "method,batch_size,n_pp,n_tp,s_mb,n_mb,n_loop,dp_variant,score_tflops,"
          "utilization,state_gib,activation_gib,checkpoint_gib,total_gib,"
          "dp_verdict,pp_verdict,tp_verdict\n";
    for (const BestTableRow& row : table.rows) {
        const RankedConfig& rc = row.best;
        os << to_string(row.schedule) << "," << row.batch << ","
           << rc.config.n_pp << "," << rc.config.n_tp << "," << rc.config.s_mb
           << "," << rc.config.n_mb << "," << rc.config.n_loop << ","
           << to_string(rc.config.dp_variant) << ","
           << format_number(rc.score / 1e12, 2) << ","
           << format_number(rc.score / cluster.peak_flops, 4) << ","
           << format_number(to_gib(rc.memory.state_bytes), 3) << ","
           << format_number(to_gib(rc.memory.activation_bytes), 3) << ","
           << format_number(to_gib(rc.memory.checkpoint_bytes), 3) << ","
           << format_number(to_gib(rc.memory.total_bytes), 3) << ","
           << to_string(rc.verdicts.dp_verdict) << ","
           << to_string(rc.verdicts.pp_verdict) << ","
           << to_string(rc.verdicts.tp_verdict) << "\n";
    }
    return os.str();
}

std::string tradeoff_csv(const TradeoffCurve& curve) {
    std::ostringstream os;
    os << "# base_samples=" << format_number(curve.base_samples, 0)
       << " base_tokens=" << format_number(curve.base_tokens, 0) << "\n";
    os << "n_gpu,batch,time_days,cost_gpu_days,beta,schedule\n";
    for (const TradeoffPoint& p : curve.points) {
        os << p.n_gpu << "," << format_number(p.batch, 2) << ","
           << format_number(p.time_seconds / 86400.0, 4) << ","
           << format_number(p.cost_gpu_seconds / 86400.0, 2) << ","
           << format_number(p.beta, 6) << "," << to_string(p.schedule) << "\n";
    }
    return os.str();
}

std::string tradeoff_svg(
    const std::vector<std::pair<Schedule, TradeoffCurve>>& curves) {
    const double width = 640.0, height = 480.0, margin = 60.0;
    double min_x = 1e300, max_x = 0, min_y = 1e300, max_y = 0;
    for (const auto& [sched, curve] : curves)
        for (const TradeoffPoint& p : curve.points) {
            min_x = std::min(min_x, p.time_seconds / 86400.0);
            max_x = std::max(max_x, p.time_seconds / 86400.0);
            min_y = std::min(min_y, p.cost_gpu_seconds / 86400.0);
            max_y = std::max(max_y, p.cost_gpu_seconds / 86400.0);
        }
    if (min_x <= 0 || min_y <= 0 || curves.empty()) {
        min_x = min_y = 0.1;
        max_x = max_y = 1.0;
    }
    if (max_x <= min_x) max_x = min_x * 10.0;
    if (max_y <= min_y) max_y = min_y * 10.0;
    const double lx0 = std::log10(min_x), lx1 = std::log10(max_x);
    const double ly0 = std::log10(min_y), ly1 = std::log10(max_y);
    auto sx = [&](double v) {
        return margin + (std::log10(v) - lx0) / (lx1 - lx0) *
                            (width - 2 * margin);
    };
    auto sy = [&](double v) {
        return height - margin -
               (std::log10(v) - ly0) / (ly1 - ly0) * (height - 2 * margin);
    };
    static const char* palette[] = {"#2e5e94", "#c0504d", "#9bbb59",
                                    "#8064a2", "#4bacc6"};
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
       << "\" height=\"" << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
       << "\" font-size=\"12\" text-anchor=\"middle\">training time "
          "(days, log)</text>\n";
    os << "<text x=\"14\" y=\"" << height / 2
       << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
       << height / 2 << ")\">cost (GPU-days, log)</text>\n";
    os << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\""
       << width - 2 * margin << "\" height=\"" << height - 2 * margin
       << "\" fill=\"none\" stroke=\"#333333\"/>\n";
    int series = 0;
    for (const auto& [sched, curve] : curves) {
        const char* color = palette[series % 5];
        os << "<polyline fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"1.5\" points=\"";
        for (const TradeoffPoint& p : curve.points)
            os << format_number(sx(p.time_seconds / 86400.0), 2) << ","
               << format_number(sy(p.cost_gpu_seconds / 86400.0), 2) << " ";
        os << "\"/>\n";
        os << "<text x=\"" << width - margin + 4 << "\" y=\""
           << margin + 14 * (series + 1)
           << "\" font-size=\"10\" fill=\"" << color << "\">"
           << to_string(sched) << "</text>\n";
        ++series;
    }
    os << "</svg>\n";
    return os.str();
}

std::string noise_scale_text(const NoiseScaleEstimate& est, std::size_t n_samples,
                             std::size_t dim) {
    std::ostringstream os;
    os << "samples: " << n_samples << "\n";
    os << "dimension: " << dim << "\n";
    os << "grad_norm_sq: " << format_number(est.grad_norm_sq, 12) << "\n";
    os << "trace_sigma0: " << format_number(est.trace_sigma0, 12) << "\n";
    os << "b_noise: " << format_number(est.b_noise, 6) << "\n";
    return os.str();
}

std::string noise_scale_csv(const NoiseScaleEstimate& est, std::size_t n_samples,
                            std::size_t dim) {
    std::ostringstream os;
    os << "samples,dimension,grad_norm_sq,trace_sigma0,b_noise\n";
    os << n_samples << "," << dim << "," << format_number(est.grad_norm_sq, 12)
       << "," << format_number(est.trace_sigma0, 12) << ","
       << format_number(est.b_noise, 6) << "\n";
    return os.str();
}

} // namespace pipesim
