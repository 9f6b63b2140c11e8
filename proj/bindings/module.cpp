// Python bindings for the core model, simulator and search operations.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pipesim/config_io.hpp"
#include "pipesim/memory.hpp"
#include "pipesim/network.hpp"
#include "pipesim/perf.hpp"
#include "pipesim/report.hpp"
#include "pipesim/schedule.hpp"
#include "pipesim/search.hpp"
#include "pipesim/simulate.hpp"

namespace py = pybind11;
using namespace pipesim;

namespace {

Timeline simulate_config(const ModelSpec& model, const ParallelConfig& config,
                         const TimingModel& timing) {
    const StagePlacement placement = place_stages(model, config);
    return simulate(build_tasks(model, config, placement), timing);
}

} // namespace

PYBIND11_MODULE(_pipesim, m) {
    m.doc() = "Analytic model and schedule simulator for pipeline/data/"
              "tensor-parallel transformer training";

    py::register_exception<SpecError>(m, "SpecError");
    py::register_exception<SimError>(m, "SimError");

    py::class_<NetworkOptions>(m, "NetworkOptions")
        .def(py::init<>())
        .def_readwrite("margin", &NetworkOptions::margin)
        .def_readwrite("beta_net_override", &NetworkOptions::beta_net_override);
    py::class_<MemoryOptions>(m, "MemoryOptions")
        .def(py::init<>())
        .def_readwrite("dp0_bytes_per_param", &MemoryOptions::dp0_bytes_per_param)
        .def_readwrite("headroom", &MemoryOptions::headroom);

    py::enum_<DpVariant>(m, "DpVariant")
        .value("DP0", DpVariant::DP0)
        .value("DP_PS", DpVariant::DP_PS)
        .value("DP_FS", DpVariant::DP_FS);
    py::enum_<Schedule>(m, "Schedule")
        .value("NoPipeline", Schedule::NoPipeline)
        .value("GPipe", Schedule::GPipe)
        .value("OneFOneB", Schedule::OneFOneB)
        .value("DepthFirst", Schedule::DepthFirst)
        .value("BreadthFirst", Schedule::BreadthFirst);
    py::enum_<Fabric>(m, "Fabric")
        .value("Intra", Fabric::Intra)
        .value("Inter", Fabric::Inter);
    py::enum_<Verdict>(m, "Verdict")
        .value("OverlappedOK", Verdict::OverlappedOK)
        .value("AmortizedOK", Verdict::AmortizedOK)
        .value("Bottleneck", Verdict::Bottleneck);
    py::enum_<Scoring>(m, "Scoring")
        .value("Analytic", Scoring::Analytic)
        .value("Simulate", Scoring::Simulate);
    py::enum_<AccumulationOrder>(m, "AccumulationOrder")
        .value("DepthFirst", AccumulationOrder::DepthFirst)
        .value("BreadthFirst", AccumulationOrder::BreadthFirst);
    py::enum_<TaskKind>(m, "TaskKind")
        .value("Fwd", TaskKind::Fwd)
        .value("Bwd", TaskKind::Bwd)
        .value("Reduce", TaskKind::Reduce)
        .value("Reconstruct", TaskKind::Reconstruct)
        .value("Transfer", TaskKind::Transfer);
    py::enum_<Lane>(m, "Lane")
        .value("Compute", Lane::Compute)
        .value("DpNet", Lane::DpNet)
        .value("PpNet", Lane::PpNet);

    py::class_<ModelSpec>(m, "ModelSpec")
        .def(py::init(&ModelSpec::make), py::arg("n_layers"), py::arg("s_hidden"),
             py::arg("n_heads"), py::arg("s_seq"), py::arg("s_voc"),
             py::arg("s_mlp") = -1, py::arg("s_head") = -1)
        .def_readonly("n_layers", &ModelSpec::n_layers)
        .def_readonly("s_hidden", &ModelSpec::s_hidden)
        .def_readonly("n_heads", &ModelSpec::n_heads)
        .def_readonly("s_head", &ModelSpec::s_head)
        .def_readonly("s_mlp", &ModelSpec::s_mlp)
        .def_readonly("s_seq", &ModelSpec::s_seq)
        .def_readonly("s_voc", &ModelSpec::s_voc);

    py::class_<ClusterSpec>(m, "ClusterSpec")
        .def(py::init([](count_t n_node, count_t s_node, double peak_flops,
                         double bw_intra, double bw_inter, double pp_latency,
                         double mem_capacity, double kernel_efficiency) {
                 ClusterSpec c{n_node,     s_node,   peak_flops,
                               bw_intra,   bw_inter, pp_latency,
                               mem_capacity, kernel_efficiency};
                 c.validate();
                 return c;
             }),
             py::arg("n_node"), py::arg("s_node"), py::arg("peak_flops"),
             py::arg("bw_intra"), py::arg("bw_inter"), py::arg("pp_latency") = 0.0,
             py::arg("mem_capacity") = 0.0, py::arg("kernel_efficiency") = 0.6)
        .def_readonly("n_node", &ClusterSpec::n_node)
        .def_readonly("s_node", &ClusterSpec::s_node)
        .def_readonly("peak_flops", &ClusterSpec::peak_flops)
        .def_readonly("bw_intra", &ClusterSpec::bw_intra)
        .def_readonly("bw_inter", &ClusterSpec::bw_inter)
        .def_readonly("pp_latency", &ClusterSpec::pp_latency)
        .def_readonly("mem_capacity", &ClusterSpec::mem_capacity)
        .def_readonly("kernel_efficiency", &ClusterSpec::kernel_efficiency)
        .def("n_gpu", &ClusterSpec::n_gpu);

    py::class_<ParallelConfig>(m, "ParallelConfig")
        .def(py::init([](count_t n_dp, count_t n_tp, count_t n_pp, count_t n_mb,
                         count_t s_mb, count_t n_loop, DpVariant dp_variant,
                         Schedule schedule) {
                 ParallelConfig c{n_dp, n_tp,       n_pp,    n_mb,
                                  s_mb, n_loop,     dp_variant, schedule};
                 c.validate();
                 return c;
             }),
             py::arg("n_dp") = 1, py::arg("n_tp") = 1, py::arg("n_pp") = 1,
             py::arg("n_mb") = 1, py::arg("s_mb") = 1, py::arg("n_loop") = 1,
             py::arg("dp_variant") = DpVariant::DP0,
             py::arg("schedule") = Schedule::NoPipeline)
        .def_readonly("n_dp", &ParallelConfig::n_dp)
        .def_readonly("n_tp", &ParallelConfig::n_tp)
        .def_readonly("n_pp", &ParallelConfig::n_pp)
        .def_readonly("n_mb", &ParallelConfig::n_mb)
        .def_readonly("s_mb", &ParallelConfig::s_mb)
        .def_readonly("n_loop", &ParallelConfig::n_loop)
        .def_readonly("dp_variant", &ParallelConfig::dp_variant)
        .def_readonly("schedule", &ParallelConfig::schedule)
        .def("n_stage", &ParallelConfig::n_stage)
        .def("batch_size", &ParallelConfig::batch_size)
        .def("validate",
             py::overload_cast<const ModelSpec&, const ClusterSpec&>(
                 &ParallelConfig::validate, py::const_));

    py::class_<BatchStats>(m, "BatchStats")
        .def_readonly("batch", &BatchStats::batch)
        .def_readonly("beta", &BatchStats::beta)
        .def_readonly("beta_min", &BatchStats::beta_min)
        .def_readonly("n_gpu", &BatchStats::n_gpu);

    py::class_<MemoryBreakdown>(m, "MemoryBreakdown")
        .def_readonly("state_bytes", &MemoryBreakdown::state_bytes)
        .def_readonly("activation_bytes", &MemoryBreakdown::activation_bytes)
        .def_readonly("checkpoint_bytes", &MemoryBreakdown::checkpoint_bytes)
        .def_readonly("total_bytes", &MemoryBreakdown::total_bytes);

    py::class_<NetworkAssessment>(m, "NetworkAssessment")
        .def_readonly("dp_intensity", &NetworkAssessment::dp_intensity)
        .def_readonly("pp_intensity", &NetworkAssessment::pp_intensity)
        .def_readonly("tp_intensity_total", &NetworkAssessment::tp_intensity_total)
        .def_readonly("tp_intensity_blocking",
                      &NetworkAssessment::tp_intensity_blocking)
        .def_readonly("dp_overhead_est", &NetworkAssessment::dp_overhead_est)
        .def_readonly("pp_overhead_est", &NetworkAssessment::pp_overhead_est)
        .def_readonly("tp_overhead_est", &NetworkAssessment::tp_overhead_est)
        .def_readonly("beta_net", &NetworkAssessment::beta_net)
        .def_readonly("dp_verdict", &NetworkAssessment::dp_verdict)
        .def_readonly("pp_verdict", &NetworkAssessment::pp_verdict)
        .def_readonly("tp_verdict", &NetworkAssessment::tp_verdict);

    py::class_<StagePlacement>(m, "StagePlacement")
        .def_readonly("n_stage", &StagePlacement::n_stage)
        .def_readonly("n_pp", &StagePlacement::n_pp)
        .def_readonly("layers_per_stage", &StagePlacement::layers_per_stage)
        .def_readonly("assignment", &StagePlacement::assignment);

    py::class_<TimingModel>(m, "TimingModel")
        .def(py::init<>())
        .def_readwrite("t_fwd_stage", &TimingModel::t_fwd_stage)
        .def_readwrite("bwd_ratio", &TimingModel::bwd_ratio)
        .def_readwrite("t_pp_transfer", &TimingModel::t_pp_transfer)
        .def_readwrite("pp_latency", &TimingModel::pp_latency)
        .def_readwrite("t_dp_reduce_stage", &TimingModel::t_dp_reduce_stage)
        .def_readwrite("t_dp_reconstruct_stage",
                       &TimingModel::t_dp_reconstruct_stage)
        .def_static("derive", &TimingModel::derive, py::arg("model"),
                    py::arg("config"), py::arg("cluster"),
                    py::arg("recompute") = true);

    py::class_<Task>(m, "Task")
        .def_readonly("id", &Task::id)
        .def_readonly("device", &Task::device)
        .def_readonly("peer_device", &Task::peer_device)
        .def_readonly("lane", &Task::lane)
        .def_readonly("kind", &Task::kind)
        .def_readonly("micro_batch", &Task::micro_batch)
        .def_readonly("stage", &Task::stage)
        .def_readonly("deps", &Task::deps);

    py::class_<TaskGraph>(m, "TaskGraph")
        .def_readonly("n_devices", &TaskGraph::n_devices)
        .def_readonly("tasks", &TaskGraph::tasks)
        .def_readonly("compute_program", &TaskGraph::compute_program)
        .def("tasks_of_kind", &TaskGraph::tasks_of_kind);

    py::class_<TimelineEvent>(m, "TimelineEvent")
        .def_readonly("task", &TimelineEvent::task)
        .def_readonly("start", &TimelineEvent::start)
        .def_readonly("end", &TimelineEvent::end);

    py::class_<Timeline>(m, "Timeline")
        .def_readonly("n_devices", &Timeline::n_devices)
        .def_readonly("events", &Timeline::events)
        .def_readonly("makespan", &Timeline::makespan)
        .def_readonly("lane_busy", &Timeline::lane_busy);

    py::class_<PerfPoint>(m, "PerfPoint")
        .def(py::init([](double beta, double throughput, Schedule schedule) {
                 PerfPoint p;
                 p.beta = beta;
                 p.throughput = throughput;
                 p.config.schedule = schedule;
                 return p;
             }),
             py::arg("beta"), py::arg("throughput"),
             py::arg("schedule") = Schedule::NoPipeline)
        .def_readonly("beta", &PerfPoint::beta)
        .def_readonly("throughput", &PerfPoint::throughput)
        .def_readonly("utilization", &PerfPoint::utilization)
        .def_readonly("config", &PerfPoint::config);

    py::class_<NoiseScaleEstimate>(m, "NoiseScaleEstimate")
        .def_readonly("b_noise", &NoiseScaleEstimate::b_noise)
        .def_readonly("grad_norm_sq", &NoiseScaleEstimate::grad_norm_sq)
        .def_readonly("trace_sigma0", &NoiseScaleEstimate::trace_sigma0);

    py::class_<MethodProfile>(m, "MethodProfile")
        .def_readonly("bubble", &MethodProfile::bubble)
        .def_readonly("state_memory_factor", &MethodProfile::state_memory_factor)
        .def_readonly("activation_memory_factor",
                      &MethodProfile::activation_memory_factor)
        .def_readonly("dp_network_volume", &MethodProfile::dp_network_volume)
        .def_readonly("dp_overlap_fraction", &MethodProfile::dp_overlap_fraction)
        .def_readonly("pp_network_volume", &MethodProfile::pp_network_volume)
        .def_readonly("chimera_pipelines", &MethodProfile::chimera_pipelines);

    py::class_<TradeoffPoint>(m, "TradeoffPoint")
        .def_readonly("n_gpu", &TradeoffPoint::n_gpu)
        .def_readonly("batch", &TradeoffPoint::batch)
        .def_readonly("time_seconds", &TradeoffPoint::time_seconds)
        .def_readonly("cost_gpu_seconds", &TradeoffPoint::cost_gpu_seconds)
        .def_readonly("beta", &TradeoffPoint::beta)
        .def_readonly("schedule", &TradeoffPoint::schedule);

    py::class_<TradeoffCurve>(m, "TradeoffCurve")
        .def_readonly("base_samples", &TradeoffCurve::base_samples)
        .def_readonly("base_tokens", &TradeoffCurve::base_tokens)
        .def_readonly("points", &TradeoffCurve::points);

    py::class_<SearchSpace>(m, "SearchSpace")
        .def(py::init<>())
        .def_readwrite("schedules", &SearchSpace::schedules)
        .def_readwrite("n_pp_choices", &SearchSpace::n_pp_choices)
        .def_readwrite("n_tp_choices", &SearchSpace::n_tp_choices)
        .def_readwrite("s_mb_choices", &SearchSpace::s_mb_choices)
        .def_readwrite("n_mb_choices", &SearchSpace::n_mb_choices)
        .def_readwrite("n_loop_choices", &SearchSpace::n_loop_choices)
        .def_readwrite("dp_variants", &SearchSpace::dp_variants)
        .def_readwrite("batch_sizes", &SearchSpace::batch_sizes)
        .def_readwrite("scoring", &SearchSpace::scoring);

    py::class_<RankedConfig>(m, "RankedConfig")
        .def_readonly("config", &RankedConfig::config)
        .def_readonly("score", &RankedConfig::score)
        .def_readonly("memory", &RankedConfig::memory)
        .def_readonly("verdicts", &RankedConfig::verdicts);

    py::class_<BestTableRow>(m, "BestTableRow")
        .def_readonly("schedule", &BestTableRow::schedule)
        .def_readonly("batch", &BestTableRow::batch)
        .def_readonly("best", &BestTableRow::best);

    py::class_<BestTable>(m, "BestTable")
        .def_readonly("rows", &BestTable::rows)
        .def_readonly("empty_cells", &BestTable::empty_cells);

    m.def("model_preset", &model_preset);
    m.def("cluster_preset", &cluster_preset);
    m.def("model_preset_names", &model_preset_names);
    m.def("cluster_preset_names", &cluster_preset_names);

    m.def("param_count", &param_count);
    m.def("compute_per_gpu", &compute_per_gpu);
    m.def("compute_per_gpu_dense", &compute_per_gpu_dense);
    m.def("compute_per_sample", &compute_per_sample);
    m.def("batch_stats", &batch_stats);
    m.def("hardware_intensity", &hardware_intensity);

    m.def("state_memory", &state_memory, py::arg("model"), py::arg("config"),
          py::arg("opts") = MemoryOptions{});
    m.def("activation_memory", &activation_memory);
    m.def("checkpoint_memory", &checkpoint_memory);
    m.def(
        "total_memory",
        [](const ModelSpec& model, const ParallelConfig& config) {
            return total_memory(model, config);
        },
        py::arg("model"), py::arg("config"));
    m.def(
        "feasible",
        [](const ModelSpec& model, const ParallelConfig& config,
           const ClusterSpec& cluster, double headroom) {
            MemoryOptions opts;
            opts.headroom = headroom;
            return feasible(model, config, cluster, opts);
        },
        py::arg("model"), py::arg("config"), py::arg("cluster"),
        py::arg("headroom") = 0.85);

    m.def("dp_intensity", &dp_intensity);
    m.def("pp_intensity", &pp_intensity);
    m.def("tp_intensity", [](const ModelSpec& model, const ParallelConfig& c) {
        const TpIntensity ti = tp_intensity(model, c);
        return std::make_pair(ti.total, ti.blocking);
    });
    m.def("overhead_estimate", &overhead_estimate);
    m.def("beta_net", &beta_net);
    m.def(
        "assess_network",
        [](const ModelSpec& model, const ParallelConfig& config,
           const ClusterSpec& cluster, double margin) {
            NetworkOptions opts;
            opts.margin = margin;
            return assess_network(model, config, cluster, opts);
        },
        py::arg("model"), py::arg("config"), py::arg("cluster"),
        py::arg("margin") = 10.0);

    m.def("place_stages", &place_stages);
    m.def("build_tasks", &build_tasks);
    m.def("simulate", py::overload_cast<const TaskGraph&, const TimingModel&>(
                          &simulate));
    m.def("simulate_config", &simulate_config, py::arg("model"),
          py::arg("config"), py::arg("timing"));
    m.def("bubble_fraction", &bubble_fraction);
    m.def("peak_inflight", &peak_inflight);
    m.def("accumulation_timeline", &accumulation_timeline);

    m.def("throughput", &throughput);
    m.def("sample_overhead", &sample_overhead);
    m.def("estimate_noise_scale", &estimate_noise_scale);
    m.def("method_profile", &method_profile);
    m.def("chimera_profile", &chimera_profile);
    py::enum_<FrontierObjective>(m, "FrontierObjective")
        .value("MinTime", FrontierObjective::MinTime)
        .value("MinCost", FrontierObjective::MinCost);
    m.def("tradeoff_curve", &tradeoff_curve, py::arg("perf_points"),
          py::arg("model"), py::arg("cluster_sizes"), py::arg("b_crit"),
          py::arg("base_samples") = -1.0,
          py::arg("objective") = FrontierObjective::MinTime);

    m.def("enumerate_configs", &enumerate_configs);
    m.def("analytic_score", &analytic_score, py::arg("model"), py::arg("config"),
          py::arg("cluster"), py::arg("opts") = NetworkOptions{});
    m.def("simulate_score", &simulate_score);
    m.def(
        "rank_configs",
        [](const std::vector<ParallelConfig>& configs, const ModelSpec& model,
           const ClusterSpec& cluster, Scoring scoring) {
            return rank_configs(configs, model, cluster, scoring);
        },
        py::arg("configs"), py::arg("model"), py::arg("cluster"),
        py::arg("scoring"));
    m.def(
        "best_table",
        [](const SearchSpace& space, const ModelSpec& model,
           const ClusterSpec& cluster) { return best_table(space, model, cluster); },
        py::arg("space"), py::arg("model"), py::arg("cluster"));

    m.def("chrome_trace_json", &chrome_trace_json);
    m.def("gantt_svg", &gantt_svg);
    m.def("best_table_csv", &best_table_csv);
    m.def("tradeoff_csv", &tradeoff_csv);
}
