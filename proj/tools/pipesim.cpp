// Command-line front door: reads a JSON run spec, dispatches to the model,
// simulator and search modules, writes tables, traces and plots.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "pipesim/config_io.hpp"
#include "pipesim/report.hpp"
#include "pipesim/schedule.hpp"
#include "pipesim/search.hpp"
#include "pipesim/simulate.hpp"

namespace fs = std::filesystem;
using namespace pipesim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidSpec = 2;
constexpr int kExitEmptyResult = 3;
constexpr int kExitSimError = 4;

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SpecError("cannot write '" + path.string() + "'");
    out << content;
    std::cout << "wrote " << path.string() << "\n";
}

fs::path prepare_out_dir(const RunSpec& rs) {
    fs::path dir(rs.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec && !fs::is_directory(dir))
        throw SpecError("cannot create output directory '" + rs.out_dir + "'");
    return dir;
}

bool wants(const RunSpec& rs, const char* format) {
    return rs.formats.count(format) > 0;
}

int run_analyze(const RunSpec& rs) {
    if (!rs.config)
        throw SpecError("analyze: the spec file needs a 'config' section");
    const AnalysisReport report =
        analyze_config(rs.model, rs.cluster, *rs.config, rs.memory, rs.network);
    const fs::path dir = prepare_out_dir(rs);
    if (wants(rs, "text")) write_file(dir / "analysis.txt", analysis_text(report));
    if (wants(rs, "csv")) write_file(dir / "analysis.csv", analysis_csv(report));
    std::cout << analysis_text(report);
    return kExitOk;
}

int run_simulate(const RunSpec& rs) {
    if (!rs.config)
        throw SpecError("simulate: the spec file needs a 'config' section");
    const ParallelConfig& config = *rs.config;
    config.validate(rs.model, rs.cluster);
    const StagePlacement placement = place_stages(rs.model, config);
    const TaskGraph graph = build_tasks(rs.model, config, placement);
    const TimingModel timing =
        rs.timing ? *rs.timing
                  : TimingModel::derive(rs.model, config, rs.cluster, rs.recompute);
    const Timeline timeline = simulate(graph, timing);

    SimulationSummary summary;
    summary.makespan = timeline.makespan;
    summary.bubble = bubble_fraction(timeline);
    const PerfPoint perf = throughput(rs.model, config, timeline, rs.cluster);
    summary.throughput = perf.throughput;
    summary.utilization = perf.utilization;
    for (const count_t peak : peak_inflight(timeline, graph, placement))
        summary.peak_inflight_layers =
            std::max(summary.peak_inflight_layers, peak);

    const fs::path dir = prepare_out_dir(rs);
    if (wants(rs, "text"))
        write_file(dir / "summary.txt", summary_text(summary, timeline));
    if (wants(rs, "trace"))
        write_file(dir / "trace.json", chrome_trace_json(timeline, graph));
    if (wants(rs, "svg"))
        write_file(dir / "gantt.svg", gantt_svg(timeline, graph));
    std::cout << summary_text(summary, timeline);
    return kExitOk;
}

int run_search(const RunSpec& rs) {
    if (!rs.space)
        throw SpecError("search: the spec file needs a 'space' section");
    SearchOptions opts;
    opts.memory = rs.memory;
    opts.network = rs.network;
    opts.threads = 0;
    if (const char* env = std::getenv("PIPESIM_THREADS"))
        opts.threads = std::max(1, std::atoi(env));
    const BestTable table = best_table(*rs.space, rs.model, rs.cluster, opts);
    for (const auto& [schedule, batch] : table.empty_cells)
        std::cerr << "warning: no feasible configuration for method "
                  << to_string(schedule) << " at batch size " << batch << "\n";
    if (table.rows.empty()) {
        std::cerr << "pipesim: error[empty-result]: every (method, batch size) "
                     "cell of the search space is infeasible\n";
        return kExitEmptyResult;
    }
    const fs::path dir = prepare_out_dir(rs);
    write_file(dir / "results.csv", best_table_csv(table, rs.cluster));
    return kExitOk;
}

int run_tradeoff(const RunSpec& rs) {
    if (rs.b_crit <= 0)
        throw SpecError("tradeoff: b_crit must be given and positive");
    std::vector<PerfPoint> points = rs.points;
    if (!rs.points_file.empty()) {
        const auto extra = read_perf_points_csv(rs.points_file);
        points.insert(points.end(), extra.begin(), extra.end());
    }
    if (points.empty())
        throw SpecError(
            "tradeoff: no performance points (use run.points or run.points_file)");

    std::vector<count_t> sizes = rs.cluster_sizes;
    if (sizes.empty())
        for (count_t n = rs.cluster.n_gpu(); n <= rs.cluster.n_gpu() * 1024;
             n *= 2)
            sizes.push_back(n);

    const TradeoffCurve frontier = tradeoff_curve(
        points, rs.model, sizes, rs.b_crit, rs.base_samples, rs.objective);

    const fs::path dir = prepare_out_dir(rs);
    write_file(dir / "tradeoff.csv", tradeoff_csv(frontier));
    if (wants(rs, "svg")) {
        std::map<Schedule, std::vector<PerfPoint>> by_schedule;
        for (const PerfPoint& p : points)
            by_schedule[p.config.schedule].push_back(p);
        std::vector<std::pair<Schedule, TradeoffCurve>> curves;
        for (const auto& [schedule, pts] : by_schedule)
            curves.push_back(
                {schedule, tradeoff_curve(pts, rs.model, sizes, rs.b_crit,
                                          rs.base_samples, rs.objective)});
        write_file(dir / "tradeoff.svg", tradeoff_svg(curves));
    }
    std::cout << "base_samples " << format_number(frontier.base_samples, 0)
              << " base_tokens " << format_number(frontier.base_tokens, 0)
              << "\n";
    return kExitOk;
}

int run_noise_scale(const RunSpec& rs) {
    if (rs.gradients_file.empty())
        throw SpecError("noise-scale: run.gradients_file is required");
    const auto gradients = read_gradients(rs.gradients_file);
    const NoiseScaleEstimate est = estimate_noise_scale(gradients);
    const std::size_t dim = gradients.empty() ? 0 : gradients.front().size();
    const fs::path dir = prepare_out_dir(rs);
    if (wants(rs, "text"))
        write_file(dir / "noise_scale.txt",
                   noise_scale_text(est, gradients.size(), dim));
    if (wants(rs, "csv"))
        write_file(dir / "noise_scale.csv",
                   noise_scale_csv(est, gradients.size(), dim));
    std::cout << noise_scale_text(est, gradients.size(), dim);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"analytic model and schedule simulator for pipeline/data/"
                 "tensor-parallel transformer training"};
    app.require_subcommand(1);

    std::string spec_path;
    RunOverrides overrides;
    std::string out_dir, formats, preset_model, preset_cluster;
    std::uint64_t seed = 0;
    bool seed_given = false;

    const std::map<std::string, int (*)(const RunSpec&)> handlers = {
        {"analyze", run_analyze},     {"simulate", run_simulate},
        {"search", run_search},       {"tradeoff", run_tradeoff},
        {"noise-scale", run_noise_scale},
    };
    for (const auto& [name, handler] : handlers) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--spec", spec_path, "JSON run spec file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--format", formats,
                        "comma-separated formats: csv,trace,svg,text");
        sub->add_option("--preset-model", preset_model, "named model preset");
        sub->add_option("--preset-cluster", preset_cluster,
                        "named cluster preset");
        sub->add_option("--seed", seed, "seed for randomized helpers")
            ->each([&](const std::string&) { seed_given = true; });
    }

    CLI11_PARSE(app, argc, argv);

    const std::string command = app.get_subcommands().front()->get_name();
    overrides.command = command;
    if (!out_dir.empty()) overrides.out_dir = out_dir;
    if (!formats.empty()) overrides.formats = formats;
    if (!preset_model.empty()) overrides.model_preset = preset_model;
    if (!preset_cluster.empty()) overrides.cluster_preset = preset_cluster;
    if (seed_given) overrides.seed = seed;

    try {
        const RunSpec rs = parse_run_spec_file(spec_path, overrides);
        return handlers.at(command)(rs);
    } catch (const SimError& e) {
        std::cerr << "pipesim: error[simulation]: " << e.what() << "\n";
        return kExitSimError;
    } catch (const SpecError& e) {
        std::cerr << "pipesim: error[invalid-spec]: " << e.what() << "\n";
        return kExitInvalidSpec;
    } catch (const std::exception& e) {
        std::cerr << "pipesim: error[internal]: " << e.what() << "\n";
        return kExitSimError;
    }
}
