#include "pipesim/config_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pipesim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw SpecError(what); }

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

count_t get_count(const json& obj, const char* key, count_t fallback = -1) {
    if (const json* v = find(obj, key)) return v->get<count_t>();
    if (fallback < 0) fail(std::string("spec: missing field '") + key + "'");
    return fallback;
}

double get_double(const json& obj, const char* key, double fallback) {
    if (const json* v = find(obj, key)) return v->get<double>();
    return fallback;
}

ModelSpec parse_model(const json& j) {
    if (j.is_string()) return model_preset(j.get<std::string>());
    if (!j.is_object()) fail("spec: model must be a preset name or an object");
    ModelSpec m = ModelSpec::make(
        get_count(j, "n_layers"), get_count(j, "s_hidden"),
        get_count(j, "n_heads"), get_count(j, "s_seq"), get_count(j, "s_voc"),
        get_count(j, "s_mlp", 0), get_count(j, "s_head", 0));
    return m;
}

ClusterSpec parse_cluster(const json& j) {
    if (j.is_string()) return cluster_preset(j.get<std::string>());
    if (!j.is_object()) fail("spec: cluster must be a preset name or an object");
    ClusterSpec c;
    if (const json* base = find(j, "preset"))
        c = cluster_preset(base->get<std::string>());
    c.n_node = get_count(j, "n_node", c.n_node);
    c.s_node = get_count(j, "s_node", c.s_node);
    c.peak_flops = get_double(j, "peak_flops", c.peak_flops);
    c.bw_intra = get_double(j, "bw_intra", c.bw_intra);
    c.bw_inter = get_double(j, "bw_inter", c.bw_inter);
    c.pp_latency = get_double(j, "pp_latency", c.pp_latency);
    c.mem_capacity = get_double(j, "mem_capacity", c.mem_capacity);
    c.kernel_efficiency = get_double(j, "kernel_efficiency", c.kernel_efficiency);
    c.validate();
    return c;
}

ParallelConfig parse_config(const json& j, const ClusterSpec& cluster) {
    if (!j.is_object()) fail("spec: config must be an object");
    ParallelConfig c;
    c.n_tp = get_count(j, "n_tp", 1);
    c.n_pp = get_count(j, "n_pp", 1);
    c.n_mb = get_count(j, "n_mb", 1);
    c.s_mb = get_count(j, "s_mb", 1);
    c.n_loop = get_count(j, "n_loop", 1);
    if (const json* v = find(j, "dp_variant"))
        c.dp_variant = dp_variant_from_string(v->get<std::string>());
    if (const json* v = find(j, "schedule"))
        c.schedule = schedule_from_string(v->get<std::string>());
    if (const json* v = find(j, "n_dp")) {
        c.n_dp = v->get<count_t>();
    } else {
        const count_t split = c.n_tp * c.n_pp;
        if (split <= 0 || cluster.n_gpu() % split != 0)
            fail("spec: n_dp not given and n_tp * n_pp does not divide the "
                 "cluster size");
        c.n_dp = cluster.n_gpu() / split;
    }
    return c;
}

template <typename T, typename F>
std::set<T> parse_set(const json& j, const char* key, F&& convert,
                      std::set<T> fallback) {
    const json* v = find(j, key);
    if (!v) return fallback;
    std::set<T> out;
    for (const json& item : *v) out.insert(convert(item));
    return out;
}

SearchSpace parse_space(const json& j, const ModelSpec& model,
                        const ClusterSpec& cluster) {
    if (!j.is_object()) fail("spec: space must be an object");
    SearchSpace s;
    auto as_count = [](const json& v) { return v.get<count_t>(); };

    std::set<count_t> powers_of_two;
    for (count_t v = 1; v <= cluster.n_gpu(); v *= 2) powers_of_two.insert(v);
    std::set<count_t> loops;
    for (count_t v = 1; v <= model.n_layers; v *= 2) loops.insert(v);

    s.schedules = parse_set<Schedule>(
        j, "schedules",
        [](const json& v) { return schedule_from_string(v.get<std::string>()); },
        {Schedule::NoPipeline, Schedule::GPipe, Schedule::OneFOneB,
         Schedule::DepthFirst, Schedule::BreadthFirst});
    s.dp_variants = parse_set<DpVariant>(
        j, "dp_variants",
        [](const json& v) { return dp_variant_from_string(v.get<std::string>()); },
        {DpVariant::DP0, DpVariant::DP_PS, DpVariant::DP_FS});
    s.n_pp_choices = parse_set<count_t>(j, "n_pp", as_count, powers_of_two);
    s.n_tp_choices = parse_set<count_t>(
        j, "n_tp", as_count, [&] {
            std::set<count_t> tp;
            for (count_t v = 1; v <= cluster.s_node; v *= 2) tp.insert(v);
            return tp;
        }());
    s.s_mb_choices = parse_set<count_t>(
        j, "s_mb", as_count, {1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48});
    s.n_mb_choices = parse_set<count_t>(j, "n_mb", as_count, [&] {
        std::set<count_t> mb;
        for (count_t v = 1; v <= 32; ++v) mb.insert(v);
        for (count_t v = 32; v <= 4 * cluster.n_gpu(); v *= 2) {
            mb.insert(v);
            mb.insert(3 * v / 2);
        }
        return mb;
    }());
    s.n_loop_choices = parse_set<count_t>(j, "n_loop", as_count, loops);
    s.batch_sizes = parse_set<count_t>(j, "batch_sizes", as_count, {});
    if (s.batch_sizes.empty())
        fail("spec: space.batch_sizes must list at least one batch size");
    if (const json* v = find(j, "scoring"))
        s.scoring = scoring_from_string(v->get<std::string>());
    return s;
}

TimingModel parse_timing(const json& j) {
    TimingModel t;
    t.t_fwd_stage = get_double(j, "t_fwd_stage", t.t_fwd_stage);
    t.bwd_ratio = get_double(j, "bwd_ratio", t.bwd_ratio);
    t.t_pp_transfer = get_double(j, "t_pp_transfer", t.t_pp_transfer);
    t.pp_latency = get_double(j, "pp_latency", t.pp_latency);
    t.t_dp_reduce_stage = get_double(j, "t_dp_reduce_stage", t.t_dp_reduce_stage);
    t.t_dp_reconstruct_stage =
        get_double(j, "t_dp_reconstruct_stage", t.t_dp_reconstruct_stage);
    t.validate();
    return t;
}

std::set<std::string> split_formats(const std::string& s) {
    std::set<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.insert(item);
    return out;
}

} // namespace

RunSpec parse_run_spec_text(const std::string& text, const RunOverrides& ov) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(std::string("spec: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) fail("spec: top level must be an object");

    RunSpec rs;
    if (const json* v = find(j, "command")) rs.command = v->get<std::string>();
    if (ov.command) rs.command = *ov.command;
    if (rs.command.empty()) fail("spec: no command given");

    if (ov.model_preset)
        rs.model = model_preset(*ov.model_preset);
    else if (const json* v = find(j, "model"))
        rs.model = parse_model(*v);
    else
        fail("spec: missing model (inline or preset)");

    if (ov.cluster_preset)
        rs.cluster = cluster_preset(*ov.cluster_preset);
    else if (const json* v = find(j, "cluster"))
        rs.cluster = parse_cluster(*v);
    else
        fail("spec: missing cluster (inline or preset)");

    if (const json* v = find(j, "config"))
        rs.config = parse_config(*v, rs.cluster);
    if (const json* v = find(j, "space"))
        rs.space = parse_space(*v, rs.model, rs.cluster);

    if (const json* run = find(j, "run")) {
        rs.out_dir = run->value("out_dir", rs.out_dir);
        if (const json* v = find(*run, "formats")) {
            rs.formats.clear();
            for (const json& f : *v) rs.formats.insert(f.get<std::string>());
        }
        rs.memory.dp0_bytes_per_param =
            get_double(*run, "dp0_bytes_per_param", rs.memory.dp0_bytes_per_param);
        rs.memory.headroom = get_double(*run, "headroom", rs.memory.headroom);
        rs.network.margin = get_double(*run, "margin", rs.network.margin);
        rs.network.beta_net_override =
            get_double(*run, "beta_net", rs.network.beta_net_override);
        if (const json* v = find(*run, "timing")) rs.timing = parse_timing(*v);
        rs.recompute = run->value("recompute", rs.recompute);
        rs.b_crit = get_double(*run, "b_crit", rs.b_crit);
        rs.base_samples = get_double(*run, "base_samples", rs.base_samples);
        if (const json* v = find(*run, "cluster_sizes"))
            for (const json& n : *v) rs.cluster_sizes.push_back(n.get<count_t>());
        if (const json* v = find(*run, "objective")) {
            const std::string o = v->get<std::string>();
            if (o == "min_time")
                rs.objective = FrontierObjective::MinTime;
            else if (o == "min_cost")
                rs.objective = FrontierObjective::MinCost;
            else
                fail("spec: objective must be min_time or min_cost");
        }
        if (const json* v = find(*run, "points"))
            for (const json& p : *v) {
                PerfPoint pt;
                pt.beta = p.at("beta").get<double>();
                pt.throughput = p.at("throughput_tflops").get<double>() * 1e12;
                if (const json* sch = find(p, "schedule"))
                    pt.config.schedule =
                        schedule_from_string(sch->get<std::string>());
                rs.points.push_back(pt);
            }
        rs.points_file = run->value("points_file", rs.points_file);
        rs.gradients_file = run->value("gradients_file", rs.gradients_file);
        rs.seed = run->value("seed", rs.seed);
    }
    if (ov.out_dir) rs.out_dir = *ov.out_dir;
    if (ov.formats) rs.formats = split_formats(*ov.formats);
    if (ov.seed) rs.seed = *ov.seed;
    return rs;
}

RunSpec parse_run_spec_file(const std::string& path, const RunOverrides& ov) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("spec: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_spec_text(buf.str(), ov);
}

std::vector<PerfPoint> read_perf_points_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("points: cannot open '" + path + "'");
    std::vector<PerfPoint> points;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string beta_s, thr_s, sched_s;
        std::getline(ss, beta_s, ',');
        std::getline(ss, thr_s, ',');
        std::getline(ss, sched_s, ',');
        try {
            PerfPoint p;
            p.beta = std::stod(beta_s);
            p.throughput = std::stod(thr_s) * 1e12;
            if (!sched_s.empty())
                p.config.schedule = schedule_from_string(sched_s);
            points.push_back(p);
        } catch (const std::invalid_argument&) {
            continue; // header row
        }
    }
    if (points.empty()) fail("points: no usable rows in '" + path + "'");
    return points;
}

std::vector<std::vector<double>> read_gradients(const std::string& path) {
    const bool csv = path.size() > 4 && path.substr(path.size() - 4) == ".csv";
    if (csv) {
        std::ifstream in(path);
        if (!in) fail("gradients: cannot open '" + path + "'");
        std::vector<std::vector<double>> samples;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::vector<double> row;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
            samples.push_back(std::move(row));
        }
        return samples;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("gradients: cannot open '" + path + "'");
    std::uint64_t n = 0, dim = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    in.read(reinterpret_cast<char*>(&dim), sizeof dim);
    if (!in) fail("gradients: truncated header in '" + path + "'");
    if (n == 0 || dim == 0 || n > (1u << 24) || dim > (1u << 24))
        fail("gradients: implausible header in '" + path + "'");
    std::vector<std::vector<double>> samples(
        n, std::vector<double>(static_cast<std::size_t>(dim)));
    for (auto& row : samples) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(dim * sizeof(double)));
        if (!in) fail("gradients: truncated data in '" + path + "'");
    }
    return samples;
}

} // namespace pipesim
