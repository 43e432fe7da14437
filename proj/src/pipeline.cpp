#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "neuromap/errors.hpp"
#include "neuromap/log.hpp"
#include "neuromap/noc_sim.hpp"
#include "neuromap/pipeline.hpp"
#include "text_io.hpp"

namespace neuromap
{

Workload load_workload(const fs::path &network, const fs::path &trace)
{
    Workload w;
    w.graph = load_network(network);
    w.trace = load_trace(trace, w.graph);
    // Throws when the weights disagree with the trace.
    (void)derive_synapse_trace(w.graph, w.trace);
    return w;
}

GenerateResult cmd_generate(const TopologySpec &spec, std::uint64_t seed, const fs::path &out)
{
    auto [graph, trace] = generate_synthetic(spec, seed);
    GenerateResult result;
    result.network_path = out / files::network;
    result.trace_path = out / files::trace;
    save_network(result.network_path, graph);
    save_trace(result.trace_path, trace);
    result.workload = {std::move(graph), std::move(trace)};
    log().info("generated {} neurons, {} synapses, {} spikes", result.workload.graph.neuron_count(),
            result.workload.graph.synapse_count(), result.workload.trace.size());
    return result;
}

std::string partition_report_line(const PartitionResult &result, PartitionerKind kind)
{
    std::ostringstream line;
    line << "k=" << result.partition.cluster_count() << " n_c=" << result.partition.capacity()
         << " kind=" << to_string(kind) << " gs=" << result.gs
         << " baseline_fill_gs=" << result.baseline_gs;
    return line.str();
}

PartitionResult cmd_partition(const Workload &workload, std::size_t n_c, PartitionerKind kind,
        std::uint64_t seed, const ClusterOptions &options, const fs::path &out)
{
    PartitionResult result;
    result.partition = make_partition(workload.graph, n_c, kind, seed, options);
    result.gs = global_spike_count(workload.graph, result.partition);
    const Partition fill = partition_baseline(workload.graph, n_c, PartitionerKind::Fill, seed);
    result.baseline_gs = global_spike_count(workload.graph, fill);

    save_partition(out / files::partition, result.partition, result.gs);
    auto report = text::open_output(out / files::partition_report);
    report << partition_report_line(result, kind) << '\n';
    return result;
}

PlaceResult cmd_place(const Workload &workload, const Partition &partition,
        const HardwareConfig &hw, const PsoConfig &pso, const fs::path &out)
{
    const SynapseTrace trace = derive_synapse_trace(workload.graph, workload.trace);
    const PlacementProblem problem(partition, trace, hw);
    PlaceResult result;
    result.pso = run_pso(problem, pso);
    result.placement = result.pso.mapping.placement();

    save_mapping(out / files::mapping, result.pso.mapping, hw, result.pso.fitness,
            pso.n_iso, pso.seed);
    auto history = text::open_output(out / files::fitness_history);
    history << "iteration,g_best_fitness\n";
    for (std::size_t i = 0; i < result.pso.history.size(); ++i)
    {
        history << i << ',' << format_real(result.pso.history[i]) << '\n';
    }
    log().info("placement fitness {}", format_real(result.pso.fitness));
    return result;
}

namespace
{

void write_summary(std::ostream &out, const MetricSummary &s)
{
    out << "n_s=" << s.n_s << '\n'
        << "avg_latency=" << format_real(s.avg_latency) << '\n'
        << "formula_latency=" << format_real(s.formula_latency) << '\n'
        << "max_latency=" << s.max_latency << '\n'
        << "total_energy_pj=" << format_real(s.total_energy_pj) << '\n'
        << "isi_distortion_abs=" << format_real(s.isi_distortion_abs) << '\n'
        << "isi_distortion_signed=" << format_real(s.isi_distortion_signed) << '\n'
        << "spike_disorder=" << format_real(s.spike_disorder) << '\n'
        << "spike_disorder_degenerate=" << (s.spike_disorder_degenerate ? 1 : 0) << '\n';
}

} // namespace

SimulateResult cmd_simulate(const Workload &workload, const Partition &partition,
        const MappingMatrix &mapping, const HardwareConfig &hw, const fs::path &out)
{
    const SynapseTrace trace = derive_synapse_trace(workload.graph, workload.trace);
    const TrafficPlan plan(partition, trace, hw);
    const auto placement = mapping.placement();
    SimulateResult result;
    result.report = simulate_plan(plan, placement, hw);
    result.summary = summarize(trace, result.report, hw);

    auto packets = text::open_output(out / files::packets);
    write_packets(packets, result.report);
    auto links = text::open_output(out / files::links);
    write_link_utilization(links, result.report);
    auto summary = text::open_output(out / files::summary);
    write_summary(summary, result.summary);
    auto metrics = text::open_output(out / files::metrics);
    write_metrics_json(metrics, result.summary);
    auto isi = text::open_output(out / files::isi);
    write_isi_csv(isi, isi_distortion(trace, result.report));
    return result;
}

std::vector<ExploreRow> explore_routing(const SynapseTrace &trace, const TrafficPlan &plan,
        const std::vector<std::size_t> &placement, const HardwareConfig &hw)
{
    std::vector<ExploreRow> rows;
    for (RoutingKind kind : all_routing_kinds)
    {
        HardwareConfig variant = hw;
        variant.routing = kind;
        SimOptions options;
        options.record_paths = true;
        const SimReport report = simulate_plan(plan, placement, variant, options);

        ExploreRow row;
        row.kind = kind;
        row.summary = summarize(trace, report, variant);
        for (std::size_t p = 0; p < report.packets.size(); ++p)
        {
            const SpikePacket &packet = report.packets[p];
            const auto &path = report.paths[p];
            ++row.paths_checked;
            const std::string problem = check_path(path, packet.src, packet.dst, kind);
            if (!problem.empty())
            {
                ++row.violations;
                log().warn("{} path for packet {}: {}", to_string(kind), p, problem);
            }
            const auto expected = static_cast<std::size_t>(manhattan(packet.src, packet.dst)) + 1;
            if (kind == RoutingKind::XY && hop_count(path) != expected)
            {
                ++row.hop_mismatches;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

void write_explore_csv(std::ostream &out, const std::vector<ExploreRow> &rows)
{
    out << "kind,avg_latency,energy,isi_distortion,isi_distortion_signed,spike_disorder,"
           "paths_checked,violations\n";
    for (const ExploreRow &row : rows)
    {
        out << to_string(row.kind) << ',' << format_real(row.summary.avg_latency) << ','
            << format_real(row.summary.total_energy_pj) << ','
            << format_real(row.summary.isi_distortion_abs) << ','
            << format_real(row.summary.isi_distortion_signed) << ','
            << format_real(row.summary.spike_disorder) << ',' << row.paths_checked << ','
            << row.violations << '\n';
    }
}

std::vector<ExploreRow> cmd_explore(const Workload &workload, const Partition &partition,
        const MappingMatrix &mapping, const HardwareConfig &hw, const fs::path &out)
{
    const SynapseTrace trace = derive_synapse_trace(workload.graph, workload.trace);
    const TrafficPlan plan(partition, trace, hw);
    const auto rows = explore_routing(trace, plan, mapping.placement(), hw);
    auto csv = text::open_output(out / files::explore);
    write_explore_csv(csv, rows);
    return rows;
}

void RunManifest::validate() const
{
    if (topology && (network || trace))
    {
        throw ValidationError("manifest names both a topology and input files");
    }
    if (!topology)
    {
        if (!network || !trace)
        {
            throw ValidationError("manifest needs a topology or both network and trace");
        }
        for (const fs::path &p : {*network, *trace})
        {
            if (!fs::exists(p))
            {
                throw ValidationError("manifest input does not exist: " + p.string());
            }
        }
    }
    hardware.validate();
    pso.validate();
}

namespace
{

// Config objects travel through the key=value readers so that the manifest
// accepts exactly what the config files accept.
nlohmann::ordered_json config_object(const std::string &text)
{
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
    {
        const auto eq = line.find('=');
        if (eq != std::string::npos)
        {
            obj[line.substr(0, eq)] = line.substr(eq + 1);
        }
    }
    return obj;
}

std::string config_text(const nlohmann::json &obj, const char *what)
{
    if (!obj.is_object())
    {
        throw ValidationError(std::string("manifest field '") + what + "' must be an object");
    }
    std::ostringstream text;
    for (const auto &[key, value] : obj.items())
    {
        text << key << '=' << (value.is_string() ? value.get<std::string>() : value.dump())
             << '\n';
    }
    return text.str();
}

} // namespace

RunManifest read_manifest(std::istream &in)
{
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::parse_error &e)
    {
        throw ValidationError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!j.is_object())
    {
        throw ValidationError("manifest must be a JSON object");
    }
    static const std::vector<std::string> known = {"topology", "network", "trace", "hardware",
            "partitioner", "sweep_until_stable", "pso", "seed", "out_dir", "explore"};
    for (const auto &item : j.items())
    {
        if (std::find(known.begin(), known.end(), item.key()) == known.end())
        {
            throw ValidationError("unknown manifest field '" + item.key() + "'");
        }
    }

    RunManifest m;
    try
    {
        if (j.contains("topology"))
        {
            m.topology = j.at("topology").get<std::string>();
        }
        if (j.contains("network"))
        {
            m.network = j.at("network").get<std::string>();
        }
        if (j.contains("trace"))
        {
            m.trace = j.at("trace").get<std::string>();
        }
        if (j.contains("hardware"))
        {
            std::istringstream text(config_text(j.at("hardware"), "hardware"));
            m.hardware = read_hardware_config(text);
        }
        if (j.contains("partitioner"))
        {
            m.partitioner = parse_partitioner_kind(j.at("partitioner").get<std::string>());
        }
        m.sweep_until_stable = j.value("sweep_until_stable", m.sweep_until_stable);
        if (j.contains("pso"))
        {
            std::istringstream text(config_text(j.at("pso"), "pso"));
            m.pso = read_pso_config(text);
        }
        m.seed = j.value("seed", m.seed);
        if (j.contains("out_dir"))
        {
            m.out_dir = j.at("out_dir").get<std::string>();
        }
        m.explore = j.value("explore", m.explore);
    }
    catch (const nlohmann::json::exception &e)
    {
        throw ValidationError(std::string("bad manifest field: ") + e.what());
    }
    return m;
}

RunManifest load_manifest(const fs::path &path)
{
    auto in = text::open_input(path);
    return read_manifest(in);
}

void write_manifest(std::ostream &out, const RunManifest &m)
{
    nlohmann::ordered_json j;
    if (m.topology)
    {
        j["topology"] = *m.topology;
    }
    if (m.network)
    {
        j["network"] = m.network->generic_string();
    }
    if (m.trace)
    {
        j["trace"] = m.trace->generic_string();
    }
    std::ostringstream hw;
    write_hardware_config(hw, m.hardware);
    j["hardware"] = config_object(hw.str());
    j["partitioner"] = to_string(m.partitioner);
    j["sweep_until_stable"] = m.sweep_until_stable;
    std::ostringstream pso;
    write_pso_config(pso, m.pso);
    j["pso"] = config_object(pso.str());
    j["seed"] = m.seed;
    j["out_dir"] = m.out_dir.generic_string();
    j["explore"] = m.explore;
    out << j.dump(2) << '\n';
}

PipelineResult cmd_pipeline(const RunManifest &manifest)
{
    manifest.validate();
    const fs::path &out = manifest.out_dir;
    fs::create_directories(out);
    {
        auto file = text::open_output(out / files::manifest);
        write_manifest(file, manifest);
    }

    PipelineResult result;
    if (manifest.topology)
    {
        result.workload =
                cmd_generate(named_topology(*manifest.topology), manifest.seed, out).workload;
    }
    else
    {
        result.workload = load_workload(*manifest.network, *manifest.trace);
    }

    ClusterOptions options;
    options.sweep_until_stable = manifest.sweep_until_stable;
    result.partition = cmd_partition(result.workload, manifest.hardware.n_c,
            manifest.partitioner, manifest.seed, options, out);
    log().info("{}", partition_report_line(result.partition, manifest.partitioner));

    result.place = cmd_place(
            result.workload, result.partition.partition, manifest.hardware, manifest.pso, out);
    result.simulate = cmd_simulate(result.workload, result.partition.partition,
            result.place.pso.mapping, manifest.hardware, out);
    if (manifest.explore)
    {
        result.explore = cmd_explore(result.workload, result.partition.partition,
                result.place.pso.mapping, manifest.hardware, out);
    }
    return result;
}

} // namespace neuromap
