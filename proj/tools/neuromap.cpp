#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "neuromap/errors.hpp"
#include "neuromap/log.hpp"
#include "neuromap/pipeline.hpp"

namespace
{

using namespace neuromap;

enum ExitCode
{
    exit_ok = 0,
    exit_usage = 1,
    exit_validation = 2,
    exit_infeasible = 3,
};

struct HardwareFlags
{
    std::string file;
    std::string mesh;
    std::string routing;
    std::optional<std::size_t> n_c;

    void add(CLI::App &cmd)
    {
        cmd.add_option("--hw", file, "hardware config file (key=value)")->check(CLI::ExistingFile);
        cmd.add_option("--mesh", mesh, "mesh size WxH, or 'auto' for the smallest square");
        cmd.add_option("--routing", routing, "xy | northlast | westfirst");
        cmd.add_option("--n_c", n_c, "neurons per crossbar");
    }

    HardwareConfig resolve(std::size_t clusters) const
    {
        HardwareConfig hw = file.empty() ? HardwareConfig{} : load_hardware_config(file);
        if (mesh == "auto")
        {
            hw.mesh_width = hw.mesh_height = square_mesh_side(clusters);
        }
        else if (!mesh.empty())
        {
            std::istringstream text("mesh=" + mesh);
            hw = read_hardware_config(text, hw);
        }
        if (!routing.empty())
        {
            hw.routing = parse_routing_kind(routing);
        }
        if (n_c)
        {
            hw.n_c = *n_c;
        }
        hw.validate();
        return hw;
    }
};

struct PsoFlags
{
    std::string file;
    std::optional<std::size_t> n_p;
    std::optional<std::size_t> n_iso;
    std::optional<std::uint64_t> seed;
    std::string fitness;
    std::size_t jobs{1};

    void add(CLI::App &cmd)
    {
        cmd.add_option("--pso", file, "PSO config file (key=value)")->check(CLI::ExistingFile);
        cmd.add_option("--n_p", n_p, "particles");
        cmd.add_option("--n_iso", n_iso, "iterations");
        cmd.add_option("--seed", seed, "PSO seed");
        cmd.add_option("--fitness", fitness, "cycle | analytic");
        cmd.add_option("--jobs", jobs, "threads for fitness evaluation")->check(CLI::PositiveNumber);
    }

    PsoConfig resolve(PsoConfig cfg = {}) const
    {
        if (!file.empty())
        {
            cfg = load_pso_config(file, cfg);
        }
        std::ostringstream overrides;
        if (n_p)
        {
            overrides << "n_p=" << *n_p << '\n';
        }
        if (n_iso)
        {
            overrides << "n_iso=" << *n_iso << '\n';
        }
        if (seed)
        {
            overrides << "seed=" << *seed << '\n';
        }
        if (!fitness.empty())
        {
            overrides << "fitness=" << fitness << '\n';
        }
        std::istringstream in(overrides.str());
        cfg = read_pso_config(in, cfg);
        cfg.jobs = jobs;
        cfg.validate();
        return cfg;
    }
};

struct InputFlags
{
    std::string network;
    std::string trace;

    void add(CLI::App &cmd)
    {
        cmd.add_option("--network", network, "network CSV")->required()->check(CLI::ExistingFile);
        cmd.add_option("--trace", trace, "spike trace CSV")->required()->check(CLI::ExistingFile);
    }

    Workload load() const { return load_workload(network, trace); }
};

void print_summary(const MetricSummary &s)
{
    std::cout << "n_s=" << s.n_s << " avg_latency=" << format_real(s.avg_latency)
              << " total_energy_pj=" << format_real(s.total_energy_pj)
              << " isi_distortion=" << format_real(s.isi_distortion_abs)
              << " spike_disorder=" << format_real(s.spike_disorder) << '\n';
}

int run(int argc, char **argv)
{
    CLI::App app{"Partition, place and simulate spiking networks on a crossbar mesh"};
    app.require_subcommand(1);
    std::string out = "out";

    // generate
    auto *generate = app.add_subcommand("generate", "write a synthetic feedforward workload");
    std::string topology;
    std::vector<std::size_t> layers;
    std::optional<double> rate_hz;
    std::optional<double> duration_ms;
    std::uint64_t gen_seed = 1;
    generate->add_option("topology", topology, "named topology (see --list)");
    generate->add_option("--layers", layers, "custom layer sizes")->delimiter(',');
    generate->add_option("--rate", rate_hz, "firing rate in Hz");
    generate->add_option("--duration", duration_ms, "trace length in ms");
    generate->add_option("--seed", gen_seed, "RNG seed");
    generate->add_option("--out", out, "output directory");
    bool list = false;
    generate->add_flag("--list", list, "print the named topologies");

    // partition
    auto *partition = app.add_subcommand("partition", "cluster neurons into crossbars");
    InputFlags part_in;
    part_in.add(*partition);
    std::size_t part_n_c = 256;
    std::string kind_name = "greedy";
    std::uint64_t part_seed = 1;
    bool single_pass = false;
    partition->add_option("--n_c", part_n_c, "neurons per crossbar")->check(CLI::PositiveNumber);
    partition->add_option("--kind", kind_name, "greedy | fill | balance");
    partition->add_option("--seed", part_seed, "seed of the initial partition");
    auto *single = partition->add_flag(
            "--single-pass", single_pass, "one sweep over cluster pairs");
    partition->add_flag("--sweep-until-stable", "repeat sweeps until nothing improves (default)")
            ->excludes(single);
    partition->add_option("--out", out, "output directory");

    // place
    auto *place = app.add_subcommand("place", "place clusters on the mesh with PSO");
    InputFlags place_in;
    place_in.add(*place);
    std::string partition_file;
    place->add_option("--partition", partition_file, "partition CSV")
            ->required()
            ->check(CLI::ExistingFile);
    HardwareFlags place_hw;
    place_hw.add(*place);
    PsoFlags pso_flags;
    pso_flags.add(*place);
    place->add_option("--out", out, "output directory");

    // simulate and explore share their inputs
    struct SimFlags
    {
        InputFlags in;
        std::string partition;
        std::string mapping;
        HardwareFlags hw;
    };
    SimFlags sim_flags;
    SimFlags explore_flags;
    auto add_sim = [&out](CLI::App *cmd, SimFlags &flags) {
        flags.in.add(*cmd);
        cmd->add_option("--partition", flags.partition, "partition CSV")
                ->required()
                ->check(CLI::ExistingFile);
        cmd->add_option("--mapping", flags.mapping, "mapping CSV")
                ->required()
                ->check(CLI::ExistingFile);
        flags.hw.add(*cmd);
        cmd->add_option("--out", out, "output directory");
    };
    auto *simulate = app.add_subcommand("simulate", "run the placed workload on the mesh");
    add_sim(simulate, sim_flags);
    auto *explore = app.add_subcommand("explore", "compare routing algorithms");
    add_sim(explore, explore_flags);

    // pipeline
    auto *pipeline = app.add_subcommand("pipeline", "generate/partition/place/simulate/explore");
    std::string manifest_file;
    std::string pipe_topology;
    std::optional<std::uint64_t> pipe_seed;
    std::optional<std::string> pipe_out;
    std::size_t pipe_jobs = 1;
    pipeline->add_option("--manifest", manifest_file, "JSON run manifest")
            ->check(CLI::ExistingFile);
    pipeline->add_option("--topology", pipe_topology, "named topology to generate");
    pipeline->add_option("--seed", pipe_seed, "workload and partition seed");
    pipeline->add_option("--out", pipe_out, "output directory");
    pipeline->add_option("--jobs", pipe_jobs, "threads for fitness evaluation")
            ->check(CLI::PositiveNumber);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    if (generate->parsed())
    {
        if (list)
        {
            for (const std::string &name : named_topologies())
            {
                std::cout << name << '\n';
            }
            return exit_ok;
        }
        if (topology.empty() == layers.empty())
        {
            std::cerr << "generate: give either a topology name or --layers\n";
            return exit_usage;
        }
        TopologySpec spec = layers.empty() ? named_topology(topology) : TopologySpec{layers};
        if (rate_hz)
        {
            spec.rate_hz = {*rate_hz};
        }
        if (duration_ms)
        {
            spec.duration_ms = *duration_ms;
        }
        const GenerateResult r = cmd_generate(spec, gen_seed, out);
        std::cout << "neurons=" << r.workload.graph.neuron_count()
                  << " synapses=" << r.workload.graph.synapse_count()
                  << " spikes=" << r.workload.trace.size() << '\n';
    }
    else if (partition->parsed())
    {
        const PartitionerKind kind = parse_partitioner_kind(kind_name);
        ClusterOptions options;
        options.sweep_until_stable = !single_pass;
        const PartitionResult r =
                cmd_partition(part_in.load(), part_n_c, kind, part_seed, options, out);
        std::cout << partition_report_line(r, kind) << '\n';
    }
    else if (place->parsed())
    {
        const Workload w = place_in.load();
        const Partition p = load_partition(partition_file);
        const HardwareConfig hw = place_hw.resolve(p.cluster_count());
        const PlaceResult r = cmd_place(w, p, hw, pso_flags.resolve(), out);
        std::cout << "fitness=" << format_real(r.pso.fitness)
                  << " iterations=" << r.pso.history.size() << '\n';
    }
    else if (simulate->parsed() || explore->parsed())
    {
        const SimFlags &f = simulate->parsed() ? sim_flags : explore_flags;
        const Workload w = f.in.load();
        const Partition p = load_partition(f.partition);
        const HardwareConfig hw = f.hw.resolve(p.cluster_count());
        const MappingMatrix m = load_mapping(f.mapping, hw);
        if (simulate->parsed())
        {
            print_summary(cmd_simulate(w, p, m, hw, out).summary);
        }
        else
        {
            write_explore_csv(std::cout, cmd_explore(w, p, m, hw, out));
        }
    }
    else if (pipeline->parsed())
    {
        RunManifest manifest;
        if (!manifest_file.empty())
        {
            manifest = load_manifest(manifest_file);
        }
        if (!pipe_topology.empty())
        {
            manifest.topology = pipe_topology;
            manifest.network.reset();
            manifest.trace.reset();
        }
        if (manifest_file.empty() && pipe_topology.empty())
        {
            std::cerr << "pipeline: give --manifest or --topology\n";
            return exit_usage;
        }
        if (pipe_seed)
        {
            manifest.seed = *pipe_seed;
        }
        if (pipe_out)
        {
            manifest.out_dir = *pipe_out;
        }
        manifest.pso.jobs = pipe_jobs;
        const PipelineResult r = cmd_pipeline(manifest);
        std::cout << partition_report_line(r.partition, manifest.partitioner) << '\n';
        std::cout << "fitness=" << format_real(r.place.pso.fitness) << '\n';
        print_summary(r.simulate.summary);
    }
    return exit_ok;
}

} // namespace

int main(int argc, char **argv)
{
    try
    {
        return run(argc, argv);
    }
    catch (const neuromap::InfeasibleError &e)
    {
        neuromap::log().error("{}", e.what());
        return exit_infeasible;
    }
    catch (const neuromap::ParseError &e)
    {
        neuromap::log().error("{}", e.what());
        return exit_validation;
    }
    catch (const neuromap::ValidationError &e)
    {
        neuromap::log().error("{}", e.what());
        return exit_validation;
    }
    catch (const std::exception &e)
    {
        neuromap::log().error("{}", e.what());
        return exit_validation;
    }
}
