#ifndef NEUROMAP_PIPELINE_HPP
#define NEUROMAP_PIPELINE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "neuromap/hardware.hpp"
#include "neuromap/metrics.hpp"
#include "neuromap/partition.hpp"
#include "neuromap/placer.hpp"
#include "neuromap/snn.hpp"

namespace neuromap
{

namespace fs = std::filesystem;

// Output file names, relative to a command's output directory.
namespace files
{
inline constexpr const char *network = "network.csv";
inline constexpr const char *trace = "trace.csv";
inline constexpr const char *partition = "partition.csv";
inline constexpr const char *partition_report = "partition_report.txt";
inline constexpr const char *mapping = "mapping.csv";
inline constexpr const char *fitness_history = "fitness_history.csv";
inline constexpr const char *packets = "packets.csv";
inline constexpr const char *links = "links.csv";
inline constexpr const char *summary = "summary.txt";
inline constexpr const char *metrics = "metrics.json";
inline constexpr const char *isi = "isi.csv";
inline constexpr const char *explore = "explore.csv";
inline constexpr const char *manifest = "manifest.json";
} // namespace files

struct Workload
{
    SnnGraph graph;
    SpikeTrace trace;
};

// Loads a network and its trace and checks that they agree.
Workload load_workload(const fs::path &network, const fs::path &trace);

struct GenerateResult
{
    Workload workload;
    fs::path network_path;
    fs::path trace_path;
};

GenerateResult cmd_generate(const TopologySpec &spec, std::uint64_t seed, const fs::path &out);

struct PartitionResult
{
    Partition partition;
    std::uint64_t gs{0};
    std::uint64_t baseline_gs{0};
};

// One line: `k=<k> n_c=<n_c> kind=<kind> gs=<gs> baseline_fill_gs=<gs>`.
std::string partition_report_line(const PartitionResult &result, PartitionerKind kind);

PartitionResult cmd_partition(const Workload &workload, std::size_t n_c, PartitionerKind kind,
        std::uint64_t seed, const ClusterOptions &options, const fs::path &out);

struct PlaceResult
{
    PsoResult pso;
    std::vector<std::size_t> placement;
};

PlaceResult cmd_place(const Workload &workload, const Partition &partition,
        const HardwareConfig &hw, const PsoConfig &pso, const fs::path &out);

struct SimulateResult
{
    SimReport report;
    MetricSummary summary;
};

SimulateResult cmd_simulate(const Workload &workload, const Partition &partition,
        const MappingMatrix &mapping, const HardwareConfig &hw, const fs::path &out);

struct ExploreRow
{
    RoutingKind kind{RoutingKind::XY};
    MetricSummary summary;
    std::size_t paths_checked{0};
    // Paths rejected by check_path.
    std::size_t violations{0};
    // XY only: paths whose hop count differs from manhattan + 1.
    std::size_t hop_mismatches{0};
};

// Same placed workload under every routing kind, with path checks.
std::vector<ExploreRow> explore_routing(const SynapseTrace &trace, const TrafficPlan &plan,
        const std::vector<std::size_t> &placement, const HardwareConfig &hw);

void write_explore_csv(std::ostream &out, const std::vector<ExploreRow> &rows);

std::vector<ExploreRow> cmd_explore(const Workload &workload, const Partition &partition,
        const MappingMatrix &mapping, const HardwareConfig &hw, const fs::path &out);

struct RunManifest
{
    // Either a named topology to generate or existing network + trace files.
    std::optional<std::string> topology;
    std::optional<fs::path> network;
    std::optional<fs::path> trace;
    HardwareConfig hardware;
    PartitionerKind partitioner{PartitionerKind::Greedy};
    bool sweep_until_stable{true};
    PsoConfig pso;
    std::uint64_t seed{1};
    fs::path out_dir{"out"};
    bool explore{true};

    // Throws ValidationError on missing inputs.
    void validate() const;
};

RunManifest read_manifest(std::istream &in);
RunManifest load_manifest(const fs::path &path);
void write_manifest(std::ostream &out, const RunManifest &manifest);

struct PipelineResult
{
    Workload workload;
    PartitionResult partition;
    PlaceResult place;
    SimulateResult simulate;
    std::vector<ExploreRow> explore;
};

// generate (or load) -> partition -> place -> simulate -> explore, with every
// stage writing into manifest.out_dir. The manifest lands there too.
PipelineResult cmd_pipeline(const RunManifest &manifest);

} // namespace neuromap

#endif
