#ifndef NEUROMAP_PARTITION_HPP
#define NEUROMAP_PARTITION_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "neuromap/snn.hpp"

namespace neuromap
{

using ClusterId = std::uint32_t;

struct Cluster
{
    ClusterId id{0};
    std::vector<NeuronId> members;
};

// Assignment of every neuron to one of cluster_count() clusters holding at
// most capacity() neurons each.
class Partition
{
public:
    Partition() = default;
    // Throws ValidationError if a cluster id is out of range or a cluster
    // exceeds capacity.
    Partition(std::size_t cluster_count, std::size_t capacity,
            std::vector<ClusterId> assignment);

    std::size_t cluster_count() const noexcept { return sizes_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t neuron_count() const noexcept { return assignment_.size(); }
    ClusterId cluster_of(NeuronId neuron) const { return assignment_.at(neuron); }
    std::size_t cluster_size(ClusterId cluster) const { return sizes_.at(cluster); }
    const std::vector<ClusterId> &assignment() const noexcept { return assignment_; }
    // Members ascending.
    std::vector<Cluster> clusters() const;

    // Unchecked relocation; callers keep capacity.
    void move(NeuronId neuron, ClusterId to);

    friend bool operator==(const Partition &, const Partition &) = default;

private:
    std::size_t capacity_{0};
    std::vector<ClusterId> assignment_;
    std::vector<std::size_t> sizes_;
};

enum class PartitionerKind
{
    // Greedy pairwise move/swap refinement minimizing global spikes.
    Greedy,
    // Index-order packing, each cluster filled before the next opens.
    Fill,
    // Round-robin over the minimum cluster count.
    Balance,
};

PartitionerKind parse_partitioner_kind(const std::string &name);
std::string to_string(PartitionerKind kind);

// ceil(neurons / n_c); zero for an empty network.
std::size_t min_cluster_count(std::size_t neurons, std::size_t n_c);

// Sum of spike counts over synapses whose endpoints lie in different
// clusters. Throws ValidationError when the partition does not cover graph.
std::uint64_t global_spike_count(const SnnGraph &graph, const Partition &partition);
std::vector<SynapseId> global_synapses(const SnnGraph &graph, const Partition &partition);

// Seeded shuffle dealt round-robin into min_cluster_count clusters, so sizes
// differ by at most one.
Partition initial_partition(const SnnGraph &graph, std::size_t n_c, std::uint64_t seed);

// Accepted refinement step, reported to ClusterOptions::on_step.
struct RefineStep
{
    enum class Kind
    {
        MoveFirst,  // first neuron moved into the second cluster
        MoveSecond, // second neuron moved into the first cluster
        Swap,
    };
    Kind kind{Kind::Swap};
    ClusterId first_cluster{0};
    ClusterId second_cluster{0};
    NeuronId first{0};
    NeuronId second{0};
    std::uint64_t gs_before{0};
    std::uint64_t gs_after{0};
};

struct ClusterOptions
{
    // Repeat the sweep over all cluster pairs until one sweep changes
    // nothing. When false, every pair is refined exactly once.
    bool sweep_until_stable{true};
    std::function<void(const RefineStep &)> on_step;
};

// Refines clusters i and j of partition: neuron pairs are visited in
// ascending order, and for each unlocked pair the best of move/move/swap is
// applied when it strictly lowers the global spike count. Passes repeat
// while a pass improves. Moves never overfill or empty a cluster.
Partition two_part(const SnnGraph &graph, const Partition &partition,
        ClusterId i, ClusterId j, const ClusterOptions &options = {});

// Greedy partition: seeded initial_partition refined by two_part over every
// cluster pair.
Partition cluster(const SnnGraph &graph, std::size_t n_c, std::uint64_t seed,
        const ClusterOptions &options = {});

Partition partition_baseline(const SnnGraph &graph, std::size_t n_c,
        PartitionerKind kind, std::uint64_t seed);

// Dispatches on kind, including Greedy.
Partition make_partition(const SnnGraph &graph, std::size_t n_c,
        PartitionerKind kind, std::uint64_t seed, const ClusterOptions &options = {});

// Exact minimum-gs partition into min_cluster_count clusters by exhaustive
// enumeration up to relabeling. Limited to 12 neurons.
Partition brute_force_partition(const SnnGraph &graph, std::size_t n_c);
inline constexpr std::size_t brute_force_partition_limit = 12;

// Neurons whose fan-in exceeds the crossbar row count n_c.
std::vector<NeuronId> fan_in_violations(const SnnGraph &graph, std::size_t n_c);

// `# k=<int> n_c=<int> gs=<int>` then `neuron,cluster` rows.
void write_partition(std::ostream &out, const Partition &partition, std::uint64_t gs);
void save_partition(const std::filesystem::path &path, const Partition &partition,
        std::uint64_t gs);
Partition read_partition(std::istream &in);
Partition load_partition(const std::filesystem::path &path);

} // namespace neuromap

#endif
