#include <algorithm>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>

#include "neuromap/errors.hpp"
#include "neuromap/log.hpp"
#include "neuromap/partition.hpp"
#include "text_io.hpp"

namespace neuromap
{

Partition::Partition(std::size_t cluster_count, std::size_t capacity,
        std::vector<ClusterId> assignment)
        : capacity_(capacity)
        , assignment_(std::move(assignment))
        , sizes_(cluster_count, 0)
{
    for (std::size_t n = 0; n < assignment_.size(); ++n)
    {
        if (assignment_[n] >= cluster_count)
        {
            throw ValidationError("neuron " + std::to_string(n) +
                    " assigned to cluster " + std::to_string(assignment_[n]) +
                    " but k=" + std::to_string(cluster_count));
        }
        ++sizes_[assignment_[n]];
    }
    for (std::size_t c = 0; c < cluster_count; ++c)
    {
        if (sizes_[c] > capacity_)
        {
            throw ValidationError("cluster " + std::to_string(c) + " holds " +
                    std::to_string(sizes_[c]) + " neurons, capacity is " +
                    std::to_string(capacity_));
        }
    }
}

std::vector<Cluster> Partition::clusters() const
{
    std::vector<Cluster> result(sizes_.size());
    for (std::size_t c = 0; c < result.size(); ++c)
    {
        result[c].id = static_cast<ClusterId>(c);
        result[c].members.reserve(sizes_[c]);
    }
    for (std::size_t n = 0; n < assignment_.size(); ++n)
    {
        result[assignment_[n]].members.push_back(static_cast<NeuronId>(n));
    }
    return result;
}

void Partition::move(NeuronId neuron, ClusterId to)
{
    --sizes_[assignment_[neuron]];
    ++sizes_[to];
    assignment_[neuron] = to;
}

PartitionerKind parse_partitioner_kind(const std::string &name)
{
    if (name == "greedy")
    {
        return PartitionerKind::Greedy;
    }
    if (name == "fill" || name == "baseline")
    {
        return PartitionerKind::Fill;
    }
    if (name == "balance")
    {
        return PartitionerKind::Balance;
    }
    throw ValidationError("unknown partitioner '" + name +
            "' (expected greedy|fill|balance)");
}

std::string to_string(PartitionerKind kind)
{
    switch (kind)
    {
    case PartitionerKind::Greedy:
        return "greedy";
    case PartitionerKind::Fill:
        return "fill";
    case PartitionerKind::Balance:
        return "balance";
    }
    return "unknown";
}

std::size_t min_cluster_count(std::size_t neurons, std::size_t n_c)
{
    if (n_c == 0)
    {
        throw ValidationError("crossbar capacity n_c must be at least 1");
    }
    return (neurons + n_c - 1) / n_c;
}

namespace
{

void check_cover(const SnnGraph &graph, const Partition &partition)
{
    if (partition.neuron_count() != graph.neuron_count())
    {
        throw ValidationError("partition covers " +
                std::to_string(partition.neuron_count()) + " neurons, network has " +
                std::to_string(graph.neuron_count()));
    }
}

} // namespace

std::uint64_t global_spike_count(const SnnGraph &graph, const Partition &partition)
{
    check_cover(graph, partition);
    std::uint64_t gs = 0;
    for (const Synapse &s : graph.synapses())
    {
        if (partition.cluster_of(s.src) != partition.cluster_of(s.dst))
        {
            gs += s.spike_count;
        }
    }
    return gs;
}

std::vector<SynapseId> global_synapses(const SnnGraph &graph, const Partition &partition)
{
    check_cover(graph, partition);
    std::vector<SynapseId> ids;
    for (SynapseId id = 0; id < graph.synapse_count(); ++id)
    {
        const Synapse &s = graph.synapse(id);
        if (partition.cluster_of(s.src) != partition.cluster_of(s.dst))
        {
            ids.push_back(id);
        }
    }
    return ids;
}

Partition initial_partition(const SnnGraph &graph, std::size_t n_c, std::uint64_t seed)
{
    const std::size_t k = min_cluster_count(graph.neuron_count(), n_c);
    std::vector<NeuronId> order(graph.neuron_count());
    std::iota(order.begin(), order.end(), NeuronId{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<ClusterId> assignment(graph.neuron_count(), 0);
    for (std::size_t i = 0; i < order.size(); ++i)
    {
        assignment[order[i]] = static_cast<ClusterId>(i % k);
    }
    return Partition(k, n_c, std::move(assignment));
}

Partition partition_baseline(const SnnGraph &graph, std::size_t n_c,
        PartitionerKind kind, std::uint64_t seed)
{
    const std::size_t k = min_cluster_count(graph.neuron_count(), n_c);
    std::vector<ClusterId> assignment(graph.neuron_count(), 0);
    switch (kind)
    {
    case PartitionerKind::Fill:
        for (std::size_t n = 0; n < assignment.size(); ++n)
        {
            assignment[n] = static_cast<ClusterId>(n / n_c);
        }
        break;
    case PartitionerKind::Balance:
        for (std::size_t n = 0; n < assignment.size(); ++n)
        {
            assignment[n] = static_cast<ClusterId>(n % k);
        }
        break;
    case PartitionerKind::Greedy:
        return cluster(graph, n_c, seed);
    }
    return Partition(k, n_c, std::move(assignment));
}

Partition make_partition(const SnnGraph &graph, std::size_t n_c,
        PartitionerKind kind, std::uint64_t seed, const ClusterOptions &options)
{
    if (kind == PartitionerKind::Greedy)
    {
        return cluster(graph, n_c, seed, options);
    }
    return partition_baseline(graph, n_c, kind, seed);
}

std::vector<NeuronId> fan_in_violations(const SnnGraph &graph, std::size_t n_c)
{
    std::vector<std::size_t> fan_in(graph.neuron_count(), 0);
    for (const Synapse &s : graph.synapses())
    {
        ++fan_in[s.dst];
    }
    std::vector<NeuronId> over;
    for (std::size_t n = 0; n < fan_in.size(); ++n)
    {
        if (fan_in[n] > n_c)
        {
            over.push_back(static_cast<NeuronId>(n));
        }
    }
    return over;
}

Partition brute_force_partition(const SnnGraph &graph, std::size_t n_c)
{
    const std::size_t n = graph.neuron_count();
    if (n > brute_force_partition_limit)
    {
        throw ValidationError("brute-force partitioning is limited to " +
                std::to_string(brute_force_partition_limit) + " neurons, got " +
                std::to_string(n));
    }
    const std::size_t k = min_cluster_count(n, n_c);

    // Undirected weights toward lower-numbered neurons, so a partial
    // assignment of 0..i-1 knows its exact cut when neuron i is placed.
    std::vector<std::vector<std::pair<NeuronId, std::uint64_t>>> earlier(n);
    for (const Synapse &s : graph.synapses())
    {
        if (s.src == s.dst)
        {
            continue;
        }
        const NeuronId hi = std::max(s.src, s.dst);
        const NeuronId lo = std::min(s.src, s.dst);
        earlier[hi].emplace_back(lo, s.spike_count);
    }

    std::vector<ClusterId> current(n, 0);
    std::vector<ClusterId> best;
    std::optional<std::uint64_t> best_gs;
    std::vector<std::size_t> sizes(k, 0);

    std::function<void(std::size_t, std::size_t, std::uint64_t)> place =
            [&](std::size_t neuron, std::size_t used, std::uint64_t gs) {
                if (best_gs && gs >= *best_gs)
                {
                    return;
                }
                if (neuron == n)
                {
                    best_gs = gs;
                    best = current;
                    return;
                }
                // Restricted-growth labels: a new cluster may only be opened
                // as the next unused id.
                const std::size_t limit = std::min(used + 1, k);
                for (std::size_t c = 0; c < limit; ++c)
                {
                    if (sizes[c] >= n_c)
                    {
                        continue;
                    }
                    std::uint64_t added = 0;
                    for (const auto &[other, w] : earlier[neuron])
                    {
                        if (current[other] != c)
                        {
                            added += w;
                        }
                    }
                    current[neuron] = static_cast<ClusterId>(c);
                    ++sizes[c];
                    place(neuron + 1, std::max(used, c + 1), gs + added);
                    --sizes[c];
                }
            };
    place(0, 0, 0);
    if (!best_gs)
    {
        best.assign(n, 0);
    }
    return Partition(k, n_c, std::move(best));
}

void write_partition(std::ostream &out, const Partition &partition, std::uint64_t gs)
{
    out << "# k=" << partition.cluster_count() << " n_c=" << partition.capacity()
        << " gs=" << gs << '\n';
    for (std::size_t n = 0; n < partition.neuron_count(); ++n)
    {
        out << n << ',' << partition.cluster_of(static_cast<NeuronId>(n)) << '\n';
    }
}

void save_partition(const std::filesystem::path &path, const Partition &partition,
        std::uint64_t gs)
{
    auto out = text::open_output(path);
    write_partition(out, partition, gs);
}

Partition read_partition(std::istream &in)
{
    std::optional<std::size_t> k;
    std::optional<std::size_t> n_c;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> rows;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw))
    {
        ++line;
        const auto content = text::trim(raw);
        if (content.empty())
        {
            continue;
        }
        if (content.front() == '#')
        {
            const auto fields = text::header_fields(content);
            if (const auto it = fields.find("k"); it != fields.end())
            {
                k = parse_unsigned(it->second, line);
            }
            if (const auto it = fields.find("n_c"); it != fields.end())
            {
                n_c = parse_unsigned(it->second, line);
            }
            continue;
        }
        const auto fields = text::split(content);
        text::expect_fields(fields, 2, line);
        rows.emplace_back(parse_unsigned(fields[0], line),
                parse_unsigned(fields[1], line));
        if (rows.back().first != rows.size() - 1)
        {
            throw ParseError("partition rows must list neurons 0,1,2,... in order",
                    line);
        }
    }
    if (!k || !n_c)
    {
        throw ParseError("missing '# k=<int> n_c=<int>' header");
    }
    std::vector<ClusterId> assignment;
    assignment.reserve(rows.size());
    for (const auto &[neuron, c] : rows)
    {
        assignment.push_back(static_cast<ClusterId>(c));
    }
    return Partition(*k, *n_c, std::move(assignment));
}

Partition load_partition(const std::filesystem::path &path)
{
    auto in = text::open_input(path);
    return read_partition(in);
}

} // namespace neuromap
