#include <map>
#include <random>

#include "neuromap/errors.hpp"
#include "neuromap/snn.hpp"

namespace neuromap
{

namespace
{

const std::map<std::string, std::vector<std::size_t>> &shape_table()
{
    static const std::map<std::string, std::vector<std::size_t>> table = {
            {"s1000", {400, 400, 100}},
            {"s1500", {500, 500, 500}},
            {"s2000", {800, 400, 800}},
            {"s2500", {900, 900, 700}},
            {"s3000", {1000, 1000, 1000}},
            {"s3500", {1000, 1000, 1500}},
            {"s4000", {1500, 1500, 1000}},
            {"imgsmooth-shape", {4096, 1024}},
            {"edgedet-shape", {4096, 1024, 1024, 1024}},
            {"mlp-mnist-shape", {784, 100, 10}},
    };
    return table;
}

} // namespace

TopologySpec named_topology(const std::string &name)
{
    const auto &table = shape_table();
    const auto it = table.find(name);
    if (it == table.end())
    {
        throw ValidationError("unknown workload '" + name + "'");
    }
    TopologySpec spec;
    spec.layers = it->second;
    return spec;
}

std::vector<std::string> named_topologies()
{
    std::vector<std::string> names;
    for (const auto &[name, layers] : shape_table())
    {
        names.push_back(name);
    }
    return names;
}

std::pair<SnnGraph, SpikeTrace> generate_synthetic(
        const TopologySpec &spec, std::uint64_t seed)
{
    if (spec.layers.empty())
    {
        throw ValidationError("topology needs at least one layer");
    }
    for (std::size_t size : spec.layers)
    {
        if (size == 0)
        {
            throw ValidationError("zero-sized layer in topology");
        }
    }
    if (spec.rate_hz.size() != 1 && spec.rate_hz.size() != spec.layers.size())
    {
        throw ValidationError("rate_hz needs one entry or one per layer");
    }
    for (double rate : spec.rate_hz)
    {
        if (!(rate >= 0.0))
        {
            throw ValidationError("firing rates must be non-negative");
        }
    }
    if (!(spec.duration_ms >= 0.0))
    {
        throw ValidationError("duration must be non-negative");
    }

    std::mt19937_64 rng(seed);
    std::vector<SpikeEvent> events;
    std::vector<std::uint64_t> spike_counts;
    std::vector<std::size_t> layer_start;
    std::size_t neuron = 0;
    for (std::size_t layer = 0; layer < spec.layers.size(); ++layer)
    {
        layer_start.push_back(neuron);
        const double rate_hz =
                spec.rate_hz.size() == 1 ? spec.rate_hz[0] : spec.rate_hz[layer];
        const double rate_per_ms = rate_hz / 1000.0;
        for (std::size_t i = 0; i < spec.layers[layer]; ++i, ++neuron)
        {
            std::uint64_t count = 0;
            if (rate_per_ms > 0.0)
            {
                std::exponential_distribution<double> gap(rate_per_ms);
                double t = gap(rng);
                while (t <= spec.duration_ms)
                {
                    events.push_back({static_cast<NeuronId>(neuron), t});
                    ++count;
                    t += gap(rng);
                }
            }
            spike_counts.push_back(count);
        }
    }
    layer_start.push_back(neuron);

    std::vector<Synapse> synapses;
    for (std::size_t layer = 0; layer + 1 < spec.layers.size(); ++layer)
    {
        for (std::size_t src = layer_start[layer]; src < layer_start[layer + 1];
                ++src)
        {
            for (std::size_t dst = layer_start[layer + 1];
                    dst < layer_start[layer + 2]; ++dst)
            {
                synapses.push_back({static_cast<NeuronId>(src),
                        static_cast<NeuronId>(dst), spike_counts[src]});
            }
        }
    }
    SnnGraph graph(neuron, std::move(synapses));
    return {std::move(graph), SpikeTrace(spec.duration_ms, std::move(events))};
}

} // namespace neuromap
