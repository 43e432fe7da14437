#ifndef NEUROMAP_SNN_HPP
#define NEUROMAP_SNN_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace neuromap
{

using NeuronId = std::uint32_t;
using SynapseId = std::uint32_t;

struct Synapse
{
    NeuronId src{0};
    NeuronId dst{0};
    // Spikes carried over the trace window (w_ij).
    std::uint64_t spike_count{0};

    friend bool operator==(const Synapse &, const Synapse &) = default;
};

// Neurons 0..neuron_count-1 and their synapses, kept sorted by (src, dst).
// A synapse's index in synapses() is its SynapseId.
class SnnGraph
{
public:
    SnnGraph() = default;
    // Throws ValidationError on dangling endpoints or duplicate (src,dst).
    SnnGraph(std::size_t neuron_count, std::vector<Synapse> synapses);

    std::size_t neuron_count() const noexcept { return neuron_count_; }
    std::size_t synapse_count() const noexcept { return synapses_.size(); }
    const std::vector<Synapse> &synapses() const noexcept { return synapses_; }
    const Synapse &synapse(SynapseId id) const { return synapses_.at(id); }

    // Synapse ids whose source is the given neuron, ascending by dst.
    std::span<const SynapseId> outgoing(NeuronId neuron) const;
    std::size_t self_loop_count() const noexcept { return self_loops_; }
    std::uint64_t total_spike_count() const noexcept;

    friend bool operator==(const SnnGraph &a, const SnnGraph &b)
    {
        return a.neuron_count_ == b.neuron_count_ && a.synapses_ == b.synapses_;
    }

private:
    std::size_t neuron_count_{0};
    std::vector<Synapse> synapses_;
    std::vector<std::size_t> out_offsets_;
    std::vector<SynapseId> out_ids_;
    std::size_t self_loops_{0};
};

struct SpikeEvent
{
    NeuronId neuron{0};
    double time_ms{0.0};

    friend bool operator==(const SpikeEvent &, const SpikeEvent &) = default;
};

// Neuron-level spike events over [0, duration_ms], sorted by (time, neuron).
class SpikeTrace
{
public:
    SpikeTrace() = default;
    // Sorts the events. Throws ValidationError for negative times or times
    // beyond duration_ms.
    SpikeTrace(double duration_ms, std::vector<SpikeEvent> events);

    double duration_ms() const noexcept { return duration_ms_; }
    const std::vector<SpikeEvent> &events() const noexcept { return events_; }
    std::size_t size() const noexcept { return events_.size(); }

    // Per-neuron ascending spike times; neurons beyond the largest id seen
    // are padded up to neuron_count.
    std::vector<std::vector<double>> times_by_neuron(
            std::size_t neuron_count) const;

    friend bool operator==(const SpikeTrace &, const SpikeTrace &) = default;

private:
    double duration_ms_{0.0};
    std::vector<SpikeEvent> events_;
};

// Synapse-level spike times. Every synapse inherits the full spike train of
// its source neuron, so times are stored once per neuron and viewed per
// synapse.
class SynapseTrace
{
public:
    SynapseTrace() = default;
    SynapseTrace(const SnnGraph &graph, const SpikeTrace &trace);

    std::size_t synapse_count() const noexcept { return source_.size(); }
    std::span<const double> times(SynapseId synapse) const;
    NeuronId source(SynapseId synapse) const { return source_.at(synapse); }
    NeuronId target(SynapseId synapse) const { return target_.at(synapse); }
    std::span<const double> neuron_times(NeuronId neuron) const;
    std::size_t neuron_count() const noexcept { return neuron_times_.size(); }
    double duration_ms() const noexcept { return duration_ms_; }

private:
    std::vector<std::vector<double>> neuron_times_;
    std::vector<NeuronId> source_;
    std::vector<NeuronId> target_;
    double duration_ms_{0.0};
};

// Builds the synapse trace, first checking that every synapse's spike count
// equals its source neuron's event count. The ValidationError lists the
// offending synapses.
SynapseTrace derive_synapse_trace(const SnnGraph &graph, const SpikeTrace &trace);

// Copy of graph whose spike counts are recomputed from the trace.
SnnGraph with_trace_weights(const SnnGraph &graph, const SpikeTrace &trace);

// File formats. Readers throw ParseError (with line) or ValidationError;
// writers emit rows in canonical order so that load/save round-trips are
// byte-exact.
SnnGraph read_network(std::istream &in);
SnnGraph load_network(const std::filesystem::path &path);
void write_network(std::ostream &out, const SnnGraph &graph);
void save_network(const std::filesystem::path &path, const SnnGraph &graph);

SpikeTrace read_trace(std::istream &in, const SnnGraph &graph);
SpikeTrace load_trace(const std::filesystem::path &path, const SnnGraph &graph);
void write_trace(std::ostream &out, const SpikeTrace &trace);
void save_trace(const std::filesystem::path &path, const SpikeTrace &trace);

// Fully connected feedforward topology with homogeneous Poisson firing.
struct TopologySpec
{
    std::vector<std::size_t> layers;
    // One entry applies to every layer; otherwise one rate per layer.
    std::vector<double> rate_hz{10.0};
    double duration_ms{1000.0};
};

// Named shapes from the evaluation corpus, e.g. "s1000", "mlp-mnist-shape".
TopologySpec named_topology(const std::string &name);
std::vector<std::string> named_topologies();

// Deterministic in seed. Synapse weights equal source spike counts.
std::pair<SnnGraph, SpikeTrace> generate_synthetic(
        const TopologySpec &spec, std::uint64_t seed);

// Formatting shared by the text writers: shortest representation that
// parses back to the same double.
std::string format_real(double value);
double parse_real(const std::string &text, std::size_t line);
std::uint64_t parse_unsigned(const std::string &text, std::size_t line);

} // namespace neuromap

#endif
