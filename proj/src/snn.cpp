#include <algorithm>
#include <sstream>
#include <tuple>

#include "neuromap/errors.hpp"
#include "neuromap/log.hpp"
#include "neuromap/snn.hpp"

namespace neuromap
{

SnnGraph::SnnGraph(std::size_t neuron_count, std::vector<Synapse> synapses)
        : neuron_count_(neuron_count)
        , synapses_(std::move(synapses))
{
    for (const Synapse &s : synapses_)
    {
        if (s.src >= neuron_count_ || s.dst >= neuron_count_)
        {
            throw ValidationError("synapse " + std::to_string(s.src) + "->" +
                    std::to_string(s.dst) + " references a neuron outside [0," +
                    std::to_string(neuron_count_) + ")");
        }
    }
    std::sort(synapses_.begin(), synapses_.end(),
            [](const Synapse &a, const Synapse &b) {
                return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
            });
    for (std::size_t i = 1; i < synapses_.size(); ++i)
    {
        if (synapses_[i - 1].src == synapses_[i].src &&
                synapses_[i - 1].dst == synapses_[i].dst)
        {
            throw ValidationError("duplicate synapse " +
                    std::to_string(synapses_[i].src) + "->" +
                    std::to_string(synapses_[i].dst));
        }
    }

    out_offsets_.assign(neuron_count_ + 1, 0);
    for (const Synapse &s : synapses_)
    {
        ++out_offsets_[s.src + 1];
        if (s.src == s.dst)
        {
            ++self_loops_;
        }
    }
    for (std::size_t n = 0; n < neuron_count_; ++n)
    {
        out_offsets_[n + 1] += out_offsets_[n];
    }
    // Sorted by src, so synapse ids are already grouped per source.
    out_ids_.resize(synapses_.size());
    for (std::size_t i = 0; i < synapses_.size(); ++i)
    {
        out_ids_[i] = static_cast<SynapseId>(i);
    }
    if (self_loops_ > 0)
    {
        log().warn("network has {} self-loop synapse(s); they always stay "
                   "inside one crossbar",
                self_loops_);
    }
}

std::span<const SynapseId> SnnGraph::outgoing(NeuronId neuron) const
{
    if (neuron >= neuron_count_)
    {
        return {};
    }
    const std::size_t begin = out_offsets_[neuron];
    const std::size_t end = out_offsets_[neuron + 1];
    return std::span<const SynapseId>(out_ids_).subspan(begin, end - begin);
}

std::uint64_t SnnGraph::total_spike_count() const noexcept
{
    std::uint64_t total = 0;
    for (const Synapse &s : synapses_)
    {
        total += s.spike_count;
    }
    return total;
}

SpikeTrace::SpikeTrace(double duration_ms, std::vector<SpikeEvent> events)
        : duration_ms_(duration_ms)
        , events_(std::move(events))
{
    if (!(duration_ms_ >= 0.0))
    {
        throw ValidationError("trace duration must be non-negative");
    }
    for (const SpikeEvent &e : events_)
    {
        if (!(e.time_ms >= 0.0) || e.time_ms > duration_ms_)
        {
            std::ostringstream msg;
            msg << "spike of neuron " << e.neuron << " at " << e.time_ms
                << " ms lies outside [0, " << duration_ms_ << "]";
            throw ValidationError(msg.str());
        }
    }
    std::stable_sort(events_.begin(), events_.end(),
            [](const SpikeEvent &a, const SpikeEvent &b) {
                return std::tie(a.time_ms, a.neuron) <
                        std::tie(b.time_ms, b.neuron);
            });
}

std::vector<std::vector<double>> SpikeTrace::times_by_neuron(
        std::size_t neuron_count) const
{
    std::vector<std::vector<double>> times(neuron_count);
    for (const SpikeEvent &e : events_)
    {
        if (e.neuron >= times.size())
        {
            times.resize(e.neuron + 1);
        }
        times[e.neuron].push_back(e.time_ms);
    }
    return times;
}

SynapseTrace::SynapseTrace(const SnnGraph &graph, const SpikeTrace &trace)
        : neuron_times_(trace.times_by_neuron(graph.neuron_count()))
        , duration_ms_(trace.duration_ms())
{
    if (neuron_times_.size() > graph.neuron_count())
    {
        throw ValidationError("trace references neuron " +
                std::to_string(neuron_times_.size() - 1) + " but the network has " +
                std::to_string(graph.neuron_count()) + " neurons");
    }
    source_.reserve(graph.synapse_count());
    target_.reserve(graph.synapse_count());
    for (const Synapse &s : graph.synapses())
    {
        source_.push_back(s.src);
        target_.push_back(s.dst);
    }
}

std::span<const double> SynapseTrace::times(SynapseId synapse) const
{
    return neuron_times_.at(source_.at(synapse));
}

std::span<const double> SynapseTrace::neuron_times(NeuronId neuron) const
{
    return neuron_times_.at(neuron);
}

SynapseTrace derive_synapse_trace(const SnnGraph &graph, const SpikeTrace &trace)
{
    SynapseTrace derived(graph, trace);
    std::ostringstream offenders;
    std::size_t mismatches = 0;
    for (SynapseId id = 0; id < graph.synapse_count(); ++id)
    {
        const Synapse &s = graph.synapse(id);
        const std::size_t observed = derived.times(id).size();
        if (observed != s.spike_count)
        {
            if (mismatches < 20)
            {
                offenders << (mismatches == 0 ? "" : ", ") << s.src << "->"
                          << s.dst << " (w=" << s.spike_count
                          << ", trace=" << observed << ")";
            }
            ++mismatches;
        }
    }
    if (mismatches > 0)
    {
        throw ValidationError(std::to_string(mismatches) +
                " synapse(s) disagree with the trace: " + offenders.str() +
                (mismatches > 20 ? ", ..." : ""));
    }
    return derived;
}

SnnGraph with_trace_weights(const SnnGraph &graph, const SpikeTrace &trace)
{
    const auto times = trace.times_by_neuron(graph.neuron_count());
    if (times.size() > graph.neuron_count())
    {
        throw ValidationError("trace references neuron " +
                std::to_string(times.size() - 1) +
                " outside the network");
    }
    std::vector<Synapse> synapses = graph.synapses();
    for (Synapse &s : synapses)
    {
        s.spike_count = times[s.src].size();
    }
    return SnnGraph(graph.neuron_count(), std::move(synapses));
}

} // namespace neuromap
