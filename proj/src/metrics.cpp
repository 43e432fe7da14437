#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "neuromap/errors.hpp"
#include "neuromap/metrics.hpp"

namespace neuromap
{

LatencySummary avg_latency(const SimReport &report, const HardwareConfig &hw)
{
    LatencySummary summary;
    if (report.packets.empty())
    {
        return summary;
    }
    std::uint64_t measured = 0;
    std::uint64_t formula = 0;
    for (const SpikePacket &p : report.packets)
    {
        const std::uint64_t h = p.hops;
        measured += p.delay();
        formula += (h - 1) * hw.l_w + h * hw.l_s;
        summary.max_measured = std::max(summary.max_measured, p.delay());
    }
    const auto n = static_cast<double>(report.packets.size());
    summary.measured = static_cast<double>(measured) / n;
    summary.formula = static_cast<double>(formula) / n;
    return summary;
}

double total_energy(const SimReport &report, const HardwareConfig &hw)
{
    double energy = 0.0;
    for (const SpikePacket &p : report.packets)
    {
        const auto h = static_cast<double>(p.hops);
        energy += (h - 1.0) * hw.e_w + h * hw.e_s;
    }
    return energy;
}

namespace
{

// packets_by_flow[f][seq] -> packet
std::vector<std::vector<const SpikePacket *>> index_packets(const SimReport &report)
{
    if (report.flows.empty() && !report.packets.empty())
    {
        throw ValidationError("report carries no flow metadata; simulate it with "
                              "simulate_plan");
    }
    std::vector<std::vector<const SpikePacket *>> by_flow(report.flows.size());
    for (const SpikePacket &p : report.packets)
    {
        if (p.flow >= by_flow.size())
        {
            throw ValidationError("packet refers to unknown flow " +
                    std::to_string(p.flow));
        }
        auto &list = by_flow[p.flow];
        if (list.size() <= p.seq)
        {
            list.resize(p.seq + 1, nullptr);
        }
        list[p.seq] = &p;
    }
    return by_flow;
}

std::vector<std::int64_t> flow_of_synapse(const SimReport &report, std::size_t synapses)
{
    std::vector<std::int64_t> flow_of(synapses, -1);
    for (std::size_t f = 0; f < report.flows.size(); ++f)
    {
        for (SynapseId s : report.flows[f].synapses)
        {
            if (s >= synapses)
            {
                throw ValidationError("flow references synapse " + std::to_string(s) +
                        " beyond the trace");
            }
            flow_of[s] = static_cast<std::int64_t>(f);
        }
    }
    return flow_of;
}

const std::vector<const SpikePacket *> &checked_packets(
        const std::vector<std::vector<const SpikePacket *>> &by_flow, std::size_t flow,
        SynapseId synapse, std::size_t spikes)
{
    const auto &packets = by_flow[flow];
    const bool complete = packets.size() == spikes &&
            std::all_of(packets.begin(), packets.end(),
                    [](const SpikePacket *p) { return p != nullptr; });
    if (!complete)
    {
        throw ValidationError("synapse " + std::to_string(synapse) + " has " +
                std::to_string(spikes) + " spikes but its packets do not match");
    }
    return packets;
}

} // namespace

IsiSeries isi_distortion(const SynapseTrace &trace, const SimReport &report)
{
    const auto by_flow = index_packets(report);
    const auto flow_of = flow_of_synapse(report, trace.synapse_count());

    IsiSeries series;
    series.synapses.reserve(trace.synapse_count());
    double abs_sum = 0.0;
    double signed_sum = 0.0;
    for (SynapseId s = 0; s < trace.synapse_count(); ++s)
    {
        const auto times = trace.times(s);
        SynapseIsi isi;
        isi.synapse = s;
        isi.global = flow_of[s] >= 0;
        const std::vector<const SpikePacket *> *packets = nullptr;
        if (isi.global)
        {
            packets = &checked_packets(
                    by_flow, static_cast<std::size_t>(flow_of[s]), s, times.size());
        }
        for (std::size_t j = 1; j < times.size(); ++j)
        {
            const double original = times[j] - times[j - 1];
            double distortion = 0.0;
            if (packets != nullptr)
            {
                distortion = static_cast<double>((*packets)[j]->delay()) -
                        static_cast<double>((*packets)[j - 1]->delay());
                abs_sum += std::abs(distortion);
                signed_sum += distortion;
                ++series.intervals;
            }
            isi.original_ms.push_back(original);
            isi.delayed_ms.push_back(original + distortion * report.cycle_ms);
            isi.distortion.push_back(distortion);
        }
        series.synapses.push_back(std::move(isi));
    }
    if (series.intervals > 0)
    {
        series.mean_abs = abs_sum / static_cast<double>(series.intervals);
        series.mean_signed = signed_sum / static_cast<double>(series.intervals);
    }
    return series;
}

DisorderResult spike_disorder(std::span<const double> expected, std::span<const double> observed)
{
    if (expected.size() != observed.size())
    {
        throw ValidationError("spike disorder needs equal-length rate vectors");
    }
    if (expected.empty())
    {
        return {0.0, true};
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < expected.size(); ++j)
    {
        const double diff = expected[j] - observed[j];
        sum += diff * diff;
    }
    return {sum / static_cast<double>(expected.size()), false};
}

DisorderResult spike_disorder(const SynapseTrace &trace, const SimReport &report)
{
    const auto by_flow = index_packets(report);
    const auto flow_of = flow_of_synapse(report, trace.synapse_count());

    std::vector<std::vector<double>> expected(trace.neuron_count());
    std::vector<std::vector<double>> observed(trace.neuron_count());
    for (SynapseId s = 0; s < trace.synapse_count(); ++s)
    {
        if (flow_of[s] < 0)
        {
            continue;
        }
        const auto times = trace.times(s);
        const auto &packets = checked_packets(
                by_flow, static_cast<std::size_t>(flow_of[s]), s, times.size());
        const NeuronId dst = trace.target(s);
        for (std::size_t j = 0; j < times.size(); ++j)
        {
            expected[dst].push_back(times[j]);
            observed[dst].push_back(
                    times[j] + static_cast<double>(packets[j]->delay()) * report.cycle_ms);
        }
    }

    DisorderResult result;
    double total = 0.0;
    std::size_t destinations = 0;
    bool any_global = false;
    for (std::size_t n = 0; n < expected.size(); ++n)
    {
        if (expected[n].empty())
        {
            continue;
        }
        any_global = true;
        std::sort(expected[n].begin(), expected[n].end());
        std::sort(observed[n].begin(), observed[n].end());
        std::vector<double> f;
        std::vector<double> f_hat;
        for (std::size_t j = 1; j < expected[n].size(); ++j)
        {
            const double gap = expected[n][j] - expected[n][j - 1];
            const double gap_hat = observed[n][j] - observed[n][j - 1];
            if (gap <= 0.0 || gap_hat <= 0.0)
            {
                result.degenerate = true;
                continue;
            }
            f.push_back(1.0 / gap);
            f_hat.push_back(1.0 / gap_hat);
        }
        const DisorderResult one = spike_disorder(f, f_hat);
        if (one.degenerate)
        {
            result.degenerate = true;
            continue;
        }
        total += one.value;
        ++destinations;
    }
    if (destinations > 0)
    {
        result.value = total / static_cast<double>(destinations);
    }
    else if (any_global)
    {
        result.degenerate = true;
    }
    return result;
}

MetricSummary summarize(const SynapseTrace &trace, const SimReport &report,
        const HardwareConfig &hw)
{
    MetricSummary summary;
    summary.n_s = report.n_s();
    const LatencySummary latency = avg_latency(report, hw);
    summary.avg_latency = latency.measured;
    summary.formula_latency = latency.formula;
    summary.max_latency = latency.max_measured;
    summary.total_energy_pj = total_energy(report, hw);
    const IsiSeries isi = isi_distortion(trace, report);
    summary.isi_distortion_abs = isi.mean_abs;
    summary.isi_distortion_signed = isi.mean_signed;
    const DisorderResult disorder = spike_disorder(trace, report);
    summary.spike_disorder = disorder.value;
    summary.spike_disorder_degenerate = disorder.degenerate;
    return summary;
}

void write_metrics_json(std::ostream &out, const MetricSummary &summary)
{
    nlohmann::ordered_json j;
    j["n_s"] = summary.n_s;
    j["avg_latency"] = summary.avg_latency;
    j["formula_latency"] = summary.formula_latency;
    j["max_latency"] = summary.max_latency;
    j["total_energy_pj"] = summary.total_energy_pj;
    j["isi_distortion_abs"] = summary.isi_distortion_abs;
    j["isi_distortion_signed"] = summary.isi_distortion_signed;
    j["spike_disorder"] = summary.spike_disorder;
    j["spike_disorder_degenerate"] = summary.spike_disorder_degenerate;
    out << j.dump(2) << '\n';
}

void write_isi_csv(std::ostream &out, const IsiSeries &series)
{
    out << "synapse,global,intervals,sum_distortion,mean_abs_distortion\n";
    for (const SynapseIsi &isi : series.synapses)
    {
        double sum = 0.0;
        double abs_sum = 0.0;
        for (double d : isi.distortion)
        {
            sum += d;
            abs_sum += std::abs(d);
        }
        const double mean_abs = isi.distortion.empty() ?
                0.0 :
                abs_sum / static_cast<double>(isi.distortion.size());
        out << isi.synapse << ',' << (isi.global ? 1 : 0) << ',' << isi.distortion.size()
            << ',' << format_real(sum) << ',' << format_real(mean_abs) << '\n';
    }
}

} // namespace neuromap
