#ifndef NEUROMAP_METRICS_HPP
#define NEUROMAP_METRICS_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "neuromap/hardware.hpp"
#include "neuromap/noc_sim.hpp"
#include "neuromap/snn.hpp"

namespace neuromap
{

struct LatencySummary
{
    // Mean measured delay over packets, in cycles.
    double measured{0.0};
    // Mean of (h - 1) l_w + h l_s over the delivered hop counts.
    double formula{0.0};
    std::uint64_t max_measured{0};
};

LatencySummary avg_latency(const SimReport &report, const HardwareConfig &hw);

// Sum over packets of (h - 1) e_w + h e_s, in pJ.
double total_energy(const SimReport &report, const HardwareConfig &hw);

struct SynapseIsi
{
    SynapseId synapse{0};
    bool global{false};
    std::vector<double> original_ms;  // tau_j - tau_{j-1}
    std::vector<double> delayed_ms;   // same, with per-spike delays added
    std::vector<double> distortion;   // delta_j - delta_{j-1}, cycles
};

struct IsiSeries
{
    std::vector<SynapseIsi> synapses;
    // Mean |distortion| over intervals of global synapses.
    double mean_abs{0.0};
    // Signed mean over the same intervals.
    double mean_signed{0.0};
    std::size_t intervals{0};
};

// Local synapses get all-zero distortion series; global synapses use the
// delays of their flow's packets. The report must come from simulate_plan
// so that flow metadata is present. Throws ValidationError when a flow's
// packets do not line up with the synapse's spikes.
IsiSeries isi_distortion(const SynapseTrace &trace, const SimReport &report);

struct DisorderResult
{
    double value{0.0};
    // Destinations without a usable interval, or dropped zero intervals.
    bool degenerate{false};
};

// sum_j (F_j - Fhat_j)^2 / n for one destination. Empty input yields 0 with
// the degenerate flag. Throws ValidationError on a length mismatch.
DisorderResult spike_disorder(std::span<const double> expected, std::span<const double> observed);

// Per destination neuron, merges the arrival streams of its incoming global
// synapses with and without interconnect delay, turns consecutive arrivals
// into rates (1/ms), applies spike_disorder and averages over destinations.
DisorderResult spike_disorder(const SynapseTrace &trace, const SimReport &report);

struct MetricSummary
{
    std::size_t n_s{0};
    double avg_latency{0.0};
    double formula_latency{0.0};
    std::uint64_t max_latency{0};
    double total_energy_pj{0.0};
    double isi_distortion_abs{0.0};
    double isi_distortion_signed{0.0};
    double spike_disorder{0.0};
    bool spike_disorder_degenerate{false};
};

MetricSummary summarize(const SynapseTrace &trace, const SimReport &report,
        const HardwareConfig &hw);

// JSON object with n_s, avg_latency, total_energy_pj, isi_distortion_abs,
// isi_distortion_signed, spike_disorder and a few auxiliary fields.
void write_metrics_json(std::ostream &out, const MetricSummary &summary);
// `synapse,global,intervals,sum_distortion,mean_abs_distortion`.
void write_isi_csv(std::ostream &out, const IsiSeries &series);

} // namespace neuromap

#endif
