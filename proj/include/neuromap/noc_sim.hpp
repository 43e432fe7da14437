#ifndef NEUROMAP_NOC_SIM_HPP
#define NEUROMAP_NOC_SIM_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "neuromap/hardware.hpp"
#include "neuromap/partition.hpp"
#include "neuromap/snn.hpp"

namespace neuromap
{

// Spikes of one source neuron bound for one remote cluster. Every global
// synapse from that neuron into that cluster shares the flow's packets.
struct Flow
{
    NeuronId source{0};
    ClusterId src_cluster{0};
    ClusterId dst_cluster{0};
    // Ascending; the first one labels the flow's packets.
    std::vector<SynapseId> synapses;
};

inline constexpr std::uint64_t pending_cycle = std::numeric_limits<std::uint64_t>::max();

struct SpikePacket
{
    std::uint32_t flow{0};
    SynapseId synapse{0};  // lowest synapse id of the flow
    std::uint32_t seq{0};  // index of the spike in the source neuron's train
    CrossbarCoord src;
    CrossbarCoord dst;
    std::uint64_t inject_cycle{0};
    std::uint64_t deliver_cycle{pending_cycle};
    std::uint32_t hops{0}; // switches traversed, filled on delivery

    std::uint64_t delay() const noexcept { return deliver_cycle - inject_cycle; }
};

// Mapping-independent part of traffic compilation: the flows of a
// partitioned network and their packet skeletons in injection order.
class TrafficPlan
{
public:
    TrafficPlan() = default;
    TrafficPlan(const Partition &partition, const SynapseTrace &trace,
            const HardwareConfig &hw);

    const std::vector<Flow> &flows() const noexcept { return flows_; }
    std::size_t packet_count() const noexcept { return skeleton_.size(); }
    std::size_t cluster_count() const noexcept { return cluster_count_; }
    std::size_t synapse_count() const noexcept { return synapse_count_; }

    // Packets toward each ordered cluster pair, row-major k x k.
    const std::vector<std::uint64_t> &pair_packets() const noexcept
    {
        return pair_packets_;
    }

    // Packets with src/dst crossbars filled from crossbar_of_cluster.
    std::vector<SpikePacket> place(std::span<const std::size_t> crossbar_of_cluster,
            const HardwareConfig &hw) const;

private:
    std::vector<Flow> flows_;
    std::vector<SpikePacket> skeleton_;
    std::vector<std::uint64_t> pair_packets_;
    std::size_t cluster_count_{0};
    std::size_t synapse_count_{0};
};

// One packet per (global-synapse spike, destination crossbar); spikes on
// intra-cluster synapses produce none. inject_cycle = round(t / cycle_ms).
// Packets are ordered by (inject_cycle, synapse, seq).
std::vector<SpikePacket> compile_traffic(const Partition &partition,
        std::span<const std::size_t> crossbar_of_cluster, const SynapseTrace &trace,
        const HardwareConfig &hw);

struct SimOptions
{
    bool record_paths{false};
};

struct SimReport
{
    std::vector<SpikePacket> packets;
    std::vector<Flow> flows;
    std::size_t synapse_count{0};
    double cycle_ms{0.0};
    RoutingKind routing{RoutingKind::XY};
    std::size_t mesh_width{0};
    std::size_t mesh_height{0};
    // Packets forwarded over each directed link, index crossbar * 4 + dir
    // (East, West, North, South).
    std::vector<std::uint64_t> link_packets;
    std::uint64_t total_hops{0};
    std::uint64_t last_cycle{0};
    // Per packet, when SimOptions::record_paths is set.
    std::vector<std::vector<CrossbarCoord>> paths;

    std::size_t n_s() const noexcept { return packets.size(); }
};

// Cycle-accurate store-and-forward mesh simulation. Each input port holds a
// FIFO of buffer_depth packets; a packet leaves a switch l_s cycles after
// arriving and spends l_w cycles on each link, which stays busy for
// max(1, l_w) cycles per packet. Output ports arbitrate round-robin over
// input ports. Runs until every packet is delivered; throws
// SimulationError if nothing progresses for 10 (l_w + l_s)(diameter + 1)
// cycles.
SimReport simulate(std::vector<SpikePacket> packets, const HardwareConfig &hw,
        const SimOptions &options = {});

// Convenience: compiles with a plan and simulates, keeping flow metadata.
SimReport simulate_plan(const TrafficPlan &plan,
        std::span<const std::size_t> crossbar_of_cluster, const HardwareConfig &hw,
        const SimOptions &options = {});

// Uncongested delay: (h - 1) l_w + h l_s with h = manhattan + 1.
std::uint64_t analytic_latency(CrossbarCoord src, CrossbarCoord dst,
        const HardwareConfig &hw);

// `synapse,seq,inject_cycle,deliver_cycle,hops`, one row per spike on each
// global synapse, sorted by (synapse, seq).
void write_packets(std::ostream &out, const SimReport &report);
// `from_x,from_y,direction,packets` for every link that carried traffic.
void write_link_utilization(std::ostream &out, const SimReport &report);

} // namespace neuromap

#endif
