#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <ostream>
#include <tuple>

#include "neuromap/errors.hpp"
#include "neuromap/noc_sim.hpp"

namespace neuromap
{

namespace
{

constexpr std::size_t port_count = 5;
constexpr std::size_t local_port = 4;

std::size_t port_index(Direction d)
{
    return static_cast<std::size_t>(d);
}

// Input port on the receiving router for a packet travelling in d.
std::size_t arrival_port(Direction d)
{
    switch (d)
    {
    case Direction::East:
        return port_index(Direction::West);
    case Direction::West:
        return port_index(Direction::East);
    case Direction::North:
        return port_index(Direction::South);
    case Direction::South:
        return port_index(Direction::North);
    case Direction::Local:
        break;
    }
    return local_port;
}

void check_placement(std::span<const std::size_t> crossbar_of_cluster,
        std::size_t clusters, const HardwareConfig &hw)
{
    if (crossbar_of_cluster.size() != clusters)
    {
        throw ValidationError("placement lists " +
                std::to_string(crossbar_of_cluster.size()) + " clusters, partition has " +
                std::to_string(clusters));
    }
    std::vector<char> used(hw.crossbar_count(), 0);
    for (std::size_t xb : crossbar_of_cluster)
    {
        if (xb >= hw.crossbar_count())
        {
            throw ValidationError("placement uses crossbar " + std::to_string(xb) +
                    " outside the mesh");
        }
        if (used[xb])
        {
            throw ValidationError("placement puts two clusters on crossbar " +
                    std::to_string(xb));
        }
        used[xb] = 1;
    }
}

} // namespace

TrafficPlan::TrafficPlan(const Partition &partition, const SynapseTrace &trace,
        const HardwareConfig &hw)
        : cluster_count_(partition.cluster_count())
        , synapse_count_(trace.synapse_count())
{
    if (hw.multicast != MulticastMode::Replicate)
    {
        throw ValidationError("tree multicast is not supported; use multicast=replicate");
    }
    if (partition.neuron_count() != trace.neuron_count())
    {
        throw ValidationError("partition covers " +
                std::to_string(partition.neuron_count()) +
                " neurons but the trace was derived for " +
                std::to_string(trace.neuron_count()));
    }
    pair_packets_.assign(cluster_count_ * cluster_count_, 0);

    // Synapse ids ascend with source neuron, so flows of one source are
    // contiguous and can be grouped with a per-cluster scratch index.
    std::vector<std::int64_t> flow_of_cluster(cluster_count_, -1);
    std::vector<ClusterId> touched;
    SynapseId id = 0;
    while (id < trace.synapse_count())
    {
        const NeuronId source = trace.source(id);
        const ClusterId src_cluster = partition.cluster_of(source);
        for (; id < trace.synapse_count() && trace.source(id) == source; ++id)
        {
            const ClusterId dst_cluster = partition.cluster_of(trace.target(id));
            if (dst_cluster == src_cluster)
            {
                continue;
            }
            if (flow_of_cluster[dst_cluster] < 0)
            {
                flow_of_cluster[dst_cluster] = static_cast<std::int64_t>(flows_.size());
                flows_.push_back({source, src_cluster, dst_cluster, {}});
                touched.push_back(dst_cluster);
            }
            flows_[static_cast<std::size_t>(flow_of_cluster[dst_cluster])]
                    .synapses.push_back(id);
        }
        for (ClusterId c : touched)
        {
            flow_of_cluster[c] = -1;
        }
        touched.clear();
    }

    for (std::uint32_t f = 0; f < flows_.size(); ++f)
    {
        const Flow &flow = flows_[f];
        const auto times = trace.neuron_times(flow.source);
        for (std::uint32_t seq = 0; seq < times.size(); ++seq)
        {
            SpikePacket packet;
            packet.flow = f;
            packet.synapse = flow.synapses.front();
            packet.seq = seq;
            packet.inject_cycle =
                    static_cast<std::uint64_t>(std::llround(times[seq] / hw.cycle_ms));
            skeleton_.push_back(packet);
        }
        pair_packets_[flow.src_cluster * cluster_count_ + flow.dst_cluster] +=
                times.size();
    }
    std::sort(skeleton_.begin(), skeleton_.end(),
            [](const SpikePacket &a, const SpikePacket &b) {
                return std::tie(a.inject_cycle, a.synapse, a.seq) <
                        std::tie(b.inject_cycle, b.synapse, b.seq);
            });
}

std::vector<SpikePacket> TrafficPlan::place(
        std::span<const std::size_t> crossbar_of_cluster, const HardwareConfig &hw) const
{
    check_placement(crossbar_of_cluster, cluster_count_, hw);
    std::vector<SpikePacket> packets = skeleton_;
    for (SpikePacket &p : packets)
    {
        const Flow &flow = flows_[p.flow];
        p.src = coord_of(crossbar_of_cluster[flow.src_cluster], hw);
        p.dst = coord_of(crossbar_of_cluster[flow.dst_cluster], hw);
    }
    return packets;
}

std::vector<SpikePacket> compile_traffic(const Partition &partition,
        std::span<const std::size_t> crossbar_of_cluster, const SynapseTrace &trace,
        const HardwareConfig &hw)
{
    return TrafficPlan(partition, trace, hw).place(crossbar_of_cluster, hw);
}

std::uint64_t analytic_latency(CrossbarCoord src, CrossbarCoord dst,
        const HardwareConfig &hw)
{
    const auto h = static_cast<std::uint64_t>(manhattan(src, dst)) + 1;
    return (h - 1) * hw.l_w + h * hw.l_s;
}

namespace
{

struct InputQueue
{
    std::deque<std::uint32_t> packets;
    // Slots claimed by packets still on the incoming link.
    std::size_t reserved{0};

    std::size_t occupancy() const { return packets.size() + reserved; }
};

struct RouterState
{
    std::array<InputQueue, port_count> inputs;
    std::array<std::uint64_t, port_count> busy_until{};
    std::array<std::size_t, port_count> round_robin{};
    // Packets waiting to enter the local input queue.
    std::deque<std::uint32_t> source_queue;
};

struct InFlight
{
    std::uint64_t arrive_cycle;
    std::uint32_t packet;
    std::size_t router;
    std::size_t port;
};

class MeshSimulator
{
public:
    MeshSimulator(std::vector<SpikePacket> packets, const HardwareConfig &hw,
            const SimOptions &options)
            : hw_(hw)
            , options_(options)
            , routers_(hw.crossbar_count())
            , packets_(std::move(packets))
            , arrival_(packets_.size(), 0)
            , position_(packets_.size())
    {
        report_.link_packets.assign(hw.crossbar_count() * 4, 0);
        if (options_.record_paths)
        {
            report_.paths.resize(packets_.size());
        }
    }

    SimReport run()
    {
        for (std::size_t i = 1; i < packets_.size(); ++i)
        {
            if (packets_[i].inject_cycle < packets_[i - 1].inject_cycle)
            {
                throw ValidationError("packets must be sorted by inject_cycle");
            }
        }
        for (const SpikePacket &p : packets_)
        {
            if (!in_bounds(p.src, hw_) || !in_bounds(p.dst, hw_))
            {
                throw ValidationError("packet endpoint outside the mesh");
            }
        }
        const std::uint64_t guard = 10 * (hw_.l_w + hw_.l_s) * (hw_.diameter() + 1);
        std::size_t next_inject = 0;
        std::size_t delivered = 0;
        std::size_t in_network = 0;
        std::uint64_t now = packets_.empty() ? 0 : packets_.front().inject_cycle;
        std::uint64_t last_progress = now;

        while (delivered < packets_.size())
        {
            bool progressed = false;

            while (!links_.empty() && links_.front().arrive_cycle <= now)
            {
                const InFlight f = links_.front();
                links_.pop_front();
                InputQueue &q = routers_[f.router].inputs[f.port];
                --q.reserved;
                q.packets.push_back(f.packet);
                arrival_[f.packet] = f.arrive_cycle;
                progressed = true;
            }

            while (next_inject < packets_.size() &&
                    packets_[next_inject].inject_cycle <= now)
            {
                const auto id = static_cast<std::uint32_t>(next_inject++);
                routers_[crossbar_id(packets_[id].src, hw_)].source_queue.push_back(id);
                ++in_network;
            }
            for (std::size_t r = 0; r < routers_.size(); ++r)
            {
                RouterState &router = routers_[r];
                InputQueue &local = router.inputs[local_port];
                while (!router.source_queue.empty() &&
                        local.occupancy() < hw_.buffer_depth)
                {
                    const std::uint32_t id = router.source_queue.front();
                    router.source_queue.pop_front();
                    local.packets.push_back(id);
                    arrival_[id] = now;
                    position_[id] = packets_[id].src;
                    packets_[id].hops = 1;
                    if (options_.record_paths)
                    {
                        report_.paths[id].push_back(packets_[id].src);
                    }
                    progressed = true;
                }
            }

            for (std::size_t r = 0; r < routers_.size(); ++r)
            {
                const std::size_t granted = arbitrate(r, now);
                if (granted > 0)
                {
                    progressed = true;
                    delivered += delivered_this_step_;
                    in_network -= delivered_this_step_;
                }
            }

            if (progressed)
            {
                last_progress = now;
            }
            else if (now - last_progress > guard)
            {
                throw SimulationError("no packet progressed for " +
                        std::to_string(now - last_progress) + " cycles at cycle " +
                        std::to_string(now));
            }

            if (in_network == 0 && next_inject < packets_.size())
            {
                now = std::max(now + 1, packets_[next_inject].inject_cycle);
                last_progress = now;
            }
            else if (!progressed)
            {
                // Nothing changes before the next timed event, so skip to it.
                // Without one the mesh is stuck and the guard fires.
                const std::uint64_t next = next_event(now, next_inject);
                now = next == pending_cycle ? now + guard + 1 : std::max(now + 1, next);
            }
            else
            {
                ++now;
            }
        }

        report_.packets = std::move(packets_);
        report_.cycle_ms = hw_.cycle_ms;
        report_.routing = hw_.routing;
        report_.mesh_width = hw_.mesh_width;
        report_.mesh_height = hw_.mesh_height;
        for (const SpikePacket &p : report_.packets)
        {
            report_.total_hops += p.hops;
            report_.last_cycle = std::max(report_.last_cycle, p.deliver_cycle);
        }
        return std::move(report_);
    }

private:
    // Earliest cycle after now at which a link delivers, a packet is
    // injected, a queue head becomes ready or an output port frees up.
    std::uint64_t next_event(std::uint64_t now, std::size_t next_inject) const
    {
        std::uint64_t next = pending_cycle;
        if (!links_.empty())
        {
            next = std::min(next, links_.front().arrive_cycle);
        }
        if (next_inject < packets_.size())
        {
            next = std::min(next, packets_[next_inject].inject_cycle);
        }
        for (const RouterState &router : routers_)
        {
            for (std::size_t port = 0; port < port_count; ++port)
            {
                const InputQueue &q = router.inputs[port];
                if (!q.packets.empty())
                {
                    const std::uint64_t ready = arrival_[q.packets.front()] + hw_.l_s;
                    if (ready > now)
                    {
                        next = std::min(next, ready);
                    }
                }
                if (router.busy_until[port] > now)
                {
                    next = std::min(next, router.busy_until[port]);
                }
            }
        }
        return next;
    }

    std::size_t downstream_occupancy(CrossbarCoord from, Direction d) const
    {
        const CrossbarCoord to = step(from, d);
        if (!in_bounds(to, hw_))
        {
            return hw_.buffer_depth;
        }
        return routers_[crossbar_id(to, hw_)].inputs[arrival_port(d)].occupancy();
    }

    // Grants at most one packet per output port and per input port.
    std::size_t arbitrate(std::size_t r, std::uint64_t now)
    {
        delivered_this_step_ = 0;
        RouterState &router = routers_[r];
        if (std::all_of(router.inputs.begin(), router.inputs.end(),
                    [](const InputQueue &q) { return q.packets.empty(); }))
        {
            return 0;
        }
        const CrossbarCoord here = coord_of(r, hw_);
        const CongestionView congestion = [this](CrossbarCoord from, Direction d) {
            return downstream_occupancy(from, d);
        };

        std::array<std::size_t, port_count> wants;
        wants.fill(port_count);
        for (std::size_t in = 0; in < port_count; ++in)
        {
            const InputQueue &q = router.inputs[in];
            if (q.packets.empty())
            {
                continue;
            }
            const std::uint32_t head = q.packets.front();
            if (arrival_[head] + hw_.l_s > now)
            {
                continue;
            }
            wants[in] = port_index(next_direction(
                    here, packets_[head].dst, hw_.routing, congestion));
        }

        std::size_t granted = 0;
        for (std::size_t out = 0; out < port_count; ++out)
        {
            if (router.busy_until[out] > now)
            {
                continue;
            }
            const auto dir = static_cast<Direction>(out);
            if (out != local_port && downstream_occupancy(here, dir) >= hw_.buffer_depth)
            {
                continue;
            }
            for (std::size_t k = 0; k < port_count; ++k)
            {
                const std::size_t in = (router.round_robin[out] + k) % port_count;
                if (wants[in] != out)
                {
                    continue;
                }
                const std::uint32_t id = router.inputs[in].packets.front();
                router.inputs[in].packets.pop_front();
                wants[in] = port_count;
                router.round_robin[out] = (in + 1) % port_count;
                ++granted;
                if (out == local_port)
                {
                    packets_[id].deliver_cycle = now;
                    router.busy_until[out] = now + 1;
                    ++delivered_this_step_;
                }
                else
                {
                    forward(id, r, dir, now);
                    router.busy_until[out] = now + std::max<std::uint64_t>(1, hw_.l_w);
                }
                break;
            }
        }
        return granted;
    }

    void forward(std::uint32_t id, std::size_t r, Direction dir, std::uint64_t now)
    {
        ++report_.link_packets[r * 4 + port_index(dir)];
        const CrossbarCoord next = step(position_[id], dir);
        position_[id] = next;
        ++packets_[id].hops;
        if (options_.record_paths)
        {
            report_.paths[id].push_back(next);
        }
        const std::size_t to = crossbar_id(next, hw_);
        const std::size_t port = arrival_port(dir);
        ++routers_[to].inputs[port].reserved;
        links_.push_back({now + hw_.l_w, id, to, port});
    }

    const HardwareConfig &hw_;
    SimOptions options_;
    std::vector<RouterState> routers_;
    std::vector<SpikePacket> packets_;
    std::vector<std::uint64_t> arrival_;
    std::vector<CrossbarCoord> position_;
    // Every link has the same latency, so arrivals stay in grant order.
    std::deque<InFlight> links_;
    std::size_t delivered_this_step_{0};
    SimReport report_;
};

} // namespace

SimReport simulate(std::vector<SpikePacket> packets, const HardwareConfig &hw,
        const SimOptions &options)
{
    hw.validate();
    if (hw.l_w + hw.l_s == 0)
    {
        throw ValidationError("simulation needs l_w + l_s >= 1");
    }
    MeshSimulator sim(std::move(packets), hw, options);
    return sim.run();
}

SimReport simulate_plan(const TrafficPlan &plan,
        std::span<const std::size_t> crossbar_of_cluster, const HardwareConfig &hw,
        const SimOptions &options)
{
    SimReport report = simulate(plan.place(crossbar_of_cluster, hw), hw, options);
    report.flows = plan.flows();
    report.synapse_count = plan.synapse_count();
    return report;
}

void write_packets(std::ostream &out, const SimReport &report)
{
    struct Row
    {
        SynapseId synapse;
        std::uint32_t seq;
        const SpikePacket *packet;
    };
    std::vector<Row> rows;
    for (const SpikePacket &p : report.packets)
    {
        if (report.flows.empty())
        {
            rows.push_back({p.synapse, p.seq, &p});
            continue;
        }
        for (SynapseId s : report.flows.at(p.flow).synapses)
        {
            rows.push_back({s, p.seq, &p});
        }
    }
    std::sort(rows.begin(), rows.end(), [](const Row &a, const Row &b) {
        return std::tie(a.synapse, a.seq) < std::tie(b.synapse, b.seq);
    });
    out << "synapse,seq,inject_cycle,deliver_cycle,hops\n";
    for (const Row &row : rows)
    {
        out << row.synapse << ',' << row.seq << ',' << row.packet->inject_cycle << ','
            << row.packet->deliver_cycle << ',' << row.packet->hops << '\n';
    }
}

void write_link_utilization(std::ostream &out, const SimReport &report)
{
    static constexpr const char *names[] = {"east", "west", "north", "south"};
    out << "from_x,from_y,direction,packets\n";
    for (std::size_t i = 0; i < report.link_packets.size(); ++i)
    {
        if (report.link_packets[i] == 0)
        {
            continue;
        }
        const std::size_t crossbar = i / 4;
        out << crossbar % report.mesh_width << ',' << crossbar / report.mesh_width
            << ',' << names[i % 4] << ',' << report.link_packets[i] << '\n';
    }
}

} // namespace neuromap
