#include <algorithm>
#include <array>

#include "neuromap/errors.hpp"
#include "neuromap/log.hpp"
#include "neuromap/partition.hpp"

namespace neuromap
{

namespace
{

struct Neighbor
{
    NeuronId neuron;
    std::int64_t weight;
};

// Mutable refinement state over one partition. Gains are computed from
// per-neuron connectivity toward the two clusters under refinement, so each
// candidate costs O(1) once the first neuron's adjacency row is scattered.
class Refiner
{
public:
    Refiner(const SnnGraph &graph, Partition partition,
            const std::function<void(const RefineStep &)> &on_step)
            : partition_(std::move(partition))
            , adjacency_(graph.neuron_count())
            , conn_first_(graph.neuron_count(), 0)
            , conn_second_(graph.neuron_count(), 0)
            , row_(graph.neuron_count(), 0)
            , locked_(graph.neuron_count(), 0)
            , on_step_(on_step)
    {
        for (const Synapse &s : graph.synapses())
        {
            if (s.src == s.dst)
            {
                continue;
            }
            const auto w = static_cast<std::int64_t>(s.spike_count);
            adjacency_[s.src].push_back({s.dst, w});
            adjacency_[s.dst].push_back({s.src, w});
        }
        gs_ = global_spike_count(graph, partition_);
    }

    // Returns true if any step was accepted for the pair.
    bool refine_pair(ClusterId first, ClusterId second)
    {
        bool changed = false;
        while (pass(first, second))
        {
            changed = true;
        }
        return changed;
    }

    const Partition &partition() const { return partition_; }
    std::uint64_t gs() const { return gs_; }

private:
    struct Candidate
    {
        RefineStep::Kind kind;
        std::int64_t delta;
    };

    bool pass(ClusterId first, ClusterId second)
    {
        first_ = first;
        second_ = second;
        std::vector<NeuronId> members_first;
        std::vector<NeuronId> members_second;
        for (std::size_t n = 0; n < partition_.neuron_count(); ++n)
        {
            const ClusterId c = partition_.cluster_of(static_cast<NeuronId>(n));
            if (c == first)
            {
                members_first.push_back(static_cast<NeuronId>(n));
            }
            else if (c == second)
            {
                members_second.push_back(static_cast<NeuronId>(n));
            }
        }
        for (const auto *members : {&members_first, &members_second})
        {
            for (NeuronId n : *members)
            {
                std::int64_t to_first = 0;
                std::int64_t to_second = 0;
                for (const Neighbor &nb : adjacency_[n])
                {
                    const ClusterId c = partition_.cluster_of(nb.neuron);
                    if (c == first)
                    {
                        to_first += nb.weight;
                    }
                    else if (c == second)
                    {
                        to_second += nb.weight;
                    }
                }
                conn_first_[n] = to_first;
                conn_second_[n] = to_second;
                locked_[n] = 0;
            }
        }

        const std::size_t capacity = partition_.capacity();
        bool improved = false;
        for (NeuronId a : members_first)
        {
            if (locked_[a])
            {
                continue;
            }
            for (const Neighbor &nb : adjacency_[a])
            {
                row_[nb.neuron] += nb.weight;
            }
            for (NeuronId b : members_second)
            {
                if (locked_[a])
                {
                    break;
                }
                if (locked_[b])
                {
                    continue;
                }
                const std::size_t size_first = partition_.cluster_size(first);
                const std::size_t size_second = partition_.cluster_size(second);
                const std::int64_t move_a = conn_first_[a] - conn_second_[a];
                const std::int64_t move_b = conn_second_[b] - conn_first_[b];

                // Preference order on equal deltas: swap, then the move out
                // of the smaller cluster, then the lower neuron index.
                std::array<Candidate, 3> candidates;
                std::size_t count = 0;
                candidates[count++] = {
                        RefineStep::Kind::Swap, move_a + move_b + 2 * row_[b]};
                const bool can_move_a = size_second < capacity && size_first > 1;
                const bool can_move_b = size_first < capacity && size_second > 1;
                const bool a_first = size_first < size_second ||
                        (size_first == size_second && a < b);
                if (a_first)
                {
                    if (can_move_a)
                    {
                        candidates[count++] = {RefineStep::Kind::MoveFirst, move_a};
                    }
                    if (can_move_b)
                    {
                        candidates[count++] = {RefineStep::Kind::MoveSecond, move_b};
                    }
                }
                else
                {
                    if (can_move_b)
                    {
                        candidates[count++] = {RefineStep::Kind::MoveSecond, move_b};
                    }
                    if (can_move_a)
                    {
                        candidates[count++] = {RefineStep::Kind::MoveFirst, move_a};
                    }
                }
                const Candidate *best = &candidates[0];
                for (std::size_t c = 1; c < count; ++c)
                {
                    if (candidates[c].delta < best->delta)
                    {
                        best = &candidates[c];
                    }
                }
                if (best->delta >= 0)
                {
                    continue;
                }

                RefineStep step;
                step.kind = best->kind;
                step.first_cluster = first;
                step.second_cluster = second;
                step.first = a;
                step.second = b;
                step.gs_before = gs_;
                if (best->kind != RefineStep::Kind::MoveSecond)
                {
                    relocate(a, second);
                }
                if (best->kind != RefineStep::Kind::MoveFirst)
                {
                    relocate(b, first);
                }
                gs_ = static_cast<std::uint64_t>(
                        static_cast<std::int64_t>(gs_) + best->delta);
                step.gs_after = gs_;
                locked_[a] = 1;
                locked_[b] = 1;
                improved = true;
                if (on_step_)
                {
                    on_step_(step);
                }
            }
            for (const Neighbor &nb : adjacency_[a])
            {
                row_[nb.neuron] = 0;
            }
        }
        return improved;
    }

    void relocate(NeuronId n, ClusterId to)
    {
        const ClusterId from = partition_.cluster_of(n);
        partition_.move(n, to);
        const std::int64_t sign = to == first_ ? 1 : -1;
        for (const Neighbor &nb : adjacency_[n])
        {
            const ClusterId c = partition_.cluster_of(nb.neuron);
            if (c != from && c != to)
            {
                continue;
            }
            conn_first_[nb.neuron] += sign * nb.weight;
            conn_second_[nb.neuron] -= sign * nb.weight;
        }
    }

private:
    Partition partition_;
    std::vector<std::vector<Neighbor>> adjacency_;
    std::vector<std::int64_t> conn_first_;
    std::vector<std::int64_t> conn_second_;
    std::vector<std::int64_t> row_;
    std::vector<char> locked_;
    std::uint64_t gs_{0};
    ClusterId first_{0};
    ClusterId second_{0};
    const std::function<void(const RefineStep &)> &on_step_;
};

} // namespace

Partition two_part(const SnnGraph &graph, const Partition &partition,
        ClusterId i, ClusterId j, const ClusterOptions &options)
{
    if (i == j || i >= partition.cluster_count() || j >= partition.cluster_count())
    {
        throw ValidationError("two_part needs two distinct existing clusters");
    }
    Refiner refiner(graph, partition, options.on_step);
    refiner.refine_pair(i, j);
    return refiner.partition();
}

Partition cluster(const SnnGraph &graph, std::size_t n_c, std::uint64_t seed,
        const ClusterOptions &options)
{
    Partition initial = initial_partition(graph, n_c, seed);
    if (const auto over = fan_in_violations(graph, n_c); !over.empty())
    {
        log().warn("{} neuron(s) have fan-in above the crossbar row count {} "
                   "(first: neuron {})",
                over.size(), n_c, over.front());
    }
    const std::size_t k = initial.cluster_count();
    if (k < 2)
    {
        return initial;
    }
    Refiner refiner(graph, std::move(initial), options.on_step);
    std::size_t sweep = 0;
    bool changed = true;
    while (changed)
    {
        changed = false;
        for (ClusterId i = 0; i < k; ++i)
        {
            for (ClusterId j = i + 1; j < k; ++j)
            {
                changed = refiner.refine_pair(i, j) || changed;
            }
        }
        ++sweep;
        log().debug("cluster sweep {} done, gs={}", sweep, refiner.gs());
        if (!options.sweep_until_stable)
        {
            break;
        }
    }
    return refiner.partition();
}

} // namespace neuromap
