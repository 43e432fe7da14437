#include <random>
#include <sstream>

#include <doctest.h>

#include "neuromap/errors.hpp"
#include "neuromap/partition.hpp"
#include "oracles.hpp"

using namespace neuromap;

namespace
{

std::vector<std::uint32_t> labels(const Partition &p)
{
    return {p.assignment().begin(), p.assignment().end()};
}

void check_cover(const Partition &p, std::size_t neurons, std::size_t n_c)
{
    REQUIRE(p.neuron_count() == neurons);
    std::vector<std::size_t> size(p.cluster_count(), 0);
    for (auto c : p.assignment())
    {
        REQUIRE(c < p.cluster_count());
        ++size[c];
    }
    for (std::size_t c = 0; c < size.size(); ++c)
    {
        CHECK(size[c] <= n_c);
        CHECK(size[c] == p.cluster_size(static_cast<ClusterId>(c)));
    }
}

} // namespace

TEST_CASE("gs of simple partitions")
{
    // chain 0-1-2-3 with weights 2, 3, 4
    SnnGraph chain(4, {{0, 1, 2}, {1, 2, 3}, {2, 3, 4}});
    CHECK(global_spike_count(chain, Partition(2, 2, {0, 0, 1, 1})) == 3);
    CHECK(global_spike_count(chain, Partition(1, 4, {0, 0, 0, 0})) == 0);
    CHECK(global_spike_count(chain, Partition(4, 1, {0, 1, 2, 3})) == 9);
    CHECK(global_synapses(chain, Partition(2, 2, {0, 0, 1, 1})) == std::vector<SynapseId>{1});
}

TEST_CASE("self loops never count as global")
{
    SnnGraph g(2, {{0, 0, 5}, {0, 1, 1}});
    CHECK(global_spike_count(g, Partition(2, 1, {0, 1})) == 1);
}

TEST_CASE("partition constructor validates")
{
    CHECK_THROWS_AS(Partition(2, 1, {0, 0}), ValidationError);
    CHECK_THROWS_AS(Partition(2, 2, {0, 2}), ValidationError);
    SnnGraph g(3, {});
    CHECK_THROWS_AS((void)global_spike_count(g, Partition(1, 2, {0, 0})), ValidationError);
}

TEST_CASE("baseline partitioners")
{
    SnnGraph g(8, {});
    const Partition fill = partition_baseline(g, 3, PartitionerKind::Fill, 0);
    CHECK(labels(fill) == std::vector<std::uint32_t>{0, 0, 0, 1, 1, 1, 2, 2});
    const Partition bal = partition_baseline(g, 3, PartitionerKind::Balance, 0);
    CHECK(labels(bal) == std::vector<std::uint32_t>{0, 1, 2, 0, 1, 2, 0, 1});
    CHECK(bal.cluster_size(0) == 3);
    CHECK(bal.cluster_size(2) == 2);
}

TEST_CASE("partitioner kind names")
{
    CHECK(parse_partitioner_kind("greedy") == PartitionerKind::Greedy);
    CHECK(parse_partitioner_kind("fill") == PartitionerKind::Fill);
    CHECK(parse_partitioner_kind("balance") == PartitionerKind::Balance);
    CHECK_THROWS_AS((void)parse_partitioner_kind("metis"), ValidationError);
    CHECK(min_cluster_count(1000, 256) == 4);
    CHECK(min_cluster_count(256, 256) == 1);
    CHECK_THROWS_AS((void)min_cluster_count(3, 0), ValidationError);
}

TEST_CASE("two_part finds the separating swap")
{
    // {0,2} and {1,3} are the real communities; start from {0,1}|{2,3}.
    SnnGraph g(4, {{0, 2, 5}, {2, 0, 5}, {1, 3, 5}, {0, 1, 1}});
    const Partition start(2, 2, {0, 0, 1, 1});
    const Partition out = two_part(g, start, 0, 1);
    CHECK(global_spike_count(g, out) == 1);
    CHECK(global_spike_count(g, out) ==
            oracle::best_gs(4, oracle::edges_of(g), 2));
}

TEST_CASE("two_part leaves a local optimum unchanged")
{
    SnnGraph g(4, {{0, 1, 5}, {2, 3, 5}, {1, 2, 1}});
    const Partition start(2, 2, {0, 0, 1, 1});
    CHECK(two_part(g, start, 0, 1) == start);
}

TEST_CASE("two_part never moves into a full cluster")
{
    // Moving 0 into cluster 1 would be best, but cluster 1 is full.
    SnnGraph g(4, {{0, 2, 9}, {0, 3, 9}, {0, 1, 1}});
    const Partition start(2, 2, {0, 0, 1, 1});
    const Partition out = two_part(g, start, 0, 1);
    CHECK(out.cluster_size(0) == 2);
    CHECK(out.cluster_size(1) == 2);
}

TEST_CASE("two_part rejects identical clusters")
{
    SnnGraph g(2, {});
    CHECK_THROWS_AS((void)two_part(g, Partition(2, 1, {0, 1}), 1, 1), ValidationError);
}

TEST_CASE("cluster on a graph that fits one crossbar")
{
    std::mt19937_64 rng(3);
    const SnnGraph g = oracle::random_graph(20, 0.3, 5, rng);
    const Partition p = cluster(g, 32, 1);
    CHECK(p.cluster_count() == 1);
    CHECK(global_spike_count(g, p) == 0);
}

TEST_CASE("cluster properties on random graphs")
{
    for (std::uint64_t seed = 1; seed <= 30; ++seed)
    {
        std::mt19937_64 rng(seed);
        const std::size_t n = 4 + seed % 9;
        const std::size_t n_c = 2 + seed % 3;
        const SnnGraph g = oracle::random_graph(n, 0.35, 6, rng);
        const Partition initial = initial_partition(g, n_c, seed);
        std::vector<RefineStep> steps;
        ClusterOptions options;
        options.on_step = [&](const RefineStep &s) { steps.push_back(s); };
        const Partition p = cluster(g, n_c, seed, options);

        CAPTURE(seed);
        check_cover(p, n, n_c);
        CHECK(p.cluster_count() == oracle::ceil_div(n, n_c));
        const auto edges = oracle::edges_of(g);
        const std::uint64_t gs = oracle::gs(edges, labels(p));
        CHECK(gs == global_spike_count(g, p));
        CHECK(gs <= oracle::gs(edges, labels(initial)));
        for (std::size_t i = 0; i < steps.size(); ++i)
        {
            CHECK(steps[i].gs_after < steps[i].gs_before);
            if (i > 0)
            {
                CHECK(steps[i].gs_before == steps[i - 1].gs_after);
            }
        }
        if (!steps.empty())
        {
            CHECK(steps.back().gs_after == gs);
        }
        std::string why;
        CHECK_MESSAGE(oracle::is_local_optimum(edges, labels(p), p.cluster_count(), n_c, &why),
                why);
        CHECK(global_spike_count(g, brute_force_partition(g, n_c)) ==
                oracle::best_gs(n, edges, n_c));
        CHECK(cluster(g, n_c, seed) == p);
    }
}

TEST_CASE("single sweep still never increases gs")
{
    std::mt19937_64 rng(11);
    const SnnGraph g = oracle::random_graph(40, 0.2, 9, rng);
    ClusterOptions options;
    options.sweep_until_stable = false;
    const Partition once = cluster(g, 8, 2, options);
    const Partition stable = cluster(g, 8, 2);
    const std::uint64_t initial = global_spike_count(g, initial_partition(g, 8, 2));
    CHECK(global_spike_count(g, once) <= initial);
    CHECK(global_spike_count(g, stable) <= global_spike_count(g, once));
}

TEST_CASE("brute force partition")
{
    SUBCASE("4-cycle with unit weights")
    {
        SnnGraph g(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 0, 1}});
        CHECK(global_spike_count(g, brute_force_partition(g, 2)) == 2);
    }
    SUBCASE("fits one crossbar")
    {
        SnnGraph g(3, {{0, 1, 4}, {1, 2, 4}});
        CHECK(global_spike_count(g, brute_force_partition(g, 3)) == 0);
    }
    SUBCASE("size guard")
    {
        SnnGraph g(13, {});
        CHECK_THROWS_AS((void)brute_force_partition(g, 4), ValidationError);
    }
}

TEST_CASE("fan-in above n_c is reported")
{
    SnnGraph g(4, {{0, 3, 1}, {1, 3, 1}, {2, 3, 1}, {0, 1, 1}});
    CHECK(fan_in_violations(g, 2) == std::vector<NeuronId>{3});
    CHECK(fan_in_violations(g, 3).empty());
}

TEST_CASE("partition file round trip")
{
    const Partition p(3, 2, {2, 0, 1, 0, 1});
    std::stringstream text;
    write_partition(text, p, 17);
    CHECK(text.str().rfind("# k=3 n_c=2 gs=17\n", 0) == 0);
    CHECK(read_partition(text) == p);
}

TEST_CASE("partition file errors")
{
    std::istringstream missing_header("0,0\n1,0\n");
    CHECK_THROWS_AS((void)read_partition(missing_header), ParseError);
    std::istringstream out_of_order("# k=1 n_c=2 gs=0\n1,0\n0,0\n");
    CHECK_THROWS_AS((void)read_partition(out_of_order), ParseError);
}
