#include <numeric>
#include <random>
#include <sstream>

#include <doctest.h>

#include "neuromap/errors.hpp"
#include "neuromap/placer.hpp"
#include "oracles.hpp"

using namespace neuromap;

namespace
{

struct Instance
{
    SnnGraph graph;
    SpikeTrace trace;
    Partition partition;
    SynapseTrace synapses;
};

// Random traffic between k clusters of `per` neurons each.
Instance random_instance(std::size_t k, std::size_t per, std::uint64_t seed, double density = 0.3)
{
    std::mt19937_64 rng(seed);
    const std::size_t n = k * per;
    const SnnGraph shape = oracle::random_graph(n, density, 1, rng);
    std::uniform_real_distribution<double> when(0.0, 20.0);
    std::uniform_int_distribution<int> count(0, 4);
    std::vector<SpikeEvent> events;
    for (std::uint32_t i = 0; i < n; ++i)
    {
        for (int s = count(rng); s > 0; --s)
        {
            events.push_back({i, when(rng)});
        }
    }
    Instance inst;
    inst.trace = SpikeTrace(20.0, events);
    inst.graph = with_trace_weights(shape, inst.trace);
    std::vector<ClusterId> assignment(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        assignment[i] = static_cast<ClusterId>(i / per);
    }
    inst.partition = Partition(k, per, assignment);
    inst.synapses = SynapseTrace(inst.graph, inst.trace);
    return inst;
}

HardwareConfig mesh(std::size_t w, std::size_t h)
{
    HardwareConfig hw;
    hw.mesh_width = w;
    hw.mesh_height = h;
    return hw;
}

std::vector<std::uint64_t> spikes_per_neuron(const Instance &inst)
{
    std::vector<std::uint64_t> spikes(inst.graph.neuron_count(), 0);
    for (const auto &e : inst.trace.events())
    {
        ++spikes[e.neuron];
    }
    return spikes;
}

} // namespace

TEST_CASE("mapping matrix constraints")
{
    MappingMatrix m = MappingMatrix::from_placement({2, 0}, 3);
    CHECK(m.valid());
    CHECK(m.get(0, 2));
    CHECK(m.row_sum(1) == 1);
    CHECK(m.col_sum(1) == 0);
    CHECK(m.placement() == std::vector<std::size_t>{2, 0});
    m.set(1, 2, true);
    CHECK_FALSE(m.valid());
    CHECK_THROWS_AS((void)MappingMatrix::from_placement({1, 1}, 3), ValidationError);
    CHECK_THROWS_AS((void)MappingMatrix::from_placement({3}, 3), ValidationError);
}

TEST_CASE("sigmoid")
{
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(40.0) > 0.999999);
    CHECK(sigmoid(-40.0) < 1e-6);
}

TEST_CASE("velocity update arithmetic")
{
    PsoConfig cfg;
    cfg.phi1 = 1.0;
    cfg.phi2 = 1.0;
    cfg.velocity_clamp = 0.0;
    Particle p;
    p.position = RealMatrix(1, 1, 0.0);
    p.velocity = RealMatrix(1, 1, 0.0);
    p.best = MappingMatrix::from_placement({0}, 1);
    p.rng.seed(1);
    update_velocity_position(p, p.best, cfg);
    CHECK(p.velocity(0, 0) == 2.0);
    CHECK(p.position(0, 0) == 2.0);
    CHECK(p.binary.valid());
}

TEST_CASE("zero acceleration is a fixed point")
{
    PsoConfig cfg;
    cfg.phi1 = 0.0;
    cfg.phi2 = 0.0;
    Particle p;
    p.position = RealMatrix(2, 3, 0.25);
    p.velocity = RealMatrix(2, 3, 0.0);
    p.best = MappingMatrix::from_placement({0, 1}, 3);
    update_velocity_position(p, MappingMatrix::from_placement({2, 1}, 3), cfg);
    CHECK(p.velocity == RealMatrix(2, 3, 0.0));
    CHECK(p.position == RealMatrix(2, 3, 0.25));
}

TEST_CASE("position equal to both bests leaves velocity unchanged")
{
    PsoConfig cfg;
    Particle p;
    const MappingMatrix best = MappingMatrix::from_placement({1, 0}, 2);
    p.position = best.as_real();
    p.velocity = RealMatrix(2, 2, 0.5);
    p.best = best;
    update_velocity_position(p, best, cfg);
    CHECK(p.velocity == RealMatrix(2, 2, 0.5));
}

TEST_CASE("velocity clamp")
{
    PsoConfig cfg;
    cfg.phi1 = 10.0;
    cfg.phi2 = 10.0;
    Particle p;
    p.position = RealMatrix(1, 2, 0.0);
    p.velocity = RealMatrix(1, 2, 0.0);
    p.best = MappingMatrix::from_placement({0}, 2);
    update_velocity_position(p, p.best, cfg);
    CHECK(p.velocity(0, 0) == cfg.velocity_clamp);
}

TEST_CASE("binarize orientation")
{
    std::mt19937_64 rng(4);
    // Large positive velocity: inverted orientation draws 0 almost surely, so
    // only repair fills the rows; conventional draws 1.
    RealMatrix v(3, 3, 30.0);
    v(0, 2) = 31.0;
    const MappingMatrix inverted = binarize(v, rng, BinarizeOrientation::Inverted);
    CHECK(inverted.valid());
    const MappingMatrix conventional = binarize(v, rng, BinarizeOrientation::Conventional);
    CHECK(conventional.valid());
    // Every raw bit is set; row 0 keeps its highest velocity column.
    CHECK(conventional.get(0, 2));
}

TEST_CASE("repair contract")
{
    SUBCASE("valid input is unchanged")
    {
        const MappingMatrix m = MappingMatrix::from_placement({1, 3, 0}, 4);
        CHECK(repair(m, RealMatrix(3, 4, 0.0)) == m);
    }
    SUBCASE("all zeros become a permutation")
    {
        RealMatrix v(2, 2, 0.0);
        v(0, 1) = 1.0;
        const MappingMatrix m = repair(MappingMatrix(2, 2), v);
        CHECK(m.valid());
        CHECK(m.get(0, 1));
        CHECK(m.get(1, 0));
    }
    SUBCASE("two rows claiming one column")
    {
        MappingMatrix raw(2, 3);
        raw.set(0, 1, true);
        raw.set(1, 1, true);
        RealMatrix v(2, 3, 0.0);
        v(1, 1) = 2.0;
        v(0, 2) = 1.0;
        const MappingMatrix m = repair(raw, v);
        CHECK(m.valid());
        CHECK(m.get(1, 1));
        CHECK(m.get(0, 2));
    }
    SUBCASE("row with several ones keeps the highest")
    {
        MappingMatrix raw(1, 3);
        raw.set(0, 0, true);
        raw.set(0, 2, true);
        RealMatrix v(1, 3, 0.0);
        v(0, 2) = 0.5;
        CHECK(repair(raw, v).get(0, 2));
    }
    SUBCASE("random raw matrices always repair to valid mappings")
    {
        std::mt19937_64 rng(9);
        std::normal_distribution<double> normal(0.0, 2.0);
        for (int trial = 0; trial < 200; ++trial)
        {
            const std::size_t rows = 1 + trial % 5;
            const std::size_t cols = rows + trial % 4;
            MappingMatrix raw(rows, cols);
            RealMatrix v(rows, cols);
            for (std::size_t r = 0; r < rows; ++r)
            {
                for (std::size_t c = 0; c < cols; ++c)
                {
                    raw.set(r, c, rng() % 2 == 0);
                    v(r, c) = normal(rng);
                }
            }
            CHECK(repair(raw, v).valid());
        }
    }
}

TEST_CASE("init_swarm")
{
    PsoConfig cfg;
    cfg.n_p = 8;
    SUBCASE("k equals v gives permutations")
    {
        const SwarmState s = init_swarm(4, 4, cfg);
        REQUIRE(s.particles.size() == 8);
        for (const Particle &p : s.particles)
        {
            CHECK(p.binary.valid());
            for (std::size_t c = 0; c < 4; ++c)
            {
                CHECK(p.binary.col_sum(c) == 1);
            }
            CHECK(p.velocity == RealMatrix(4, 4, 0.0));
            CHECK(p.position == p.binary.as_real());
        }
    }
    SUBCASE("k less than v")
    {
        for (const Particle &p : init_swarm(3, 9, cfg).particles)
        {
            CHECK(p.binary.valid());
        }
    }
    SUBCASE("one by one")
    {
        const SwarmState s = init_swarm(1, 1, cfg);
        CHECK(s.particles[0].binary.get(0, 0));
    }
    SUBCASE("deterministic per seed")
    {
        const SwarmState a = init_swarm(3, 9, cfg);
        const SwarmState b = init_swarm(3, 9, cfg);
        for (std::size_t l = 0; l < cfg.n_p; ++l)
        {
            CHECK(a.particles[l].binary == b.particles[l].binary);
        }
    }
    SUBCASE("infeasible")
    {
        CHECK_THROWS_AS((void)init_swarm(5, 4, cfg), InfeasibleError);
    }
}

TEST_CASE("fitness examples")
{
    // One global synapse between two clusters.
    SnnGraph g(2, {{0, 1, 3}});
    SpikeTrace t(10.0, {{0, 1.0}, {0, 2.0}, {0, 3.0}});
    const SynapseTrace st(g, t);
    const Partition p(2, 1, {0, 1});
    const PlacementProblem problem(p, st, mesh(2, 2));
    const auto adjacent = MappingMatrix::from_placement({0, 1}, 4);
    const auto diagonal = MappingMatrix::from_placement({0, 3}, 4);
    CHECK(problem.fitness(adjacent, FitnessMode::AnalyticHops) == 2.0);
    CHECK(problem.fitness(adjacent, FitnessMode::CycleAccurate) == 2.0);
    CHECK(problem.fitness(diagonal, FitnessMode::AnalyticHops) == 3.0);

    const PlacementOptimum best = brute_force_placement(problem, FitnessMode::AnalyticHops);
    CHECK(best.fitness == 2.0);

    // No global spikes.
    const Partition together(1, 2, {0, 0});
    const PlacementProblem local(together, st, mesh(2, 2));
    CHECK(local.fitness(MappingMatrix::from_placement({3}, 4), FitnessMode::CycleAccurate) ==
            0.0);
    CHECK(brute_force_placement(local, FitnessMode::AnalyticHops).fitness == 0.0);

    CHECK_THROWS_AS(PlacementProblem(p, st, mesh(1, 1)), InfeasibleError);
}

TEST_CASE("analytic fitness matches an independent computation and the simulator")
{
    for (std::uint64_t seed = 1; seed <= 8; ++seed)
    {
        const Instance inst = random_instance(5, 3, seed);
        for (RoutingKind kind : all_routing_kinds)
        {
            HardwareConfig hw = mesh(3, 3);
            hw.routing = kind;
            hw.buffer_depth = 1 + seed % 3;
            const PlacementProblem problem(inst.partition, inst.synapses, hw);
            const auto packets = oracle::pair_packets(inst.graph.neuron_count(),
                    oracle::edges_of(inst.graph), spikes_per_neuron(inst),
                    {inst.partition.assignment().begin(), inst.partition.assignment().end()}, 5);
            std::mt19937_64 rng(seed);
            for (int trial = 0; trial < 5; ++trial)
            {
                std::vector<std::size_t> order(9);
                std::iota(order.begin(), order.end(), 0);
                std::shuffle(order.begin(), order.end(), rng);
                order.resize(5);
                const auto m = MappingMatrix::from_placement(order, 9);
                const double analytic = problem.fitness(m, FitnessMode::AnalyticHops);
                CHECK(analytic == doctest::Approx(oracle::analytic_hops(packets, 5, order, 3)));
                CHECK(problem.fitness(m, FitnessMode::CycleAccurate) == analytic);
            }
        }
    }
}

TEST_CASE("brute force placement agrees with exhaustive oracle")
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
    {
        const Instance inst = random_instance(4, 2, seed);
        const HardwareConfig hw = mesh(3, 2);
        const PlacementProblem problem(inst.partition, inst.synapses, hw);
        const auto packets = oracle::pair_packets(inst.graph.neuron_count(),
                oracle::edges_of(inst.graph), spikes_per_neuron(inst),
                {inst.partition.assignment().begin(), inst.partition.assignment().end()}, 4);
        double best = std::numeric_limits<double>::infinity();
        oracle::for_each_injection(4, 6, [&](const std::vector<std::size_t> &place) {
            best = std::min(best, oracle::analytic_hops(packets, 4, place, 3));
        });
        CHECK(brute_force_placement(problem, FitnessMode::AnalyticHops).fitness ==
                doctest::Approx(best));
    }
    const Instance big = random_instance(7, 1, 1);
    const PlacementProblem huge(big.partition, big.synapses, mesh(4, 4));
    CHECK_THROWS_AS((void)brute_force_placement(huge, FitnessMode::AnalyticHops), ValidationError);
}

TEST_CASE("run_pso invariants")
{
    const Instance inst = random_instance(6, 2, 3);
    const PlacementProblem problem(inst.partition, inst.synapses, mesh(3, 3));
    PsoConfig cfg;
    cfg.n_p = 10;
    cfg.n_iso = 30;
    std::size_t observed = 0;
    const PsoResult r = run_pso(problem, cfg, [&](std::size_t, const SwarmState &s) {
        ++observed;
        double min_best = std::numeric_limits<double>::infinity();
        for (const Particle &p : s.particles)
        {
            CHECK(p.binary.valid());
            min_best = std::min(min_best, p.best_fitness);
        }
        CHECK(s.g_best_fitness == min_best);
    });
    CHECK(observed == 30);
    REQUIRE(r.history.size() == 30);
    for (std::size_t i = 1; i < r.history.size(); ++i)
    {
        CHECK(r.history[i] <= r.history[i - 1]);
    }
    CHECK(r.fitness == r.history.back());
    CHECK(r.mapping.valid());
    CHECK(problem.fitness(r.mapping, FitnessMode::CycleAccurate) == r.fitness);
    CHECK(brute_force_placement(problem, FitnessMode::AnalyticHops).fitness <= r.fitness);
}

TEST_CASE("run_pso is deterministic and independent of jobs")
{
    const Instance inst = random_instance(5, 2, 7);
    const PlacementProblem problem(inst.partition, inst.synapses, mesh(3, 2));
    PsoConfig cfg;
    cfg.n_p = 6;
    cfg.n_iso = 15;
    const PsoResult a = run_pso(problem, cfg);
    cfg.jobs = 3;
    const PsoResult b = run_pso(problem, cfg);
    CHECK(a.mapping == b.mapping);
    CHECK(a.history == b.history);
}

TEST_CASE("two clusters on a 1x2 mesh")
{
    const Instance inst = random_instance(2, 3, 2, 0.6);
    const PlacementProblem problem(inst.partition, inst.synapses, mesh(2, 1));
    PsoConfig cfg;
    cfg.n_p = 3;
    cfg.n_iso = 3;
    const PsoResult r = run_pso(problem, cfg);
    CHECK(r.fitness == problem.fitness(identity_mapping(2, 2), FitnessMode::AnalyticHops));
}

TEST_CASE("pso config file")
{
    PsoConfig cfg;
    cfg.n_p = 7;
    cfg.phi1 = 0.3;
    cfg.fitness_mode = FitnessMode::AnalyticHops;
    cfg.orientation = BinarizeOrientation::Conventional;
    std::stringstream text;
    write_pso_config(text, cfg);
    const PsoConfig back = read_pso_config(text);
    CHECK(back.n_p == 7);
    CHECK(back.phi1 == 0.3);
    CHECK(back.fitness_mode == FitnessMode::AnalyticHops);
    CHECK(back.orientation == BinarizeOrientation::Conventional);

    std::istringstream bad("n_p=0\n");
    CHECK_THROWS_AS((void)read_pso_config(bad), ValidationError);
    std::istringstream unknown("inertia=0.7\n");
    CHECK_THROWS_AS((void)read_pso_config(unknown), ParseError);
}

TEST_CASE("mapping file round trip")
{
    const HardwareConfig hw = mesh(3, 2);
    const auto m = MappingMatrix::from_placement({4, 0, 2}, 6);
    std::stringstream text;
    write_mapping(text, m, hw, 2.5, 100, 9);
    CHECK(text.str() == "# fitness=2.5 iterations=100 seed=9\n0,1,1\n1,0,0\n2,2,0\n");
    CHECK(read_mapping(text, hw) == m);

    std::istringstream clash("# fitness=1 iterations=1 seed=1\n0,0,0\n1,0,0\n");
    CHECK_THROWS_AS((void)read_mapping(clash, hw), ValidationError);
    std::istringstream outside("# fitness=1 iterations=1 seed=1\n0,5,0\n");
    CHECK_THROWS_AS((void)read_mapping(outside, hw), ParseError);
}

TEST_CASE("short PSO runs still find the optimum on oracle-sized instances")
{
    std::size_t hits = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed)
    {
        const Instance inst = random_instance(4, 3, 500 + seed);
        const PlacementProblem problem(inst.partition, inst.synapses, mesh(2, 2));
        PsoConfig cfg;
        cfg.n_iso = 50;
        cfg.seed = seed;
        const double best = brute_force_placement(problem, FitnessMode::AnalyticHops).fitness;
        hits += run_pso(problem, cfg).fitness == doctest::Approx(best) ? 1 : 0;
    }
    CHECK(hits >= 45);
}
