#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <thread>

#include "neuromap/errors.hpp"
#include "neuromap/log.hpp"
#include "neuromap/placer.hpp"
#include "text_io.hpp"

namespace neuromap
{

MappingMatrix MappingMatrix::from_placement(
        const std::vector<std::size_t> &crossbar_of_cluster, std::size_t crossbars)
{
    MappingMatrix m(crossbar_of_cluster.size(), crossbars);
    for (std::size_t c = 0; c < crossbar_of_cluster.size(); ++c)
    {
        if (crossbar_of_cluster[c] >= crossbars)
        {
            throw ValidationError("cluster " + std::to_string(c) +
                    " placed on missing crossbar " +
                    std::to_string(crossbar_of_cluster[c]));
        }
        m.set(c, crossbar_of_cluster[c], true);
    }
    if (!m.valid())
    {
        throw ValidationError("placement maps two clusters to one crossbar");
    }
    return m;
}

std::size_t MappingMatrix::row_sum(std::size_t r) const
{
    std::size_t sum = 0;
    for (std::size_t c = 0; c < cols_; ++c)
    {
        sum += bits_[r * cols_ + c];
    }
    return sum;
}

std::size_t MappingMatrix::col_sum(std::size_t c) const
{
    std::size_t sum = 0;
    for (std::size_t r = 0; r < rows_; ++r)
    {
        sum += bits_[r * cols_ + c];
    }
    return sum;
}

bool MappingMatrix::valid() const
{
    for (std::size_t r = 0; r < rows_; ++r)
    {
        if (row_sum(r) != 1)
        {
            return false;
        }
    }
    for (std::size_t c = 0; c < cols_; ++c)
    {
        if (col_sum(c) > 1)
        {
            return false;
        }
    }
    return true;
}

std::vector<std::size_t> MappingMatrix::placement() const
{
    std::vector<std::size_t> result(rows_, 0);
    for (std::size_t r = 0; r < rows_; ++r)
    {
        for (std::size_t c = 0; c < cols_; ++c)
        {
            if (get(r, c))
            {
                result[r] = c;
                break;
            }
        }
    }
    return result;
}

RealMatrix MappingMatrix::as_real() const
{
    RealMatrix m(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r)
    {
        for (std::size_t c = 0; c < cols_; ++c)
        {
            m(r, c) = get(r, c) ? 1.0 : 0.0;
        }
    }
    return m;
}

MappingMatrix identity_mapping(std::size_t clusters, std::size_t crossbars)
{
    if (crossbars < clusters)
    {
        throw InfeasibleError(std::to_string(clusters) + " clusters do not fit on " +
                std::to_string(crossbars) + " crossbars");
    }
    std::vector<std::size_t> placement(clusters);
    std::iota(placement.begin(), placement.end(), std::size_t{0});
    return MappingMatrix::from_placement(placement, crossbars);
}

void PsoConfig::validate() const
{
    if (n_p == 0 || n_iso == 0)
    {
        throw ValidationError("PSO needs n_p >= 1 and n_iso >= 1");
    }
    if (!(phi1 >= 0.0) || !(phi2 >= 0.0))
    {
        throw ValidationError("PSO acceleration constants must be non-negative");
    }
    if (jobs == 0)
    {
        throw ValidationError("jobs must be at least 1");
    }
}

PsoConfig read_pso_config(std::istream &in, PsoConfig cfg)
{
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw))
    {
        ++line;
        const auto content = text::trim(raw);
        if (content.empty() || content.front() == '#')
        {
            continue;
        }
        const auto eq = content.find('=');
        if (eq == std::string_view::npos)
        {
            throw ParseError("expected key=value", line);
        }
        const std::string key(text::trim(content.substr(0, eq)));
        const std::string value(text::trim(content.substr(eq + 1)));
        if (key == "n_p")
        {
            cfg.n_p = parse_unsigned(value, line);
        }
        else if (key == "n_iso")
        {
            cfg.n_iso = parse_unsigned(value, line);
        }
        else if (key == "phi1")
        {
            cfg.phi1 = parse_real(value, line);
        }
        else if (key == "phi2")
        {
            cfg.phi2 = parse_real(value, line);
        }
        else if (key == "seed")
        {
            cfg.seed = parse_unsigned(value, line);
        }
        else if (key == "velocity_clamp")
        {
            cfg.velocity_clamp = parse_real(value, line);
        }
        else if (key == "jobs")
        {
            cfg.jobs = parse_unsigned(value, line);
        }
        else if (key == "fitness")
        {
            if (value == "cycle")
            {
                cfg.fitness_mode = FitnessMode::CycleAccurate;
            }
            else if (value == "analytic")
            {
                cfg.fitness_mode = FitnessMode::AnalyticHops;
            }
            else
            {
                throw ParseError("fitness must be cycle|analytic", line);
            }
        }
        else if (key == "bpso_orientation")
        {
            if (value == "inverted")
            {
                cfg.orientation = BinarizeOrientation::Inverted;
            }
            else if (value == "conventional")
            {
                cfg.orientation = BinarizeOrientation::Conventional;
            }
            else
            {
                throw ParseError("bpso_orientation must be inverted|conventional", line);
            }
        }
        else
        {
            throw ParseError("unknown PSO key '" + key + "'", line);
        }
    }
    cfg.validate();
    return cfg;
}

PsoConfig load_pso_config(const std::filesystem::path &path, PsoConfig base)
{
    auto in = text::open_input(path);
    return read_pso_config(in, base);
}

void write_pso_config(std::ostream &out, const PsoConfig &cfg)
{
    out << "n_p=" << cfg.n_p << '\n'
        << "n_iso=" << cfg.n_iso << '\n'
        << "phi1=" << format_real(cfg.phi1) << '\n'
        << "phi2=" << format_real(cfg.phi2) << '\n'
        << "seed=" << cfg.seed << '\n'
        << "fitness="
        << (cfg.fitness_mode == FitnessMode::CycleAccurate ? "cycle" : "analytic")
        << '\n'
        << "bpso_orientation="
        << (cfg.orientation == BinarizeOrientation::Inverted ? "inverted" : "conventional")
        << '\n'
        << "velocity_clamp=" << format_real(cfg.velocity_clamp) << '\n';
}

double sigmoid(double v)
{
    return 1.0 / (1.0 + std::exp(-v));
}

SwarmState init_swarm(std::size_t clusters, std::size_t crossbars, const PsoConfig &cfg)
{
    cfg.validate();
    if (crossbars < clusters)
    {
        throw InfeasibleError(std::to_string(clusters) + " clusters do not fit on " +
                std::to_string(crossbars) + " crossbars");
    }
    SwarmState swarm;
    swarm.particles.resize(cfg.n_p);
    for (std::size_t l = 0; l < cfg.n_p; ++l)
    {
        Particle &p = swarm.particles[l];
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed),
                static_cast<std::uint32_t>(cfg.seed >> 32),
                static_cast<std::uint32_t>(l)};
        p.rng.seed(seq);
        std::vector<std::size_t> order(crossbars);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), p.rng);
        order.resize(clusters);
        p.binary = MappingMatrix::from_placement(order, crossbars);
        p.position = p.binary.as_real();
        p.velocity = RealMatrix(clusters, crossbars, 0.0);
        p.best = p.binary;
    }
    return swarm;
}

void update_velocity_position(
        Particle &particle, const MappingMatrix &g_best, const PsoConfig &cfg)
{
    RealMatrix &x = particle.position;
    RealMatrix &v = particle.velocity;
    for (std::size_t r = 0; r < x.rows(); ++r)
    {
        for (std::size_t c = 0; c < x.cols(); ++c)
        {
            const double p_best = particle.best.get(r, c) ? 1.0 : 0.0;
            const double global = g_best.get(r, c) ? 1.0 : 0.0;
            double updated = v(r, c) + cfg.phi1 * (p_best - x(r, c)) +
                    cfg.phi2 * (global - x(r, c));
            if (cfg.velocity_clamp > 0.0)
            {
                updated = std::clamp(updated, -cfg.velocity_clamp, cfg.velocity_clamp);
            }
            v(r, c) = updated;
            x(r, c) += updated;
        }
    }
    particle.binary = binarize(v, particle.rng, cfg.orientation);
}

MappingMatrix binarize(const RealMatrix &velocity, std::mt19937_64 &rng,
        BinarizeOrientation orientation)
{
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    MappingMatrix raw(velocity.rows(), velocity.cols());
    for (std::size_t r = 0; r < velocity.rows(); ++r)
    {
        for (std::size_t c = 0; c < velocity.cols(); ++c)
        {
            const bool below = uniform(rng) < sigmoid(velocity(r, c));
            raw.set(r, c, orientation == BinarizeOrientation::Inverted ? !below : below);
        }
    }
    return repair(raw, velocity);
}

MappingMatrix repair(const MappingMatrix &raw, const RealMatrix &velocity)
{
    const std::size_t rows = raw.clusters();
    const std::size_t cols = raw.crossbars();
    if (cols < rows)
    {
        throw InfeasibleError("cannot repair a mapping with fewer crossbars than clusters");
    }
    // Sigmoid is monotone, so comparing velocities ranks by sigmoid(v).
    const auto better = [&](std::size_t r, std::size_t a, std::size_t b) {
        return velocity(r, a) > velocity(r, b) || (velocity(r, a) == velocity(r, b) && a < b);
    };

    std::vector<std::optional<std::size_t>> chosen(rows);
    for (std::size_t r = 0; r < rows; ++r)
    {
        for (std::size_t c = 0; c < cols; ++c)
        {
            if (raw.get(r, c) && (!chosen[r] || better(r, c, *chosen[r])))
            {
                chosen[r] = c;
            }
        }
    }
    std::vector<std::optional<std::size_t>> owner(cols);
    for (std::size_t r = 0; r < rows; ++r)
    {
        if (!chosen[r])
        {
            continue;
        }
        const std::size_t c = *chosen[r];
        if (!owner[c])
        {
            owner[c] = r;
            continue;
        }
        const std::size_t other = *owner[c];
        if (velocity(r, c) > velocity(other, c))
        {
            chosen[other].reset();
            owner[c] = r;
        }
        else
        {
            chosen[r].reset();
        }
    }
    for (std::size_t r = 0; r < rows; ++r)
    {
        if (chosen[r])
        {
            continue;
        }
        std::optional<std::size_t> pick;
        for (std::size_t c = 0; c < cols; ++c)
        {
            if (!owner[c] && (!pick || better(r, c, *pick)))
            {
                pick = c;
            }
        }
        chosen[r] = *pick;
        owner[*pick] = r;
    }
    MappingMatrix repaired(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
    {
        repaired.set(r, *chosen[r], true);
    }
    return repaired;
}

PlacementProblem::PlacementProblem(const Partition &partition,
        const SynapseTrace &trace, const HardwareConfig &hw)
        : hw_(hw)
        , plan_(partition, trace, hw)
{
    hw_.validate();
    if (hw_.crossbar_count() < partition.cluster_count())
    {
        throw InfeasibleError(std::to_string(partition.cluster_count()) +
                " clusters do not fit on a " + std::to_string(hw_.mesh_width) + "x" +
                std::to_string(hw_.mesh_height) + " mesh");
    }
}

double PlacementProblem::fitness(const MappingMatrix &mapping, FitnessMode mode) const
{
    if (!mapping.valid())
    {
        throw ValidationError("fitness requires a valid mapping");
    }
    const auto placement = mapping.placement();
    if (mode == FitnessMode::CycleAccurate)
    {
        const SimReport report = simulate_plan(plan_, placement, hw_);
        if (report.n_s() == 0)
        {
            return 0.0;
        }
        return static_cast<double>(report.total_hops) / static_cast<double>(report.n_s());
    }
    const std::size_t k = plan_.cluster_count();
    const auto &pairs = plan_.pair_packets();
    std::uint64_t packets = 0;
    std::uint64_t hops = 0;
    for (std::size_t a = 0; a < k; ++a)
    {
        const CrossbarCoord from = coord_of(placement[a], hw_);
        for (std::size_t b = 0; b < k; ++b)
        {
            const std::uint64_t count = pairs[a * k + b];
            if (count == 0)
            {
                continue;
            }
            const auto h = static_cast<std::uint64_t>(
                    manhattan(from, coord_of(placement[b], hw_)) + 1);
            packets += count;
            hops += count * h;
        }
    }
    if (packets == 0)
    {
        return 0.0;
    }
    return static_cast<double>(hops) / static_cast<double>(packets);
}

SimReport PlacementProblem::simulate(
        const MappingMatrix &mapping, const SimOptions &options) const
{
    return simulate_plan(plan_, mapping.placement(), hw_, options);
}

namespace
{

template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn &&fn)
{
    jobs = std::min(jobs, count);
    if (jobs <= 1)
    {
        for (std::size_t i = 0; i < count; ++i)
        {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < jobs; ++w)
    {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++)
            {
                fn(i);
            }
        });
    }
}

} // namespace

PsoResult run_pso(const PlacementProblem &problem, const PsoConfig &cfg,
        const SwarmObserver &observer)
{
    SwarmState swarm = init_swarm(problem.clusters(), problem.crossbars(), cfg);
    // Mappings repeat as the swarm converges; simulation is deterministic.
    std::map<std::vector<std::size_t>, double> cache;
    PsoResult result;
    result.history.reserve(cfg.n_iso);

    for (std::size_t it = 0; it < cfg.n_iso; ++it)
    {
        std::vector<std::vector<std::size_t>> placements;
        placements.reserve(swarm.particles.size());
        std::vector<std::vector<std::size_t>> pending;
        for (const Particle &p : swarm.particles)
        {
            placements.push_back(p.binary.placement());
            if (!cache.contains(placements.back()) &&
                    std::find(pending.begin(), pending.end(), placements.back()) ==
                            pending.end())
            {
                pending.push_back(placements.back());
            }
        }
        std::vector<double> scores(pending.size());
        parallel_for(pending.size(), cfg.jobs, [&](std::size_t i) {
            scores[i] = problem.fitness(
                    MappingMatrix::from_placement(pending[i], problem.crossbars()),
                    cfg.fitness_mode);
        });
        for (std::size_t i = 0; i < pending.size(); ++i)
        {
            cache.emplace(pending[i], scores[i]);
        }

        for (std::size_t l = 0; l < swarm.particles.size(); ++l)
        {
            Particle &p = swarm.particles[l];
            const double f = cache.at(placements[l]);
            if (f < p.best_fitness)
            {
                p.best = p.binary;
                p.best_fitness = f;
            }
            if (p.best_fitness < swarm.g_best_fitness)
            {
                swarm.g_best = p.best;
                swarm.g_best_fitness = p.best_fitness;
            }
        }
        result.history.push_back(swarm.g_best_fitness);
        log().debug("pso iteration {} g_best={}", it, swarm.g_best_fitness);

        if (it + 1 < cfg.n_iso)
        {
            for (Particle &p : swarm.particles)
            {
                update_velocity_position(p, swarm.g_best, cfg);
            }
        }
        if (observer)
        {
            observer(it, swarm);
        }
    }
    result.mapping = swarm.g_best;
    result.fitness = swarm.g_best_fitness;
    return result;
}

PlacementOptimum brute_force_placement(const PlacementProblem &problem, FitnessMode mode)
{
    const std::size_t k = problem.clusters();
    const std::size_t v = problem.crossbars();
    double count = 1.0;
    for (std::size_t i = 0; i < k; ++i)
    {
        count *= static_cast<double>(v - i);
    }
    if (count > static_cast<double>(brute_force_placement_limit))
    {
        throw ValidationError("brute-force placement would enumerate " +
                format_real(count) + " mappings (limit " +
                std::to_string(brute_force_placement_limit) + ")");
    }
    PlacementOptimum best;
    std::vector<std::size_t> placement(k, 0);
    std::vector<char> used(v, 0);
    std::function<void(std::size_t)> descend = [&](std::size_t cluster) {
        if (cluster == k)
        {
            const auto mapping = MappingMatrix::from_placement(placement, v);
            const double f = problem.fitness(mapping, mode);
            if (f < best.fitness)
            {
                best.fitness = f;
                best.mapping = mapping;
            }
            return;
        }
        for (std::size_t xb = 0; xb < v; ++xb)
        {
            if (used[xb])
            {
                continue;
            }
            used[xb] = 1;
            placement[cluster] = xb;
            descend(cluster + 1);
            used[xb] = 0;
        }
    };
    descend(0);
    return best;
}

void write_mapping(std::ostream &out, const MappingMatrix &mapping,
        const HardwareConfig &hw, double fitness, std::size_t iterations,
        std::uint64_t seed)
{
    out << "# fitness=" << format_real(fitness) << " iterations=" << iterations
        << " seed=" << seed << '\n';
    const auto placement = mapping.placement();
    for (std::size_t c = 0; c < placement.size(); ++c)
    {
        const CrossbarCoord xy = coord_of(placement[c], hw);
        out << c << ',' << xy.x << ',' << xy.y << '\n';
    }
}

void save_mapping(const std::filesystem::path &path, const MappingMatrix &mapping,
        const HardwareConfig &hw, double fitness, std::size_t iterations,
        std::uint64_t seed)
{
    auto out = text::open_output(path);
    write_mapping(out, mapping, hw, fitness, iterations, seed);
}

MappingMatrix read_mapping(std::istream &in, const HardwareConfig &hw)
{
    std::vector<std::size_t> placement;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw))
    {
        ++line;
        const auto content = text::trim(raw);
        if (content.empty() || content.front() == '#')
        {
            continue;
        }
        const auto fields = text::split(content);
        text::expect_fields(fields, 3, line);
        const auto cluster = parse_unsigned(fields[0], line);
        const CrossbarCoord xy{static_cast<int>(parse_unsigned(fields[1], line)),
                static_cast<int>(parse_unsigned(fields[2], line))};
        if (cluster != placement.size())
        {
            throw ParseError("mapping rows must list clusters 0,1,2,... in order", line);
        }
        if (!in_bounds(xy, hw))
        {
            throw ParseError("crossbar outside the configured mesh", line);
        }
        placement.push_back(crossbar_id(xy, hw));
    }
    return MappingMatrix::from_placement(placement, hw.crossbar_count());
}

MappingMatrix load_mapping(const std::filesystem::path &path, const HardwareConfig &hw)
{
    auto in = text::open_input(path);
    return read_mapping(in, hw);
}

} // namespace neuromap
