#ifndef NEUROMAP_PLACER_HPP
#define NEUROMAP_PLACER_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "neuromap/hardware.hpp"
#include "neuromap/noc_sim.hpp"
#include "neuromap/partition.hpp"
#include "neuromap/snn.hpp"

namespace neuromap
{

// Dense row-major real matrix, clusters x crossbars.
class RealMatrix
{
public:
    RealMatrix() = default;
    RealMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
            : rows_(rows), cols_(cols), data_(rows * cols, fill)
    {
    }
    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    const std::vector<double> &data() const noexcept { return data_; }

    friend bool operator==(const RealMatrix &, const RealMatrix &) = default;

private:
    std::size_t rows_{0};
    std::size_t cols_{0};
    std::vector<double> data_;
};

// Binary cluster -> crossbar assignment. valid() holds when every row has
// exactly one 1 and every column at most one.
class MappingMatrix
{
public:
    MappingMatrix() = default;
    MappingMatrix(std::size_t clusters, std::size_t crossbars)
            : rows_(clusters), cols_(crossbars), bits_(clusters * crossbars, 0)
    {
    }
    // Throws ValidationError unless the placement is an injection.
    static MappingMatrix from_placement(
            const std::vector<std::size_t> &crossbar_of_cluster, std::size_t crossbars);

    std::size_t clusters() const noexcept { return rows_; }
    std::size_t crossbars() const noexcept { return cols_; }
    bool get(std::size_t r, std::size_t c) const { return bits_[r * cols_ + c] != 0; }
    void set(std::size_t r, std::size_t c, bool value)
    {
        bits_[r * cols_ + c] = value ? 1 : 0;
    }
    std::size_t row_sum(std::size_t r) const;
    std::size_t col_sum(std::size_t c) const;
    bool valid() const;
    // Crossbar of every cluster; requires valid().
    std::vector<std::size_t> placement() const;
    RealMatrix as_real() const;

    friend bool operator==(const MappingMatrix &, const MappingMatrix &) = default;

private:
    std::size_t rows_{0};
    std::size_t cols_{0};
    std::vector<std::uint8_t> bits_;
};

enum class FitnessMode
{
    // Average hops per delivered packet from the mesh simulator.
    CycleAccurate,
    // Packet-weighted mean of manhattan + 1, no simulation.
    AnalyticHops,
};

enum class BinarizeOrientation
{
    // bit = 0 when rand() < sigmoid(v).
    Inverted,
    // bit = 1 when rand() < sigmoid(v).
    Conventional,
};

struct PsoConfig
{
    std::size_t n_p{20};
    std::size_t n_iso{100};
    double phi1{0.8};
    double phi2{0.8};
    std::uint64_t seed{1};
    FitnessMode fitness_mode{FitnessMode::CycleAccurate};
    BinarizeOrientation orientation{BinarizeOrientation::Inverted};
    // |v| is clamped to this bound after each update; <= 0 disables.
    double velocity_clamp{6.0};
    // Fitness evaluations run on this many threads.
    std::size_t jobs{1};

    void validate() const;
};

PsoConfig read_pso_config(std::istream &in, PsoConfig base = {});
PsoConfig load_pso_config(const std::filesystem::path &path, PsoConfig base = {});
void write_pso_config(std::ostream &out, const PsoConfig &cfg);

inline constexpr double unevaluated = std::numeric_limits<double>::infinity();

struct Particle
{
    RealMatrix position;
    RealMatrix velocity;
    MappingMatrix binary;
    MappingMatrix best;
    double best_fitness{unevaluated};
    std::mt19937_64 rng;
};

struct SwarmState
{
    std::vector<Particle> particles;
    MappingMatrix g_best;
    double g_best_fitness{unevaluated};
};

double sigmoid(double v);

// Uniform random injection per particle, zero velocity, position equal to
// the binary matrix. Each particle draws from its own stream seeded by
// (cfg.seed, particle index). Throws InfeasibleError when crossbars < k.
SwarmState init_swarm(std::size_t clusters, std::size_t crossbars, const PsoConfig &cfg);

// V += phi1 (P_best - X) + phi2 (G_best - X), clamped; X += V; then the
// binary position is redrawn from V. X is the real-valued position and the
// bests enter as 0/1 matrices.
void update_velocity_position(
        Particle &particle, const MappingMatrix &g_best, const PsoConfig &cfg);

// Per-entry draw against sigmoid(v) in row-major order, then repair.
MappingMatrix binarize(const RealMatrix &velocity, std::mt19937_64 &rng,
        BinarizeOrientation orientation);

// Enforces one 1 per row and at most one per column, keeping entries with
// the highest sigmoid(v) (ties to the lowest index). Valid input is
// returned unchanged.
MappingMatrix repair(const MappingMatrix &raw, const RealMatrix &velocity);

// Placement fitness over a partitioned, traced network.
class PlacementProblem
{
public:
    PlacementProblem(const Partition &partition, const SynapseTrace &trace,
            const HardwareConfig &hw);

    std::size_t clusters() const noexcept { return plan_.cluster_count(); }
    std::size_t crossbars() const noexcept { return hw_.crossbar_count(); }
    const HardwareConfig &hardware() const noexcept { return hw_; }
    const TrafficPlan &plan() const noexcept { return plan_; }

    // Average hops per packet; 0 when there is no global traffic.
    double fitness(const MappingMatrix &mapping, FitnessMode mode) const;
    SimReport simulate(const MappingMatrix &mapping, const SimOptions &options = {}) const;

private:
    HardwareConfig hw_;
    TrafficPlan plan_;
};

struct PsoResult
{
    MappingMatrix mapping;
    double fitness{unevaluated};
    // g_best fitness after each iteration.
    std::vector<double> history;
};

// Called after every iteration's binarize step with the swarm state.
using SwarmObserver = std::function<void(std::size_t iteration, const SwarmState &)>;

PsoResult run_pso(const PlacementProblem &problem, const PsoConfig &cfg,
        const SwarmObserver &observer = {});

struct PlacementOptimum
{
    MappingMatrix mapping;
    double fitness{unevaluated};
};

inline constexpr std::size_t brute_force_placement_limit = 1'000'000;

// Exhaustive search over all injections (lexicographic order, first
// minimum kept). Throws ValidationError above brute_force_placement_limit.
PlacementOptimum brute_force_placement(const PlacementProblem &problem, FitnessMode mode);

MappingMatrix identity_mapping(std::size_t clusters, std::size_t crossbars);

// `# fitness=<real> iterations=<int> seed=<int>` then
// `cluster,crossbar_x,crossbar_y` rows.
void write_mapping(std::ostream &out, const MappingMatrix &mapping,
        const HardwareConfig &hw, double fitness, std::size_t iterations,
        std::uint64_t seed);
void save_mapping(const std::filesystem::path &path, const MappingMatrix &mapping,
        const HardwareConfig &hw, double fitness, std::size_t iterations,
        std::uint64_t seed);
MappingMatrix read_mapping(std::istream &in, const HardwareConfig &hw);
MappingMatrix load_mapping(const std::filesystem::path &path, const HardwareConfig &hw);

} // namespace neuromap

#endif
