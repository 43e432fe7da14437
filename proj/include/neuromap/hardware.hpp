#ifndef NEUROMAP_HARDWARE_HPP
#define NEUROMAP_HARDWARE_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace neuromap
{

enum class RoutingKind
{
    XY,
    NorthLast,
    WestFirst,
};

RoutingKind parse_routing_kind(const std::string &name);
std::string to_string(RoutingKind kind);
inline constexpr std::array<RoutingKind, 3> all_routing_kinds = {
        RoutingKind::XY, RoutingKind::NorthLast, RoutingKind::WestFirst};

enum class MulticastMode
{
    // One packet per (spike, destination crossbar).
    Replicate,
    // Reserved; rejected by the traffic compiler.
    Tree,
};

// Mesh geometry and per-hop costs. Crossbar id = y * mesh_width + x.
struct HardwareConfig
{
    std::size_t mesh_width{4};
    std::size_t mesh_height{4};
    std::size_t n_c{256};
    std::uint64_t l_w{2}; // cycles per inter-switch link
    std::uint64_t l_s{1}; // cycles per switch traversal
    double e_w{1.0};      // pJ per spike per link
    double e_s{2.0};      // pJ per spike per switch
    double cycle_ms{0.001};
    std::size_t buffer_depth{4};
    RoutingKind routing{RoutingKind::XY};
    MulticastMode multicast{MulticastMode::Replicate};

    std::size_t crossbar_count() const noexcept { return mesh_width * mesh_height; }
    // Longest minimal route, in links.
    std::size_t diameter() const noexcept
    {
        return (mesh_width - 1) + (mesh_height - 1);
    }
    // Throws ValidationError on non-positive sizes or negative costs.
    void validate() const;
};

// Smallest square mesh holding `clusters` crossbars (at least 1x1).
std::size_t square_mesh_side(std::size_t clusters);

// key=value lines (`mesh=4x4`, `n_c=256`, ...). Unknown keys are errors.
// Keys absent from the file keep the values already in `base`.
HardwareConfig read_hardware_config(std::istream &in, HardwareConfig base = {});
HardwareConfig load_hardware_config(
        const std::filesystem::path &path, HardwareConfig base = {});
void write_hardware_config(std::ostream &out, const HardwareConfig &hw);

struct CrossbarCoord
{
    int x{0};
    int y{0};

    friend bool operator==(const CrossbarCoord &, const CrossbarCoord &) = default;
};

CrossbarCoord coord_of(std::size_t crossbar, const HardwareConfig &hw);
std::size_t crossbar_id(CrossbarCoord c, const HardwareConfig &hw);
bool in_bounds(CrossbarCoord c, const HardwareConfig &hw);

inline int manhattan(CrossbarCoord a, CrossbarCoord b)
{
    return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

// North is +y, East is +x.
enum class Direction
{
    East,
    West,
    North,
    South,
    Local,
};

CrossbarCoord step(CrossbarCoord c, Direction d);
bool is_x(Direction d);

// Occupancy of the input queue that a packet would join by leaving `from`
// in direction `d`. Only consulted by the adaptive routing kinds.
using CongestionView = std::function<std::size_t(CrossbarCoord from, Direction d)>;

// Next hop at `current` toward `dst`; Local when current == dst. Always a
// productive (distance-reducing) direction. XY finishes X before Y.
// WestFirst takes every westward hop first, then adapts among East/North/
// South. NorthLast adapts among East/West/South and goes north only once
// nothing else is productive. Adaptive choices take the lower occupancy,
// ties X before Y.
Direction next_direction(CrossbarCoord current, CrossbarCoord dst,
        RoutingKind kind, const CongestionView &congestion = {});

// Full minimal path from src to dst inclusive, using `congestion` as a
// static snapshot.
std::vector<CrossbarCoord> route(CrossbarCoord src, CrossbarCoord dst,
        RoutingKind kind, const CongestionView &congestion = {});

// Switches traversed = path length.
std::size_t hop_count(const std::vector<CrossbarCoord> &path);

// Checks a produced path: contiguous unit steps, minimal length, and the
// turn restrictions of `kind`. Returns an empty string when sound, else a
// description of the first violation.
std::string check_path(const std::vector<CrossbarCoord> &path,
        CrossbarCoord src, CrossbarCoord dst, RoutingKind kind);

} // namespace neuromap

#endif
