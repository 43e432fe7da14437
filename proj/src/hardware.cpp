#include <cmath>
#include <istream>
#include <ostream>

#include "neuromap/errors.hpp"
#include "neuromap/hardware.hpp"
#include "neuromap/snn.hpp"
#include "text_io.hpp"

namespace neuromap
{

RoutingKind parse_routing_kind(const std::string &name)
{
    if (name == "xy")
    {
        return RoutingKind::XY;
    }
    if (name == "northlast")
    {
        return RoutingKind::NorthLast;
    }
    if (name == "westfirst")
    {
        return RoutingKind::WestFirst;
    }
    throw ValidationError("unknown routing '" + name +
            "' (expected xy|northlast|westfirst)");
}

std::string to_string(RoutingKind kind)
{
    switch (kind)
    {
    case RoutingKind::XY:
        return "xy";
    case RoutingKind::NorthLast:
        return "northlast";
    case RoutingKind::WestFirst:
        return "westfirst";
    }
    return "unknown";
}

void HardwareConfig::validate() const
{
    if (mesh_width == 0 || mesh_height == 0)
    {
        throw ValidationError("mesh dimensions must be positive");
    }
    if (n_c == 0)
    {
        throw ValidationError("n_c must be at least 1");
    }
    if (!(e_w >= 0.0) || !(e_s >= 0.0))
    {
        throw ValidationError("energies must be non-negative");
    }
    if (!(cycle_ms > 0.0))
    {
        throw ValidationError("cycle_ms must be positive");
    }
    if (buffer_depth == 0)
    {
        throw ValidationError("buffer_depth must be at least 1");
    }
}

std::size_t square_mesh_side(std::size_t clusters)
{
    std::size_t side = 1;
    while (side * side < clusters)
    {
        ++side;
    }
    return side;
}

HardwareConfig read_hardware_config(std::istream &in, HardwareConfig hw)
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
        if (key == "mesh")
        {
            const auto x = value.find('x');
            if (x == std::string::npos)
            {
                throw ParseError("mesh must look like <width>x<height>", line);
            }
            hw.mesh_width = parse_unsigned(value.substr(0, x), line);
            hw.mesh_height = parse_unsigned(value.substr(x + 1), line);
        }
        else if (key == "n_c")
        {
            hw.n_c = parse_unsigned(value, line);
        }
        else if (key == "l_w")
        {
            hw.l_w = parse_unsigned(value, line);
        }
        else if (key == "l_s")
        {
            hw.l_s = parse_unsigned(value, line);
        }
        else if (key == "e_w")
        {
            hw.e_w = parse_real(value, line);
        }
        else if (key == "e_s")
        {
            hw.e_s = parse_real(value, line);
        }
        else if (key == "cycle_ms")
        {
            hw.cycle_ms = parse_real(value, line);
        }
        else if (key == "buffer_depth")
        {
            hw.buffer_depth = parse_unsigned(value, line);
        }
        else if (key == "routing")
        {
            hw.routing = parse_routing_kind(value);
        }
        else if (key == "multicast")
        {
            if (value == "replicate")
            {
                hw.multicast = MulticastMode::Replicate;
            }
            else if (value == "tree")
            {
                hw.multicast = MulticastMode::Tree;
            }
            else
            {
                throw ParseError("multicast must be replicate|tree", line);
            }
        }
        else
        {
            throw ParseError("unknown hardware key '" + key + "'", line);
        }
    }
    hw.validate();
    return hw;
}

HardwareConfig load_hardware_config(
        const std::filesystem::path &path, HardwareConfig base)
{
    auto in = text::open_input(path);
    return read_hardware_config(in, base);
}

void write_hardware_config(std::ostream &out, const HardwareConfig &hw)
{
    out << "mesh=" << hw.mesh_width << 'x' << hw.mesh_height << '\n'
        << "n_c=" << hw.n_c << '\n'
        << "l_w=" << hw.l_w << '\n'
        << "l_s=" << hw.l_s << '\n'
        << "e_w=" << format_real(hw.e_w) << '\n'
        << "e_s=" << format_real(hw.e_s) << '\n'
        << "cycle_ms=" << format_real(hw.cycle_ms) << '\n'
        << "buffer_depth=" << hw.buffer_depth << '\n'
        << "routing=" << to_string(hw.routing) << '\n'
        << "multicast="
        << (hw.multicast == MulticastMode::Replicate ? "replicate" : "tree")
        << '\n';
}

CrossbarCoord coord_of(std::size_t crossbar, const HardwareConfig &hw)
{
    return {static_cast<int>(crossbar % hw.mesh_width),
            static_cast<int>(crossbar / hw.mesh_width)};
}

std::size_t crossbar_id(CrossbarCoord c, const HardwareConfig &hw)
{
    return static_cast<std::size_t>(c.y) * hw.mesh_width +
            static_cast<std::size_t>(c.x);
}

bool in_bounds(CrossbarCoord c, const HardwareConfig &hw)
{
    return c.x >= 0 && c.y >= 0 && static_cast<std::size_t>(c.x) < hw.mesh_width &&
            static_cast<std::size_t>(c.y) < hw.mesh_height;
}

CrossbarCoord step(CrossbarCoord c, Direction d)
{
    switch (d)
    {
    case Direction::East:
        return {c.x + 1, c.y};
    case Direction::West:
        return {c.x - 1, c.y};
    case Direction::North:
        return {c.x, c.y + 1};
    case Direction::South:
        return {c.x, c.y - 1};
    case Direction::Local:
        break;
    }
    return c;
}

bool is_x(Direction d)
{
    return d == Direction::East || d == Direction::West;
}

namespace
{

Direction pick(Direction x_dir, Direction y_dir, CrossbarCoord current,
        const CongestionView &congestion)
{
    if (!congestion)
    {
        return x_dir;
    }
    return congestion(current, y_dir) < congestion(current, x_dir) ? y_dir : x_dir;
}

} // namespace

Direction next_direction(CrossbarCoord current, CrossbarCoord dst,
        RoutingKind kind, const CongestionView &congestion)
{
    const int dx = dst.x - current.x;
    const int dy = dst.y - current.y;
    if (dx == 0 && dy == 0)
    {
        return Direction::Local;
    }
    const Direction x_dir = dx > 0 ? Direction::East : Direction::West;
    const Direction y_dir = dy > 0 ? Direction::North : Direction::South;
    if (dx == 0)
    {
        return y_dir;
    }
    if (dy == 0)
    {
        return x_dir;
    }
    switch (kind)
    {
    case RoutingKind::XY:
        return x_dir;
    case RoutingKind::WestFirst:
        if (x_dir == Direction::West)
        {
            return Direction::West;
        }
        return pick(x_dir, y_dir, current, congestion);
    case RoutingKind::NorthLast:
        if (y_dir == Direction::North)
        {
            return x_dir;
        }
        return pick(x_dir, y_dir, current, congestion);
    }
    return x_dir;
}

std::vector<CrossbarCoord> route(CrossbarCoord src, CrossbarCoord dst,
        RoutingKind kind, const CongestionView &congestion)
{
    std::vector<CrossbarCoord> path{src};
    CrossbarCoord current = src;
    while (true)
    {
        const Direction d = next_direction(current, dst, kind, congestion);
        if (d == Direction::Local)
        {
            break;
        }
        current = step(current, d);
        path.push_back(current);
    }
    return path;
}

std::size_t hop_count(const std::vector<CrossbarCoord> &path)
{
    return path.size();
}

std::string check_path(const std::vector<CrossbarCoord> &path,
        CrossbarCoord src, CrossbarCoord dst, RoutingKind kind)
{
    if (path.empty() || path.front() != src || path.back() != dst)
    {
        return "path does not run from source to destination";
    }
    if (static_cast<int>(path.size()) - 1 != manhattan(src, dst))
    {
        return "path is not minimal";
    }
    std::vector<Direction> dirs;
    for (std::size_t i = 1; i < path.size(); ++i)
    {
        const int dx = path[i].x - path[i - 1].x;
        const int dy = path[i].y - path[i - 1].y;
        if (std::abs(dx) + std::abs(dy) != 1)
        {
            return "non-adjacent step in path";
        }
        dirs.push_back(dx > 0 ? Direction::East :
                        dx < 0 ? Direction::West :
                        dy > 0 ? Direction::North :
                                 Direction::South);
    }
    for (std::size_t i = 1; i < dirs.size(); ++i)
    {
        const Direction prev = dirs[i - 1];
        const Direction next = dirs[i];
        switch (kind)
        {
        case RoutingKind::XY:
            if (!is_x(prev) && is_x(next))
            {
                return "XY route turns from Y back to X";
            }
            break;
        case RoutingKind::NorthLast:
            if (prev == Direction::North && next != Direction::North)
            {
                return "NorthLast route turns after moving north";
            }
            break;
        case RoutingKind::WestFirst:
            if (prev != Direction::West && next == Direction::West)
            {
                return "WestFirst route moves west after another direction";
            }
            break;
        }
    }
    return {};
}

} // namespace neuromap
