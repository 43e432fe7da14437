#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <system_error>
#include <tuple>

#include "neuromap/errors.hpp"
#include "neuromap/snn.hpp"
#include "text_io.hpp"

namespace neuromap
{

std::string format_real(double value)
{
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

double parse_real(const std::string &text, std::size_t line)
{
    double value = 0.0;
    const char *end = text.data() + text.size();
    const auto result = std::from_chars(text.data(), end, value);
    if (result.ec != std::errc() || result.ptr != end || !std::isfinite(value))
    {
        throw ParseError("invalid number '" + text + "'", line);
    }
    return value;
}

std::uint64_t parse_unsigned(const std::string &text, std::size_t line)
{
    std::uint64_t value = 0;
    const char *end = text.data() + text.size();
    const auto result = std::from_chars(text.data(), end, value);
    if (result.ec != std::errc() || result.ptr != end)
    {
        throw ParseError("invalid non-negative integer '" + text + "'", line);
    }
    return value;
}

SnnGraph read_network(std::istream &in)
{
    std::optional<std::size_t> neuron_count;
    std::vector<Synapse> synapses;
    std::vector<std::size_t> row_lines;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw))
    {
        ++line;
        const auto content = text::trim(raw);
        if (content.empty())
        {
            continue;
        }
        if (content.front() == '#')
        {
            const auto fields = text::header_fields(content);
            if (const auto it = fields.find("neurons"); it != fields.end())
            {
                neuron_count = parse_unsigned(it->second, line);
            }
            continue;
        }
        if (!neuron_count)
        {
            throw ParseError("synapse row before '# neurons=<int>' header", line);
        }
        const auto fields = text::split(content);
        text::expect_fields(fields, 3, line);
        const auto src = parse_unsigned(fields[0], line);
        const auto dst = parse_unsigned(fields[1], line);
        const auto weight = parse_unsigned(fields[2], line);
        if (src >= *neuron_count || dst >= *neuron_count)
        {
            throw ParseError("dangling neuron index in synapse " +
                            std::to_string(src) + "->" + std::to_string(dst) +
                            " (network has " + std::to_string(*neuron_count) +
                            " neurons)",
                    line);
        }
        synapses.push_back({static_cast<NeuronId>(src),
                static_cast<NeuronId>(dst), weight});
        row_lines.push_back(line);
    }
    if (!neuron_count)
    {
        throw ParseError("missing '# neurons=<int>' header");
    }

    // Report duplicates with the line of the second occurrence.
    std::vector<std::size_t> order(synapses.size());
    for (std::size_t i = 0; i < order.size(); ++i)
    {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::tie(synapses[a].src, synapses[a].dst) <
                std::tie(synapses[b].src, synapses[b].dst);
    });
    for (std::size_t i = 1; i < order.size(); ++i)
    {
        const Synapse &a = synapses[order[i - 1]];
        const Synapse &b = synapses[order[i]];
        if (a.src == b.src && a.dst == b.dst)
        {
            throw ParseError("duplicate synapse " + std::to_string(b.src) +
                            "->" + std::to_string(b.dst),
                    row_lines[order[i]]);
        }
    }
    return SnnGraph(*neuron_count, std::move(synapses));
}

SnnGraph load_network(const std::filesystem::path &path)
{
    auto in = text::open_input(path);
    return read_network(in);
}

void write_network(std::ostream &out, const SnnGraph &graph)
{
    out << "# neurons=" << graph.neuron_count() << '\n';
    for (const Synapse &s : graph.synapses())
    {
        out << s.src << ',' << s.dst << ',' << s.spike_count << '\n';
    }
}

void save_network(const std::filesystem::path &path, const SnnGraph &graph)
{
    auto out = text::open_output(path);
    write_network(out, graph);
}

SpikeTrace read_trace(std::istream &in, const SnnGraph &graph)
{
    std::optional<double> duration;
    std::vector<SpikeEvent> events;
    std::string raw;
    std::size_t line = 0;
    double latest = 0.0;
    while (std::getline(in, raw))
    {
        ++line;
        const auto content = text::trim(raw);
        if (content.empty())
        {
            continue;
        }
        if (content.front() == '#')
        {
            const auto fields = text::header_fields(content);
            if (const auto it = fields.find("duration_ms"); it != fields.end())
            {
                duration = parse_real(it->second, line);
            }
            continue;
        }
        const auto fields = text::split(content);
        text::expect_fields(fields, 2, line);
        const auto neuron = parse_unsigned(fields[0], line);
        const double time = parse_real(fields[1], line);
        if (neuron >= graph.neuron_count())
        {
            throw ParseError("unknown neuron " + std::to_string(neuron) +
                            " (network has " +
                            std::to_string(graph.neuron_count()) + " neurons)",
                    line);
        }
        if (time < 0.0)
        {
            throw ParseError("negative spike time", line);
        }
        latest = std::max(latest, time);
        events.push_back({static_cast<NeuronId>(neuron), time});
    }
    if (duration && latest > *duration)
    {
        throw ValidationError("spike at " + format_real(latest) +
                " ms exceeds the declared duration " + format_real(*duration));
    }
    return SpikeTrace(duration.value_or(latest), std::move(events));
}

SpikeTrace load_trace(const std::filesystem::path &path, const SnnGraph &graph)
{
    auto in = text::open_input(path);
    return read_trace(in, graph);
}

void write_trace(std::ostream &out, const SpikeTrace &trace)
{
    out << "# duration_ms=" << format_real(trace.duration_ms()) << '\n';
    for (const SpikeEvent &e : trace.events())
    {
        out << e.neuron << ',' << format_real(e.time_ms) << '\n';
    }
}

void save_trace(const std::filesystem::path &path, const SpikeTrace &trace)
{
    auto out = text::open_output(path);
    write_trace(out, trace);
}

} // namespace neuromap
