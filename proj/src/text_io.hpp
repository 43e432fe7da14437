#ifndef NEUROMAP_TEXT_IO_HPP
#define NEUROMAP_TEXT_IO_HPP

// Line-oriented CSV helpers shared by the file readers.

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "neuromap/errors.hpp"

namespace neuromap::text
{

inline std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
    {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split(std::string_view line, char sep = ',')
{
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true)
    {
        const auto pos = line.find(sep, start);
        fields.emplace_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos)
        {
            break;
        }
        start = pos + 1;
    }
    return fields;
}

// "# k=4 n_c=256" -> {k: 4, n_c: 256}. Tokens without '=' are ignored.
inline std::map<std::string, std::string> header_fields(std::string_view comment)
{
    std::map<std::string, std::string> fields;
    comment = trim(comment.substr(comment.find('#') + 1));
    std::size_t start = 0;
    while (start < comment.size())
    {
        auto end = comment.find_first_of(" \t", start);
        if (end == std::string_view::npos)
        {
            end = comment.size();
        }
        const auto token = comment.substr(start, end - start);
        const auto eq = token.find('=');
        if (eq != std::string_view::npos)
        {
            fields.emplace(std::string(trim(token.substr(0, eq))),
                    std::string(trim(token.substr(eq + 1))));
        }
        start = end + 1;
    }
    return fields;
}

inline std::ifstream open_input(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ParseError("cannot open " + path.string());
    }
    return in;
}

inline std::ofstream open_output(const std::filesystem::path &path)
{
    if (path.has_parent_path())
    {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw ParseError("cannot write " + path.string());
    }
    return out;
}

inline void expect_fields(const std::vector<std::string> &fields,
        std::size_t count, std::size_t line)
{
    if (fields.size() != count)
    {
        throw ParseError("expected " + std::to_string(count) +
                        " comma-separated fields, got " +
                        std::to_string(fields.size()),
                line);
    }
}

} // namespace neuromap::text

#endif
