#ifndef NEUROMAP_ERRORS_HPP
#define NEUROMAP_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace neuromap
{

// Malformed input file. Carries the 1-based line number when known.
class ParseError : public std::runtime_error
{
public:
    ParseError(const std::string &what, std::size_t line = 0)
            : std::runtime_error(line == 0 ?
                              what :
                              "line " + std::to_string(line) + ": " + what)
            , line_(line)
    {
    }
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Well-formed input that violates a model invariant.
class ValidationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// The requested mapping cannot exist (e.g. fewer crossbars than clusters).
class InfeasibleError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Raised when the cycle loop stops making progress.
class SimulationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace neuromap

#endif
