#ifndef QDCAVITY_ERRORS_HPP
#define QDCAVITY_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qdcavity
{

// Invalid physical input (non-finite value, parameter out of range, ...).
class DomainError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

// Measurements that cannot all be true at once, e.g. a measured Q above the
// mirror-limited Q.
class ConsistencyError : public DomainError
{
public:
    using DomainError::DomainError;
};

// Malformed scan or config file. Carries the 1-based line number when known.
class ParseError : public std::runtime_error
{
public:
    ParseError(const std::string &what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line)
    {
    }

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class IoError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace qdcavity

#endif
