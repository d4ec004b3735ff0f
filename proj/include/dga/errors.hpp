/*
 * dga-chamber: frequency-domain DGA wave solver for anechoic chamber models.
 *
 * Exception types shared by every module. The CLI maps them onto exit
 * codes: config_error -> 1, numerical_error -> 2.
 */
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dga {

class error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/* Malformed input file or inconsistent configuration. */
class config_error : public error
{
public:
    using error::error;
};

class parse_error : public config_error
{
    std::size_t line_;

public:
    parse_error(const std::string& what, std::size_t line)
        : config_error(what + " (line " + std::to_string(line) + ")"), line_(line)
    {}

    std::size_t line() const { return line_; }
};

/* Mesh is syntactically fine but not a valid tetrahedral complex. */
class topology_error : public config_error
{
    std::size_t element_;

public:
    topology_error(const std::string& what, std::size_t element)
        : config_error(what + " (element " + std::to_string(element) + ")"), element_(element)
    {}

    std::size_t element() const { return element_; }
};

/* Out-of-range argument to a numerical routine (frequency outside a table,
 * nonpositive normalization, Gamma >= 1, ...). */
class domain_error : public config_error
{
public:
    using config_error::config_error;
};

/* Singular factorization, residual check failure, degenerate extraction. */
class numerical_error : public error
{
public:
    using error::error;
};

} // namespace dga
