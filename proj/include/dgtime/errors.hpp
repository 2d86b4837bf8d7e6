#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dgt {

/// Input that makes a construction ill-posed (e.g. repeated interpolation nodes).
class DegenerateInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operator model failed its spectral validation.
class ModelRejected : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A violated documented precondition (e.g. nonzero u0 for a max-reg report).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Singular slab system; the run cannot continue.
class StepFailure : public std::runtime_error {
public:
    StepFailure(std::size_t slab, const std::string& what)
        : std::runtime_error("slab " + std::to_string(slab) + ": " + what), slab_(slab)
    {
    }
    std::size_t slab() const noexcept { return slab_; }

private:
    std::size_t slab_;
};

/// Invalid run configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace dgt
