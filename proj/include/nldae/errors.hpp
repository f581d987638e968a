#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nldae {

/// Invalid argument or shape mismatch.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Data with zero range (e.g. a constant training target) cannot be scaled.
class DegenerateDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training data that violates noisy = clean + noise.
class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite loss during optimization.
class TrainingError : public std::runtime_error {
public:
    TrainingError(const std::string& what, std::size_t iteration)
        : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
          iteration_(iteration) {}

    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

/// MDS embedding whose two leading eigenvalues are not both positive.
class RankDeficiencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or incompatible persisted model / CSV / config.
class LoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or incomplete experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace nldae
