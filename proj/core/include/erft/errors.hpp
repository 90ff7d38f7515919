#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace erft {

// Loss or parameters stopped being finite during an optimizer loop.
class TrainingDiverged : public std::runtime_error {
public:
    explicit TrainingDiverged(const std::string& what) : std::runtime_error(what) {}
};

// A sampled trajectory left the finite range mid-integration.
class SamplingDiverged : public std::runtime_error {
public:
    SamplingDiverged(const std::string& what, std::size_t clip_index)
        : std::runtime_error(what), clip_index_(clip_index) {}
    explicit SamplingDiverged(const std::string& what)
        : std::runtime_error(what), clip_index_(0) {}

    std::size_t clip_index() const noexcept { return clip_index_; }

private:
    std::size_t clip_index_;
};

// Sampling was requested from a bank region that holds no entries.
class EmptyBankError : public std::runtime_error {
public:
    explicit EmptyBankError(const std::string& what) : std::runtime_error(what) {}
};

// A serialized artifact (checkpoint, bank snapshot, CSV) failed validation.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// A configuration key is unknown, malformed, or out of range.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key, const std::string& what)
        : std::runtime_error("config key '" + key + "': " + what), key_(key) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

} // namespace erft
