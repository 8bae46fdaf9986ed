#pragma once

#include <stdexcept>
#include <string>

namespace tierlab {

/// Inconsistent or malformed configuration. `key()` names the offending dotted path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Failures raised while a simulation is running. The CLI maps these to exit code 3.
class RuntimeError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class OutOfMemory : public RuntimeError {
    using RuntimeError::RuntimeError;
};

class UnreachableNode : public RuntimeError {
    using RuntimeError::RuntimeError;
};

class NotMigratable : public RuntimeError {
    using RuntimeError::RuntimeError;
};

class DestinationFull : public RuntimeError {
    using RuntimeError::RuntimeError;
};

class EmptyDeviceSet : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace tierlab
