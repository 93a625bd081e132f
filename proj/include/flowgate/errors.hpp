#pragma once

#include <stdexcept>
#include <string>

namespace flowgate {

// A mutation could not be made durable. In-memory state has been rolled
// back by the time this is thrown.
struct PersistError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidPort : std::runtime_error {
    explicit InvalidPort(uint32_t port)
        : std::runtime_error("invalid port " + std::to_string(port)) {}
};

}  // namespace flowgate
