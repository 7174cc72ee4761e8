#pragma once

#include <stdexcept>
#include <string>

namespace platonic {

// Shape or axis-length disagreement between operands.
struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& msg) : std::runtime_error("dimension error: " + msg) {}
};

// Violated call contract (wrong mode, mismatched group, non-scalar loss, ...).
struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& msg) : std::runtime_error("contract error: " + msg) {}
};

struct IndexError : std::runtime_error {
    explicit IndexError(const std::string& msg) : std::runtime_error("index error: " + msg) {}
};

// Group construction failed (closure did not terminate at the expected order, ...).
struct ConstructionError : std::runtime_error {
    explicit ConstructionError(const std::string& msg) : std::runtime_error("construction error: " + msg) {}
};

// A matrix claimed to be equivariant does not have the required block structure.
struct StructureError : std::runtime_error {
    explicit StructureError(const std::string& msg) : std::runtime_error("structure error: " + msg) {}
};

// An operation produced NaN/Inf.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error("numeric error: " + msg) {}
};

// Request exceeds a configured memory guard.
struct ResourceError : std::runtime_error {
    explicit ResourceError(const std::string& msg) : std::runtime_error("resource error: " + msg) {}
};

struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error("usage error: " + msg) {}
};

}  // namespace platonic
