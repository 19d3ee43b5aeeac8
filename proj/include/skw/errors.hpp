#pragma once

#include <stdexcept>
#include <string>

namespace skw {

// Base class for all library errors. `code()` is a stable short tag used by
// the C API to map exceptions to error codes.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

// Invalid input values or broken invariants (bad metric, bad weights, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain", what) {}
};

// Conditioning on a set of zero mass. Callers restrict themselves to active
// cells; hitting this means the caller picked a cell outside I(k).
class NullConditioningError : public Error {
public:
    explicit NullConditioningError(const std::string& what)
        : Error("null_conditioning", what) {}
};

// A family member is still too far from the limit law to be coupled at the
// requested mixing schedule (depth 0).
class NotConvergedError : public Error {
public:
    NotConvergedError(const std::string& what, int alpha, int cell)
        : Error("not_converged", what), alpha_(alpha), cell_(cell) {}
    int alpha() const { return alpha_; }
    int cell() const { return cell_; }

private:
    int alpha_;
    int cell_;
};

// Caller violated an operation contract (quantifier ranges, event scope).
class ContractError : public Error {
public:
    explicit ContractError(const std::string& what) : Error("contract", what) {}
};

// File or JSON problems.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("io", what) {}
};

} // namespace skw
