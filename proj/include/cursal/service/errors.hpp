#pragma once

#include <string>

#include "cursal/error.hpp"

namespace cursal::service {

class NotFoundError : public Error {
public:
    explicit NotFoundError(const std::string& m) : Error("not_found", m) {}
};

/// Upload content broke a data invariant. `detail` names the first offender.
class ValidationError : public Error {
public:
    ValidationError(const std::string& m, std::string detail = {})
        : Error("validation_error", m), detail_(std::move(detail)) {}
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string detail_;
};

/// The session exists but is excluded from data collection.
class RejectedError : public Error {
public:
    explicit RejectedError(const std::string& m) : Error("session_excluded", m) {}
};

class PreconditionError : public Error {
public:
    PreconditionError(const std::string& m, std::string detail = {})
        : Error("precondition_failed", m), detail_(std::move(detail)) {}
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string detail_;
};

/// The service cannot serve the request in its current configuration.
class ServiceStateError : public Error {
public:
    explicit ServiceStateError(const std::string& m) : Error("service_state", m) {}
};

class UnauthorizedError : public Error {
public:
    explicit UnauthorizedError(const std::string& m) : Error("unauthorized", m) {}
};

} // namespace cursal::service
