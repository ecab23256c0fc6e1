#pragma once

#include <stdexcept>
#include <string>

namespace imdev {

// Invalid arguments or a result outside the domain a bound is stated on.
// The CLI maps these to exit code 1.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A family-specific stationarity condition failed.
class CertificateViolation : public DomainError {
public:
    CertificateViolation(const std::string& what, double computed_sum)
        : DomainError(what), sum_(computed_sum) {}

    double computed_sum() const noexcept { return sum_; }

private:
    double sum_;
};

// The requested operation needs the innovation-Lipschitz condition, a bounded law or similar, which
// the process family does not provide.
class UnsupportedError : public DomainError {
public:
    using DomainError::DomainError;
};

// Malformed configuration or I/O failure. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace imdev
