#ifndef QKD_ERRORS_HPP
#define QKD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qkd {

/// Thrown when a state cannot be represented at the requested Fock truncation
/// (lost tail norm exceeds the configured tolerance).
class truncation_error : public std::runtime_error {
public:
    truncation_error(const std::string& what, int suggested_dim)
        : std::runtime_error(what), suggested_dim_(suggested_dim) {}

    /// Smallest power-of-two dimension found to satisfy the tolerance, or -1
    /// if none was found below the search cap.
    int suggested_dim() const noexcept { return suggested_dim_; }

private:
    int suggested_dim_;
};

/// Thrown when a covariance matrix violates the bona fide uncertainty
/// condition, or when a derived quantity leaves its physical domain.
class physicality_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown by estimators that received too few usable samples.
class insufficient_data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when an estimate is too degenerate to invert (e.g. a correlation
/// consistent with zero, leaving the transmittance undefined).
class degenerate_estimate_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace qkd

#endif
