#pragma once

#include <stdexcept>
#include <string>

namespace qbern {

/* Base class for everything this library throws on purpose. */
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/* A precondition on the mathematical domain was violated (q out of range,
 * argument outside a convergence region, malformed exponent, ...). */
class DomainError : public Error {
public:
    using Error::Error;
};

/* A q-Pochhammer factor vanished (or got within 1e-300 of zero), so the
 * requested reciprocal product does not exist.  factor_index() is the j of
 * the offending factor x - q^j a. */
class SingularPoint : public Error {
public:
    SingularPoint(const std::string& what, int factor_index)
        : Error(what), factor_index_(factor_index) {}
    int factor_index() const noexcept { return factor_index_; }

private:
    int factor_index_;
};

/* The truncation budget ran out before the certified tail bound reached the
 * requested eps_tail.  Carries the bound that was achieved so callers (e.g.
 * sweep drivers) can degrade gracefully instead of aborting. */
class TruncationBudgetExceeded : public Error {
public:
    TruncationBudgetExceeded(const std::string& what, double achieved_tail_bound,
                             long terms_used)
        : Error(what),
          achieved_tail_bound_(achieved_tail_bound),
          terms_used_(terms_used) {}
    double achieved_tail_bound() const noexcept { return achieved_tail_bound_; }
    long terms_used() const noexcept { return terms_used_; }

private:
    double achieved_tail_bound_;
    long terms_used_;
};

/* A sampling search exhausted its budget without finding the requested
 * witness point. */
class WitnessNotFound : public Error {
public:
    using Error::Error;
};

} // namespace qbern
