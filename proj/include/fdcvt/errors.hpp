#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fdcvt {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input sizes are inconsistent (y length vs rows, n <= p, ...).
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// The design matrix is numerically rank deficient. Carries the set of
/// column indices involved in the dependency (0-based).
class RankDeficient : public Error {
public:
    RankDeficient(std::string msg, std::vector<int> cols)
        : Error(std::move(msg)), columns(std::move(cols)) {}
    std::vector<int> columns;
};

/// A supplied moment sequence (M4, M6, M8) violates a moment inequality.
class InvalidMomentSequence : public Error {
public:
    using Error::Error;
};

/// The asymptotic variance b came out non-positive (degenerate regime,
/// e.g. p too close to n).
class NonPositiveVariance : public Error {
public:
    using Error::Error;
};

/// All residuals are zero; the statistic's denominator vanishes.
class DegenerateResiduals : public Error {
public:
    using Error::Error;
};

/// A sigma entry is not strictly positive.
class NonPositiveSigma : public Error {
public:
    using Error::Error;
};

/// Denominator of the delta-method ratio is zero.
class ZeroDenominator : public Error {
public:
    using Error::Error;
};

/// Problem size exceeds a hard enumeration/loop budget.
class TooLarge : public Error {
public:
    using Error::Error;
};

/// An Omega exponent pattern fails its shape or sign constraints.
class PatternInvalid : public Error {
public:
    using Error::Error;
};

/// Unrecognized design or error law name.
class UnknownLaw : public Error {
public:
    using Error::Error;
};

/// Model 2 splits the covariates in half and needs an even p.
class OddPForModel2 : public Error {
public:
    using Error::Error;
};

/// Design generation kept producing rank-deficient matrices.
class PersistentRankDeficiency : public Error {
public:
    using Error::Error;
};

} // namespace fdcvt
