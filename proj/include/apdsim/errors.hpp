#pragma once

#include <stdexcept>
#include <string>

namespace apdsim {

/// Malformed persisted data: bad CSV rows, unreadable table files,
/// unsupported format versions.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// A query landed outside the domain covered by a table or dataset.
class RangeError : public std::runtime_error {
public:
    explicit RangeError(const std::string& what) : std::runtime_error(what) {}
};

/// Observed rate above the table's covered range. Past the roll-over of the
/// observed-rate curve a single observed rate maps to two input rates, so
/// the query is refused rather than guessed at.
class SaturationAmbiguityError : public RangeError {
public:
    explicit SaturationAmbiguityError(const std::string& what) : RangeError(what) {}
};

/// A fit could not produce a meaningful result (degenerate design matrix,
/// non-positive mean rate, too few points).
class FitError : public std::runtime_error {
public:
    explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

/// Table construction failed: simulated rows too degenerate to index by
/// observed rate, or no common observed-rate range across rows.
class BuildError : public std::runtime_error {
public:
    explicit BuildError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace apdsim
