#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "apdsim/recovery_model.hpp"

namespace apdsim {

/// Everything needed to regenerate a table from scratch.
struct LutProvenance {
    DetectorParams detector;          ///< base parameters; v_e_set varies per row
    std::vector<double> input_rates;  ///< simulated input rates per row
    double duration = 0.0;            ///< base window per cell, seconds
    double min_events_per_cell = 0.0; ///< statistics floor per cell
    std::uint64_t seed = 0;
    std::string created_utc;          ///< ISO 8601, UTC
};

/// Effective duty cycle on a rectangular (v_e_set, observed rate) grid.
///
/// Rows are indexed by the nominal excess bias, columns by the observed
/// (sensed) rate: the quantity actually available in an experiment. Each
/// row is strictly decreasing in observed rate, which makes the table
/// invertible per row and keeps bilinear interpolation well behaved.
struct DutyCycleTable {
    std::vector<double> v_e_axis;           ///< strictly increasing
    std::vector<double> observed_rate_axis; ///< strictly increasing
    std::vector<double> eta;                ///< row-major, v_e index major
    LutProvenance provenance;

    double at(std::size_t i_ve, std::size_t j_obs) const;

    /// Throws std::invalid_argument when axes or grid break the invariants
    /// above (sizes, ordering, eta range, row monotonicity).
    void validate() const;
};

struct LutBuildOptions {
    double min_events_per_cell = 1e5;
    int jobs = 1;              ///< worker threads; results identical for any value
    std::string created_utc;   ///< empty: stamp with the current time
};

/// Simulates a sweep per v_e value and assembles the grid.
///
/// Raw sweep points are usable only on the rising side of the observed-rate
/// curve, so each row is truncated at its observed-rate maximum, projected
/// onto the nearest non-increasing eta sequence, and resampled onto a
/// log-spaced observed-rate axis common to all rows (the intersection of
/// the rows' covered ranges). Throws BuildError when a row keeps fewer
/// than two usable points or the rows share no observed-rate range.
DutyCycleTable build_table(const DetectorParams& base,
                           const std::vector<double>& v_e_values,
                           const std::vector<double>& input_rates,
                           double duration, std::uint64_t seed,
                           const LutBuildOptions& options = {});

/// Bilinear interpolation on the grid. Exact at grid nodes.
///
/// Throws RangeError when v_e is outside the axis or the observed rate is
/// below the covered range, and SaturationAmbiguityError above it, where
/// one observed rate would map to two input rates.
double lookup_eta(const DutyCycleTable& table, double v_e, double observed_rate);

/// JSON on disk: format tag, version "1", provenance, axes, row-major grid.
/// A load of a save compares equal field for field.
void save_table(const DutyCycleTable& table, std::ostream& out);
void save_table(const DutyCycleTable& table, const std::filesystem::path& path);
DutyCycleTable load_table(std::istream& in);
DutyCycleTable load_table(const std::filesystem::path& path);

/// Flat (v_e, observed_rate, eta) rows for plotting tools.
void write_table_csv(const DutyCycleTable& table, std::ostream& out);

} // namespace apdsim
