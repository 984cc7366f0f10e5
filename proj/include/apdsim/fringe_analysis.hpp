#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "apdsim/coincidence.hpp"
#include "apdsim/lut.hpp"

namespace apdsim {

/// One orientation of the polarisation fringe scan.
struct FringePoint {
    double angle_deg = 0.0;
    double c_raw_counts = 0.0;  ///< raw coincidence counts in the window
    double s1_counts = 0.0;     ///< observed singles, detector 1
    double s2_counts = 0.0;     ///< observed singles, detector 2
    double integration_s = 0.0; ///< window length
};

struct FringeDataset {
    std::vector<FringePoint> points;
    double tau1 = 0.0;  ///< gate width of channel 1, seconds
    double tau2 = 0.0;  ///< gate width of channel 2, seconds
    double v_e1 = 0.0;  ///< operating excess bias, detector 1
    double v_e2 = 0.0;  ///< operating excess bias, detector 2

    void validate() const;
};

void write_fringe_csv(const FringeDataset& ds, std::ostream& out);
void write_fringe_csv(const FringeDataset& ds, const std::filesystem::path& path);
FringeDataset read_fringe_csv(std::istream& in);
FringeDataset read_fringe_csv(const std::filesystem::path& path);

/// Least-squares fit of rate(theta) = offset + amplitude * cos(2(theta - phase)).
///
/// The model is linear in (offset, amplitude * cos 2phase, amplitude * sin 2phase),
/// so the fit is a single 3x3 solve with no starting guess. Uncertainties
/// come from the coefficient covariance by linear propagation.
struct VisibilityFit {
    double offset = 0.0;       ///< mean rate, Hz
    double amplitude = 0.0;    ///< fringe amplitude, Hz
    double visibility = 0.0;   ///< amplitude / offset
    double phase_deg = 0.0;    ///< fringe maximum, normalised to [-90, 90)
    double offset_err = 0.0;
    double amplitude_err = 0.0;
    double visibility_err = 0.0;
    double phase_err_deg = 0.0;
    double residual_rms = 0.0; ///< unweighted RMS residual, Hz
    std::size_t n_points = 0;
    bool over_range = false;   ///< fitted visibility exceeds 1
};

/// Unweighted fit; coefficient covariance is scaled by the reduced
/// chi-square, so errors reflect the observed scatter.
VisibilityFit fit_visibility(const std::vector<double>& angles_deg,
                             const std::vector<double>& rates);

/// Weighted fit with per-point variances taken as true: suits Poisson
/// counting errors. Throws FitError on fewer than four points, an angular
/// span under 90 degrees, a degenerate design, or a non-positive mean rate.
VisibilityFit fit_visibility(const std::vector<double>& angles_deg,
                             const std::vector<double>& rates,
                             const std::vector<double>& variances);

/// Fringe fits before and after accidental subtraction.
struct FringeAnalysis {
    VisibilityFit raw;        ///< no subtraction
    VisibilityFit naive;      ///< ideal-counter accidentals removed
    VisibilityFit corrected;  ///< duty-cycle-aware accidentals removed
    std::vector<CorrectionResult> per_point;
};

/// Runs the full pipeline on a dataset: per-point duty-cycle lookups at the
/// observed singles rates, both accidental estimates, three fits. Table
/// errors carry the detector number and fringe angle.
FringeAnalysis analyze(const FringeDataset& ds, const DutyCycleTable& table1,
                       const DutyCycleTable& table2);

} // namespace apdsim
