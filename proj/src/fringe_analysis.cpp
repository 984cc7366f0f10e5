#include "apdsim/fringe_analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "apdsim/errors.hpp"

namespace apdsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

void FringeDataset::validate() const {
    if (points.empty()) throw std::invalid_argument("fringe dataset has no points");
    if (!(tau1 >= 0.0) || !(tau2 >= 0.0) || !(tau1 + tau2 > 0.0))
        throw std::invalid_argument("gate widths must be non-negative with a positive sum");
    for (const FringePoint& pt : points) {
        if (!std::isfinite(pt.angle_deg))
            throw std::invalid_argument("angle must be finite");
        if (!(pt.c_raw_counts >= 0.0) || !(pt.s1_counts >= 0.0) ||
            !(pt.s2_counts >= 0.0))
            throw std::invalid_argument("counts must be non-negative");
        if (!(pt.integration_s > 0.0))
            throw std::invalid_argument("integration time must be positive");
    }
}

void write_fringe_csv(const FringeDataset& ds, std::ostream& out) {
    out << "# apdsim-fringe v1 tau1=" << fmt17(ds.tau1) << " tau2=" << fmt17(ds.tau2)
        << " v_e1=" << fmt17(ds.v_e1) << " v_e2=" << fmt17(ds.v_e2) << "\n";
    out << "angle_deg,c_raw_counts,s1_counts,s2_counts,integration_s\n";
    for (const FringePoint& pt : ds.points)
        out << fmt17(pt.angle_deg) << ',' << fmt17(pt.c_raw_counts) << ','
            << fmt17(pt.s1_counts) << ',' << fmt17(pt.s2_counts) << ','
            << fmt17(pt.integration_s) << "\n";
}

void write_fringe_csv(const FringeDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_fringe_csv(ds, out);
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

FringeDataset read_fringe_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty fringe file");

    FringeDataset ds;
    if (std::sscanf(line.c_str(), "# apdsim-fringe v1 tau1=%lg tau2=%lg v_e1=%lg v_e2=%lg",
                    &ds.tau1, &ds.tau2, &ds.v_e1, &ds.v_e2) != 4)
        throw ParseError("line 1: missing or malformed fringe header");

    if (!std::getline(in, line) ||
        line.rfind("angle_deg,c_raw_counts,s1_counts,s2_counts,integration_s", 0) != 0)
        throw ParseError("line 2: expected fringe column header");

    std::size_t lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        FringePoint pt;
        if (std::sscanf(line.c_str(), "%lg,%lg,%lg,%lg,%lg", &pt.angle_deg,
                        &pt.c_raw_counts, &pt.s1_counts, &pt.s2_counts,
                        &pt.integration_s) != 5)
            throw ParseError("line " + std::to_string(lineno) + ": malformed fringe row");
        ds.points.push_back(pt);
    }

    try {
        ds.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("fringe file invalid: ") + e.what());
    }
    return ds;
}

FringeDataset read_fringe_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    return read_fringe_csv(in);
}

namespace {

/// Solves the 3x3 weighted normal equations and returns coefficients plus
/// the unscaled covariance (the inverse normal matrix).
struct TrigSolution {
    std::array<double, 3> c;
    std::array<std::array<double, 3>, 3> cov;
};

TrigSolution solve_trig(const std::vector<double>& angles_deg,
                        const std::vector<double>& rates,
                        const std::vector<double>& weights) {
    const std::size_t n = angles_deg.size();
    double m[3][3] = {};
    double rhs[3] = {};
    for (std::size_t i = 0; i < n; ++i) {
        const double a = 2.0 * angles_deg[i] * kPi / 180.0;
        const double x[3] = {1.0, std::cos(a), std::sin(a)};
        const double w = weights[i];
        for (int r = 0; r < 3; ++r) {
            rhs[r] += w * rates[i] * x[r];
            for (int s = 0; s < 3; ++s) m[r][s] += w * x[r] * x[s];
        }
    }

    // Explicit inverse via the adjugate; the matrix is symmetric 3x3.
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    const double scale = std::abs(m[0][0]) + std::abs(m[1][1]) + std::abs(m[2][2]);
    if (!(std::abs(det) > 1e-12 * scale * scale * scale))
        throw FitError("angle layout too degenerate to separate the fringe terms");

    TrigSolution sol{};
    double inv[3][3];
    inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
    inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
    inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
    inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
    inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
    for (int r = 0; r < 3; ++r) {
        sol.c[r] = 0.0;
        for (int s = 0; s < 3; ++s) {
            sol.c[r] += inv[r][s] * rhs[s];
            sol.cov[r][s] = inv[r][s];
        }
    }
    return sol;
}

VisibilityFit fit_impl(const std::vector<double>& angles_deg,
                       const std::vector<double>& rates,
                       const std::vector<double>& weights,
                       bool scale_cov_by_chi2) {
    const std::size_t n = angles_deg.size();
    if (rates.size() != n || weights.size() != n)
        throw std::invalid_argument("angle, rate, and weight arrays must match in size");
    if (n < 4)
        throw FitError("need at least four fringe points for a three-parameter fit");
    const auto [lo, hi] = std::minmax_element(angles_deg.begin(), angles_deg.end());
    if (!(*hi - *lo >= 90.0))
        throw FitError("fringe scan must span at least 90 degrees");
    for (double w : weights)
        if (!(w > 0.0) || !std::isfinite(w))
            throw std::invalid_argument("weights must be positive and finite");

    const TrigSolution sol = solve_trig(angles_deg, rates, weights);
    const double c0 = sol.c[0], c1 = sol.c[1], c2 = sol.c[2];
    if (!(c0 > 0.0))
        throw FitError("fitted mean rate is not positive; nothing to normalise by");

    VisibilityFit fit;
    fit.n_points = n;
    fit.offset = c0;
    fit.amplitude = std::hypot(c1, c2);
    fit.visibility = fit.amplitude / c0;
    fit.over_range = fit.visibility > 1.0;

    double chi2 = 0.0, rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = 2.0 * angles_deg[i] * kPi / 180.0;
        const double model = c0 + c1 * std::cos(a) + c2 * std::sin(a);
        const double r = rates[i] - model;
        rss += r * r;
        chi2 += weights[i] * r * r;
    }
    fit.residual_rms = std::sqrt(rss / static_cast<double>(n));

    auto cov = sol.cov;
    if (scale_cov_by_chi2) {
        const double s2 = chi2 / static_cast<double>(n - 3);
        for (auto& row : cov)
            for (double& v : row) v *= s2;
    }

    auto propagate = [&cov](const std::array<double, 3>& g) {
        double v = 0.0;
        for (int r = 0; r < 3; ++r)
            for (int s = 0; s < 3; ++s) v += g[r] * cov[r][s] * g[s];
        return std::sqrt(std::max(0.0, v));
    };

    fit.offset_err = propagate({1.0, 0.0, 0.0});
    const double amp = fit.amplitude;
    if (amp > 0.0) {
        const double u1 = c1 / amp, u2 = c2 / amp;
        fit.amplitude_err = propagate({0.0, u1, u2});
        fit.visibility_err =
            propagate({-amp / (c0 * c0), u1 / c0, u2 / c0});
        // Half-angle of atan2(c2, c1), converted to degrees.
        const double d1 = -c2 / (2.0 * amp * amp), d2 = c1 / (2.0 * amp * amp);
        fit.phase_err_deg = propagate({0.0, d1, d2}) * 180.0 / kPi;
        double phase = 0.5 * std::atan2(c2, c1) * 180.0 / kPi;
        if (phase >= 90.0) phase -= 180.0;
        if (phase < -90.0) phase += 180.0;
        fit.phase_deg = phase;
    } else {
        // Constant data: direction undefined, quote the flat-direction scale.
        fit.amplitude_err = std::sqrt(0.5 * (cov[1][1] + cov[2][2]));
        fit.visibility_err = fit.amplitude_err / c0;
        fit.phase_deg = 0.0;
        fit.phase_err_deg = 90.0;
    }
    return fit;
}

} // namespace

VisibilityFit fit_visibility(const std::vector<double>& angles_deg,
                             const std::vector<double>& rates) {
    return fit_impl(angles_deg, rates, std::vector<double>(angles_deg.size(), 1.0),
                    true);
}

VisibilityFit fit_visibility(const std::vector<double>& angles_deg,
                             const std::vector<double>& rates,
                             const std::vector<double>& variances) {
    std::vector<double> weights(variances.size());
    for (std::size_t i = 0; i < variances.size(); ++i) {
        if (!(variances[i] > 0.0))
            throw std::invalid_argument("variances must be positive");
        weights[i] = 1.0 / variances[i];
    }
    return fit_impl(angles_deg, rates, weights, false);
}

FringeAnalysis analyze(const FringeDataset& ds, const DutyCycleTable& table1,
                       const DutyCycleTable& table2) {
    ds.validate();

    const std::size_t n = ds.points.size();
    std::vector<double> angles(n), raw(n), naive(n), corrected(n), var(n);
    FringeAnalysis out;
    out.per_point.reserve(n);

    for (std::size_t i = 0; i < n; ++i) {
        const FringePoint& pt = ds.points[i];
        const double T = pt.integration_s;
        CoincidenceMeasurement m;
        m.s1 = pt.s1_counts / T;
        m.s2 = pt.s2_counts / T;
        m.tau1 = ds.tau1;
        m.tau2 = ds.tau2;
        m.c_raw = pt.c_raw_counts / T;
        m.v_e1 = ds.v_e1;
        m.v_e2 = ds.v_e2;

        CorrectionResult r;
        try {
            r = correct(m, table1, table2);
        } catch (const SaturationAmbiguityError& e) {
            throw SaturationAmbiguityError(
                "angle " + fmt17(pt.angle_deg) + " deg: " + e.what());
        } catch (const RangeError& e) {
            throw RangeError("angle " + fmt17(pt.angle_deg) + " deg: " + e.what());
        }
        out.per_point.push_back(r);

        angles[i] = pt.angle_deg;
        raw[i] = m.c_raw;
        naive[i] = r.c_naive;
        corrected[i] = r.c_corrected;
        // Poisson noise on the raw coincidence counts dominates all three
        // rate estimates; the subtracted terms only shift the mean.
        var[i] = std::max(pt.c_raw_counts, 1.0) / (T * T);
    }

    out.raw = fit_visibility(angles, raw, var);
    out.naive = fit_visibility(angles, naive, var);
    out.corrected = fit_visibility(angles, corrected, var);
    return out;
}

} // namespace apdsim
