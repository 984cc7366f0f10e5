#include "apdsim/lut.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "apdsim/detector_sim.hpp"
#include "apdsim/errors.hpp"
#include "apdsim/rng.hpp"
#include "apdsim/serialization.hpp"

namespace apdsim {

double DutyCycleTable::at(std::size_t i_ve, std::size_t j_obs) const {
    return eta[i_ve * observed_rate_axis.size() + j_obs];
}

namespace {

void require_strictly_increasing(const std::vector<double>& v, const char* name) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0) || !std::isfinite(v[i]))
            throw std::invalid_argument(std::string(name) + " must be positive and finite");
        if (i > 0 && !(v[i] > v[i - 1]))
            throw std::invalid_argument(std::string(name) + " must be strictly increasing");
    }
}

} // namespace

void DutyCycleTable::validate() const {
    if (v_e_axis.empty()) throw std::invalid_argument("empty v_e axis");
    if (observed_rate_axis.size() < 2)
        throw std::invalid_argument("observed rate axis needs at least two points");
    require_strictly_increasing(v_e_axis, "v_e axis");
    require_strictly_increasing(observed_rate_axis, "observed rate axis");
    if (eta.size() != v_e_axis.size() * observed_rate_axis.size())
        throw std::invalid_argument("grid size does not match axes");
    for (std::size_t i = 0; i < v_e_axis.size(); ++i) {
        for (std::size_t j = 0; j < observed_rate_axis.size(); ++j) {
            const double e = at(i, j);
            if (!(e >= 0.0 && e <= 1.0))
                throw std::invalid_argument("eta outside [0, 1]");
            if (j > 0 && !(e < at(i, j - 1)))
                throw std::invalid_argument("eta rows must decrease with observed rate");
        }
    }
}

namespace {

/// Weighted projection onto non-increasing sequences (pool adjacent
/// violators). Returns the projected values.
std::vector<double> project_nonincreasing(const std::vector<double>& y,
                                          const std::vector<double>& w) {
    struct Block {
        double mean, weight;
        std::size_t count;
    };
    std::vector<Block> blocks;
    blocks.reserve(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        blocks.push_back({y[i], w[i], 1});
        while (blocks.size() >= 2 &&
               blocks[blocks.size() - 1].mean > blocks[blocks.size() - 2].mean) {
            Block b = blocks.back();
            blocks.pop_back();
            Block& a = blocks.back();
            const double tw = a.weight + b.weight;
            a.mean = (a.mean * a.weight + b.mean * b.weight) / tw;
            a.weight = tw;
            a.count += b.count;
        }
    }
    std::vector<double> out;
    out.reserve(y.size());
    for (const Block& b : blocks)
        out.insert(out.end(), b.count, b.mean);
    return out;
}

/// Flat or merged runs from the projection are tilted apart by a relative
/// epsilon so rows satisfy the strict-decrease invariant. The shift is far
/// below the Monte Carlo noise of any practical cell size.
void strictify_decreasing(std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        const double gap = std::max(1e-12, v[i - 1] * 1e-9);
        if (!(v[i] < v[i - 1] - gap)) v[i] = v[i - 1] - gap;
    }
}

struct RowPoint {
    double obs, eta, weight;
};

double interp_linear(const std::vector<RowPoint>& pts, double x) {
    // x is inside [pts.front().obs, pts.back().obs] by construction.
    std::size_t hi = 1;
    while (hi + 1 < pts.size() && pts[hi].obs < x) ++hi;
    const RowPoint& a = pts[hi - 1];
    const RowPoint& b = pts[hi];
    if (x == a.obs) return a.eta;
    if (x == b.obs) return b.eta;
    const double t = (x - a.obs) / (b.obs - a.obs);
    return a.eta + t * (b.eta - a.eta);
}

std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string utc_now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

DutyCycleTable build_table(const DetectorParams& base,
                           const std::vector<double>& v_e_values,
                           const std::vector<double>& input_rates,
                           double duration, std::uint64_t seed,
                           const LutBuildOptions& options) {
    base.validate();
    if (v_e_values.empty()) throw std::invalid_argument("need at least one v_e value");
    require_strictly_increasing(v_e_values, "v_e values");
    if (input_rates.size() < 2)
        throw std::invalid_argument("need at least two input rates");
    require_strictly_increasing(input_rates, "input rates");
    if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
    if (!(options.min_events_per_cell >= 0.0))
        throw std::invalid_argument("min_events_per_cell must be non-negative");
    if (options.jobs < 1) throw std::invalid_argument("jobs must be at least one");

    const std::size_t nv = v_e_values.size();
    const std::size_t nr = input_rates.size();

    // Per-row parameter sets; validate up front so a bad row fails fast.
    std::vector<DetectorParams> row_params(nv, base);
    for (std::size_t i = 0; i < nv; ++i) {
        row_params[i].v_e_set = v_e_values[i];
        row_params[i].validate();
    }

    // Simulate every cell; cells are independent, so threads just pull the
    // next flat index. Per-cell seeds keep the result identical at any job
    // count.
    std::vector<DutyCycleEstimate> cells(nv * nr);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= cells.size()) return;
            const std::size_t i = c / nr, j = c % nr;
            const double rate = input_rates[j];
            const double window =
                std::max(duration, options.min_events_per_cell / rate);
            SourceModel src;
            src.rate = rate;
            const EventSequence seq = generate(src, window, derive_seed(seed, c, 1));
            const DetectorTrace tr = simulate(seq, row_params[i], derive_seed(seed, c, 2));
            cells[c] = estimate_duty_cycle(tr);
        }
    };
    const int jobs = std::min<int>(options.jobs, static_cast<int>(cells.size()));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Per row: keep the strictly rising observed-rate prefix up to the
    // curve's maximum, then force eta monotone.
    std::vector<std::vector<RowPoint>> rows(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        const DutyCycleEstimate* row = &cells[i * nr];
        std::size_t peak = 0;
        for (std::size_t j = 1; j < nr; ++j)
            if (row[j].observed_rate > row[peak].observed_rate) peak = j;

        std::vector<RowPoint> kept;
        for (std::size_t j = 0; j <= peak; ++j) {
            if (!kept.empty() && !(row[j].observed_rate > kept.back().obs)) continue;
            kept.push_back({row[j].observed_rate, row[j].eta_fractional,
                            static_cast<double>(row[j].input_count)});
        }
        if (kept.size() < 2)
            throw BuildError("v_e=" + fmt17(v_e_values[i]) +
                             ": fewer than two usable sweep points before the "
                             "observed-rate maximum; extend input_rates downward");

        std::vector<double> etas(kept.size()), weights(kept.size());
        for (std::size_t k = 0; k < kept.size(); ++k) {
            etas[k] = kept[k].eta;
            weights[k] = kept[k].weight;
        }
        etas = project_nonincreasing(etas, weights);
        strictify_decreasing(etas);
        for (std::size_t k = 0; k < kept.size(); ++k) kept[k].eta = etas[k];
        rows[i] = std::move(kept);
    }

    // Common observed-rate axis: intersection of the rows' covered ranges,
    // log spaced, as many points as the input-rate sweep.
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (const auto& row : rows) {
        lo = std::max(lo, row.front().obs);
        hi = std::min(hi, row.back().obs);
    }
    if (!(lo < hi))
        throw BuildError("rows share no observed-rate range; "
                         "v_e values may be too far apart for this sweep");

    DutyCycleTable table;
    table.v_e_axis = v_e_values;
    table.observed_rate_axis.resize(nr);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (std::size_t j = 0; j < nr; ++j)
        table.observed_rate_axis[j] =
            std::exp(llo + (lhi - llo) * static_cast<double>(j) /
                               static_cast<double>(nr - 1));
    table.observed_rate_axis.front() = lo;
    table.observed_rate_axis.back() = hi;

    table.eta.resize(nv * nr);
    for (std::size_t i = 0; i < nv; ++i) {
        std::vector<double> resampled(nr);
        for (std::size_t j = 0; j < nr; ++j)
            resampled[j] = interp_linear(rows[i], table.observed_rate_axis[j]);
        strictify_decreasing(resampled);
        for (std::size_t j = 0; j < nr; ++j) table.eta[i * nr + j] = resampled[j];
    }

    table.provenance.detector = base;
    table.provenance.input_rates = input_rates;
    table.provenance.duration = duration;
    table.provenance.min_events_per_cell = options.min_events_per_cell;
    table.provenance.seed = seed;
    table.provenance.created_utc =
        options.created_utc.empty() ? utc_now_iso8601() : options.created_utc;

    table.validate();
    return table;
}

double lookup_eta(const DutyCycleTable& table, double v_e, double observed_rate) {
    const auto& vx = table.v_e_axis;
    const auto& ox = table.observed_rate_axis;
    if (vx.empty() || ox.size() < 2 ||
        table.eta.size() != vx.size() * ox.size())
        throw std::invalid_argument("malformed duty-cycle table");

    if (v_e < vx.front() || v_e > vx.back())
        throw RangeError("v_e " + fmt17(v_e) + " outside table range [" +
                         fmt17(vx.front()) + ", " + fmt17(vx.back()) + "]");
    if (observed_rate < ox.front())
        throw RangeError("observed rate " + fmt17(observed_rate) +
                         " below table range [" + fmt17(ox.front()) + ", " +
                         fmt17(ox.back()) + "]");
    if (observed_rate > ox.back())
        throw SaturationAmbiguityError(
            "observed rate " + fmt17(observed_rate) + " above table maximum " +
            fmt17(ox.back()) +
            "; beyond the roll-over one observed rate maps to two operating "
            "points");

    auto locate = [](const std::vector<double>& axis, double x,
                     std::size_t& idx, double& frac) {
        if (axis.size() == 1) {
            idx = 0;
            frac = 0.0;
            return;
        }
        auto it = std::upper_bound(axis.begin(), axis.end(), x);
        std::size_t k = static_cast<std::size_t>(it - axis.begin());
        if (k == 0) k = 1;
        if (k == axis.size()) k = axis.size() - 1;
        idx = k - 1;
        frac = (x - axis[idx]) / (axis[idx + 1] - axis[idx]);
    };

    std::size_t i = 0, j = 0;
    double t = 0.0, u = 0.0;
    locate(vx, v_e, i, t);
    locate(ox, observed_rate, j, u);

    if (vx.size() == 1) {
        // Degenerate single-row table: only exact v_e queries make sense.
        if (v_e != vx.front())
            throw RangeError("single-row table: v_e must equal " + fmt17(vx.front()));
        return (1.0 - u) * table.at(0, j) + u * table.at(0, j + 1);
    }

    const double z00 = table.at(i, j), z01 = table.at(i, j + 1);
    const double z10 = table.at(i + 1, j), z11 = table.at(i + 1, j + 1);
    return (1.0 - t) * ((1.0 - u) * z00 + u * z01) +
           t * ((1.0 - u) * z10 + u * z11);
}

namespace {

nlohmann::json provenance_to_json(const LutProvenance& p) {
    return nlohmann::json{
        {"detector", p.detector},
        {"input_rates", p.input_rates},
        {"duration", p.duration},
        {"min_events_per_cell", p.min_events_per_cell},
        {"seed", p.seed},
        {"created_utc", p.created_utc},
    };
}

LutProvenance provenance_from_json(const nlohmann::json& j) {
    check_keys(j, "provenance",
               {"detector", "input_rates", "duration", "min_events_per_cell",
                "seed", "created_utc"});
    LutProvenance p;
    p.detector = j.at("detector").get<DetectorParams>();
    p.input_rates = j.at("input_rates").get<std::vector<double>>();
    p.duration = j.at("duration").get<double>();
    p.min_events_per_cell = j.at("min_events_per_cell").get<double>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.created_utc = j.at("created_utc").get<std::string>();
    return p;
}

} // namespace

void save_table(const DutyCycleTable& table, std::ostream& out) {
    nlohmann::json j{
        {"format", "apdsim-duty-cycle-table"},
        {"version", "1"},
        {"provenance", provenance_to_json(table.provenance)},
        {"v_e_axis", table.v_e_axis},
        {"observed_rate_axis", table.observed_rate_axis},
        {"eta", table.eta},
    };
    out << j.dump(2) << "\n";
}

void save_table(const DutyCycleTable& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    save_table(table, out);
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

DutyCycleTable load_table(std::istream& in) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("table file is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || j.value("format", "") != "apdsim-duty-cycle-table")
        throw ParseError("not a duty-cycle table file (missing format tag)");
    if (j.value("version", "") != "1")
        throw ParseError("unsupported table version \"" +
                         j.value("version", std::string("<missing>")) +
                         "\"; this build reads version 1");
    check_keys(j, "table",
               {"format", "version", "provenance", "v_e_axis",
                "observed_rate_axis", "eta"});

    DutyCycleTable table;
    try {
        table.provenance = provenance_from_json(j.at("provenance"));
        table.v_e_axis = j.at("v_e_axis").get<std::vector<double>>();
        table.observed_rate_axis =
            j.at("observed_rate_axis").get<std::vector<double>>();
        table.eta = j.at("eta").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed table field: ") + e.what());
    }
    try {
        table.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("table invariants violated: ") + e.what());
    }
    return table;
}

DutyCycleTable load_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    return load_table(in);
}

void write_table_csv(const DutyCycleTable& table, std::ostream& out) {
    out << "v_e,observed_rate,eta\n";
    for (std::size_t i = 0; i < table.v_e_axis.size(); ++i)
        for (std::size_t j = 0; j < table.observed_rate_axis.size(); ++j)
            out << fmt17(table.v_e_axis[i]) << ','
                << fmt17(table.observed_rate_axis[j]) << ',' << fmt17(table.at(i, j))
                << "\n";
}

} // namespace apdsim
