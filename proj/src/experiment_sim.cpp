#include "apdsim/experiment_sim.hpp"

#include <cmath>
#include <stdexcept>

#include "apdsim/rng.hpp"

namespace apdsim {

long long count_overlaps(const std::vector<double>& a,
                         const std::vector<double>& b, double tau1,
                         double tau2) {
    if (!(tau1 >= 0.0) || !(tau2 >= 0.0) || !(tau1 + tau2 > 0.0))
        throw std::invalid_argument("gate widths must be non-negative with a positive sum");
    // Windows [t1, t1 + tau1) and [t2, t2 + tau2) intersect exactly when
    // t2 - tau1 < t1 < t2 + tau2. Both bounds move right with t2, so two
    // cursors over the sorted lists count every pair in linear time.
    long long pairs = 0;
    std::size_t lo = 0, hi = 0;
    for (const double t2 : b) {
        while (lo < a.size() && a[lo] <= t2 - tau1) ++lo;
        if (hi < lo) hi = lo;
        while (hi < a.size() && a[hi] < t2 + tau2) ++hi;
        pairs += static_cast<long long>(hi - lo);
    }
    return pairs;
}

long long count_overlaps(const DetectorTrace& t1, const DetectorTrace& t2,
                         double tau1, double tau2) {
    if (t1.duration != t2.duration)
        throw std::invalid_argument("traces must cover the same duration");
    return count_overlaps(sensed_times(t1), sensed_times(t2), tau1, tau2);
}

AccidentalsMeasurement measure_accidentals(const DetectorParams& p1,
                                           const DetectorParams& p2,
                                           double rate1, double rate2,
                                           double tau1, double tau2,
                                           double duration, std::uint64_t seed) {
    if (!(rate1 > 0.0) || !(rate2 > 0.0))
        throw std::invalid_argument("input rates must be positive");
    if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");

    SourceModel src1, src2;
    src1.rate = rate1;
    src2.rate = rate2;
    const EventSequence seq1 = generate(src1, duration, derive_seed(seed, 1, 0));
    const EventSequence seq2 = generate(src2, duration, derive_seed(seed, 2, 0));
    const DetectorTrace tr1 = simulate(seq1, p1, derive_seed(seed, 1, 1));
    const DetectorTrace tr2 = simulate(seq2, p2, derive_seed(seed, 2, 1));

    AccidentalsMeasurement m;
    m.duration = duration;
    m.overlap_count = count_overlaps(tr1, tr2, tau1, tau2);
    m.measured_rate = static_cast<double>(m.overlap_count) / duration;
    m.est1 = estimate_duty_cycle(tr1);
    m.est2 = estimate_duty_cycle(tr2);
    m.s1 = m.est1.observed_rate;
    m.s2 = m.est2.observed_rate;
    return m;
}

void PairSourceModel::validate() const {
    if (!(pair_rate >= 0.0)) throw std::invalid_argument("pair rate must be non-negative");
    if (!(visibility >= 0.0 && visibility <= 1.0))
        throw std::invalid_argument("visibility must lie in [0, 1]");
    if (!std::isfinite(phase_deg)) throw std::invalid_argument("phase must be finite");
    if (!(background1 >= 0.0) || !(background2 >= 0.0))
        throw std::invalid_argument("background rates must be non-negative");
}

FringeDataset generate_fringe_dataset(const PairSourceModel& model,
                                      const DetectorParams& p1,
                                      const DetectorParams& p2,
                                      const std::vector<double>& angles_deg,
                                      double tau1, double tau2,
                                      double duration_per_angle,
                                      std::uint64_t seed) {
    model.validate();
    p1.validate();
    p2.validate();
    if (angles_deg.empty()) throw std::invalid_argument("need at least one angle");
    if (!(duration_per_angle > 0.0))
        throw std::invalid_argument("duration per angle must be positive");
    if (!(tau1 >= 0.0) || !(tau2 >= 0.0) || !(tau1 + tau2 > 0.0))
        throw std::invalid_argument("gate widths must be non-negative with a positive sum");

    constexpr double kPi = 3.14159265358979323846;
    FringeDataset ds;
    ds.tau1 = tau1;
    ds.tau2 = tau2;
    ds.v_e1 = p1.v_e_set;
    ds.v_e2 = p2.v_e_set;
    ds.points.reserve(angles_deg.size());

    for (std::size_t k = 0; k < angles_deg.size(); ++k) {
        const double theta = angles_deg[k];
        const double retain =
            0.5 * (1.0 + model.visibility *
                             std::cos(2.0 * (theta - model.phase_deg) * kPi / 180.0));

        // Pairs are simultaneous on both arms; the analyser thins them.
        SourceModel pair_src;
        pair_src.rate = model.pair_rate;
        EventSequence pairs =
            generate(pair_src, duration_per_angle, derive_seed(seed, k, 10));
        SimRng thinning(derive_seed(seed, k, 11));
        EventSequence retained;
        retained.duration = duration_per_angle;
        retained.source_rate = model.pair_rate * retain;
        for (const double t : pairs.times)
            if (thinning.bernoulli(retain)) retained.times.push_back(t);

        SourceModel bg1_src, bg2_src;
        bg1_src.rate = model.background1;
        bg2_src.rate = model.background2;
        const EventSequence bg1 =
            generate(bg1_src, duration_per_angle, derive_seed(seed, k, 12));
        const EventSequence bg2 =
            generate(bg2_src, duration_per_angle, derive_seed(seed, k, 13));

        const EventSequence arm1 = merge(retained, bg1);
        const EventSequence arm2 = merge(retained, bg2);
        const DetectorTrace tr1 = simulate(arm1, p1, derive_seed(seed, k, 14));
        const DetectorTrace tr2 = simulate(arm2, p2, derive_seed(seed, k, 15));

        FringePoint pt;
        pt.angle_deg = theta;
        pt.c_raw_counts =
            static_cast<double>(count_overlaps(tr1, tr2, tau1, tau2));
        pt.s1_counts = static_cast<double>(tr1.sensed_count);
        pt.s2_counts = static_cast<double>(tr2.sensed_count);
        pt.integration_s = duration_per_angle;
        ds.points.push_back(pt);
    }
    return ds;
}

} // namespace apdsim
