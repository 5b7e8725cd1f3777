#ifndef BELLGAP_CLASSICAL_HPP
#define BELLGAP_CLASSICAL_HPP

// EPR-local classical correlation scenarios: classical states over a finite
// variable space Theta, ideal and randomized measurements, and the
// always-satisfied "perfect correlation" Bell inequality.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "lhv.hpp"
#include "scenario.hpp"

namespace bellgap {

struct ClassicalState {
    std::vector<double> pi;

    explicit ClassicalState(std::vector<double> pi_) : pi(std::move(pi_)) {
        if (pi.empty()) throw std::invalid_argument("ClassicalState: empty Theta");
        detail::check_probability_vector(pi, 1e-12, "ClassicalState pi");
    }
    int theta_size() const { return static_cast<int>(pi.size()); }
};

// Conditional outcome distributions P(.|theta) over a grid; an ideal
// measurement is the special case of per-theta point masses.
struct ClassicalMeasurement {
    OutcomeGrid grid;
    std::vector<std::vector<double>> cond;  // cond[theta] over grid

    ClassicalMeasurement(OutcomeGrid g, std::vector<std::vector<double>> c)
        : grid(std::move(g)), cond(std::move(c)) {
        for (const auto& row : cond) {
            if (static_cast<int>(row.size()) != grid.size())
                throw std::invalid_argument("ClassicalMeasurement: conditional length != grid size");
            detail::check_probability_vector(row, 1e-12, "ClassicalMeasurement cond");
        }
        if (cond.empty()) throw std::invalid_argument("ClassicalMeasurement: empty Theta");
    }

    int theta_size() const { return static_cast<int>(cond.size()); }

    // ideal measurement of an observable: outcomes are the observable values
    static ClassicalMeasurement ideal(const std::vector<double>& values) {
        std::vector<double> uniq;
        for (double v : values) {
            bool dup = false;
            for (double u : uniq) dup = dup || (u == v);
            if (!dup) uniq.push_back(v);
        }
        OutcomeGrid g(uniq);
        std::vector<std::vector<double>> c(values.size(), std::vector<double>(g.size(), 0.0));
        for (size_t t = 0; t < values.size(); ++t) c[t][g.index_of(values[t])] = 1.0;
        return ClassicalMeasurement(std::move(g), std::move(c));
    }
};

struct ClassicalObservable {
    std::vector<double> values;  // Theta -> [-1,1]

    explicit ClassicalObservable(std::vector<double> v) : values(std::move(v)) {
        for (double x : values)
            if (x < -1.0 || x > 1.0)
                throw std::invalid_argument("ClassicalObservable: value outside [-1,1]");
    }
    int theta_size() const { return static_cast<int>(values.size()); }
};

// A(theta) = sum_l l * P(l|theta): the observable a measurement realizes in
// average.
inline ClassicalObservable observable_of(const ClassicalMeasurement& m) {
    std::vector<double> v(m.theta_size(), 0.0);
    for (int t = 0; t < m.theta_size(); ++t) {
        double s = 0.0;
        for (int x = 0; x < m.grid.size(); ++x) s += m.grid[x] * m.cond[t][x];
        v[t] = std::clamp(s, -1.0, 1.0);
    }
    return ClassicalObservable(std::move(v));
}

// P(l1,l2) = sum_theta condA(l1|theta) condB(l2|theta) pi(theta)
inline JointDistribution classical_joint(const ClassicalState& pi, const ClassicalMeasurement& mA,
                                         const ClassicalMeasurement& mB) {
    if (mA.theta_size() != pi.theta_size() || mB.theta_size() != pi.theta_size())
        throw std::invalid_argument("classical_joint: Theta size mismatch");
    std::vector<std::vector<double>> t(mA.grid.size(), std::vector<double>(mB.grid.size(), 0.0));
    for (int th = 0; th < pi.theta_size(); ++th) {
        if (pi.pi[th] == 0.0) continue;
        for (int x = 0; x < mA.grid.size(); ++x) {
            const double a = mA.cond[th][x] * pi.pi[th];
            if (a == 0.0) continue;
            for (int y = 0; y < mB.grid.size(); ++y) t[x][y] += a * mB.cond[th][y];
        }
    }
    return JointDistribution(mA.grid, mB.grid, std::move(t));
}

// Pushforward of pi under theta -> (A(theta), B(theta)); the distribution an
// ideal joint measurement of both observables produces.
inline JointDistribution ideal_joint(const ClassicalState& pi, const ClassicalObservable& a,
                                     const ClassicalObservable& b) {
    if (a.theta_size() != pi.theta_size() || b.theta_size() != pi.theta_size())
        throw std::invalid_argument("ideal_joint: Theta size mismatch");
    std::map<double, std::map<double, double>> acc;
    std::vector<double> avals, bvals;
    for (int th = 0; th < pi.theta_size(); ++th) {
        if (pi.pi[th] == 0.0) continue;
        acc[a.values[th]][b.values[th]] += pi.pi[th];
    }
    for (const auto& [av, row] : acc) avals.push_back(av);
    std::map<double, int> bindex;
    for (const auto& [av, row] : acc)
        for (const auto& [bv, mass] : row) bindex[bv] = 0;
    for (const auto& [bv, _] : bindex) bvals.push_back(bv);
    OutcomeGrid g1(avals), g2(bvals);
    std::vector<std::vector<double>> t(g1.size(), std::vector<double>(g2.size(), 0.0));
    for (const auto& [av, row] : acc)
        for (const auto& [bv, mass] : row) t[g1.index_of(av)][g2.index_of(bv)] += mass;
    return JointDistribution(std::move(g1), std::move(g2), std::move(t));
}

struct ClassicalBellAudit {
    double slack = 0.0;
    double c11 = 0.0, c12 = 0.0, c22 = 0.0;
};

// Perfect-correlation Bell slack for three classical observables with
// A2 := B1 measured (possibly in average) at both sites. Nonnegative for
// every classical state: pointwise |A1(B1-B2)| <= |B1-B2| <= 1 - B1*B2.
inline ClassicalBellAudit classical_bell_audit(const ClassicalState& pi, const ClassicalObservable& a1,
                                               const ClassicalObservable& b1,
                                               const ClassicalObservable& b2) {
    const int n = pi.theta_size();
    if (a1.theta_size() != n || b1.theta_size() != n || b2.theta_size() != n)
        throw std::invalid_argument("classical_bell_audit: Theta size mismatch");
    ClassicalBellAudit r;
    for (int th = 0; th < n; ++th) {
        r.c11 += a1.values[th] * b1.values[th] * pi.pi[th];
        r.c12 += a1.values[th] * b2.values[th] * pi.pi[th];
        r.c22 += b1.values[th] * b2.values[th] * pi.pi[th];
    }
    r.slack = (1.0 - r.c22) - std::abs(r.c11 - r.c12);
    return r;
}

// Embed a classical scenario as an LHV model for joint distributions:
// Omega := Theta, nu := pi, conditionals copied (grids merged per site).
inline ConditionalLhvModel as_conditional_lhv(const ClassicalState& pi, const ClassicalMeasurement& mA1,
                                              const ClassicalMeasurement& mA2,
                                              const ClassicalMeasurement& mB1,
                                              const ClassicalMeasurement& mB2) {
    const int n = pi.theta_size();
    for (const auto* m : {&mA1, &mA2, &mB1, &mB2})
        if (m->theta_size() != n) throw std::invalid_argument("as_conditional_lhv: Theta size mismatch");

    const OutcomeGrid g1 = merge_grids(mA1.grid, mA2.grid);
    const OutcomeGrid g2 = merge_grids(mB1.grid, mB2.grid);
    auto embed = [](const ClassicalMeasurement& m, const OutcomeGrid& g) {
        std::vector<std::vector<double>> out(m.theta_size(), std::vector<double>(g.size(), 0.0));
        for (int t = 0; t < m.theta_size(); ++t)
            for (int x = 0; x < m.grid.size(); ++x) out[t][g.index_of(m.grid[x])] += m.cond[t][x];
        return out;
    };
    std::array<std::vector<std::vector<double>>, 2> p1 = {embed(mA1, g1), embed(mA2, g1)};
    std::array<std::vector<std::vector<double>>, 2> p2 = {embed(mB1, g2), embed(mB2, g2)};
    return ConditionalLhvModel(pi.pi, g1, g2, std::move(p1), std::move(p2));
}

// ---- seeded generators ----

inline ClassicalObservable random_classical_observable(Rng& rng, int theta_size) {
    std::vector<double> v(theta_size);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    return ClassicalObservable(std::move(v));
}

inline ClassicalMeasurement random_classical_measurement(Rng& rng, int theta_size,
                                                         bool ideal = false) {
    if (ideal) {
        std::vector<double> v(theta_size);
        for (auto& x : v) x = rng.uniform(-1.0, 1.0);
        return ClassicalMeasurement::ideal(v);
    }
    OutcomeGrid g = random_grid(rng, 2, 4);
    std::vector<std::vector<double>> c(theta_size);
    for (auto& row : c) row = rng.simplex(g.size());
    return ClassicalMeasurement(std::move(g), std::move(c));
}

// symmetric bit-flip noise applied to an ideal dichotomic measurement
inline ClassicalMeasurement noisy_dichotomic_measurement(const std::vector<double>& outcomes,
                                                         double flip) {
    OutcomeGrid g = OutcomeGrid::dichotomic();
    std::vector<std::vector<double>> c(outcomes.size(), std::vector<double>(2, 0.0));
    for (size_t t = 0; t < outcomes.size(); ++t) {
        if (outcomes[t] != 1.0 && outcomes[t] != -1.0)
            throw std::invalid_argument("noisy_dichotomic_measurement: outcomes must be +/-1");
        const int hit = g.index_of(outcomes[t]);
        c[t][hit] = 1.0 - flip;
        c[t][1 - hit] = flip;
    }
    return ClassicalMeasurement(std::move(g), std::move(c));
}

}  // namespace bellgap

#endif
