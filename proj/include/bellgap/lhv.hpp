#ifndef BELLGAP_LHV_HPP
#define BELLGAP_LHV_HPP

// Finite local hidden variable models of both kinds (for correlation
// functions and for joint probability distributions), the general sufficient
// condition for the original Bell inequality in both forms, and the
// dichotomic decomposition chain.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rng.hpp"
#include "scenario.hpp"

namespace bellgap {

namespace detail {
inline void check_probability_vector(const std::vector<double>& v, double tol, const char* what) {
    double s = 0.0;
    for (double x : v) {
        if (x < 0.0) throw std::invalid_argument(std::string(what) + ": negative entry");
        s += x;
    }
    if (std::abs(s - 1.0) > tol)
        throw std::invalid_argument(std::string(what) + ": mass deviates from 1");
}
inline void check_setting(int i) {
    if (i != 1 && i != 2) throw std::invalid_argument("setting index must be 1 or 2");
}
}  // namespace detail

// Hidden variable space Omega with distribution nu and per-setting response
// functions f1, f2 with values in [-1,1].
struct CorrelationLhvModel {
    std::vector<double> nu;
    std::array<std::vector<double>, 2> f1;  // settings a1, a2
    std::array<std::vector<double>, 2> f2;  // settings b1, b2

    CorrelationLhvModel(std::vector<double> nu_, std::array<std::vector<double>, 2> f1_,
                        std::array<std::vector<double>, 2> f2_)
        : nu(std::move(nu_)), f1(std::move(f1_)), f2(std::move(f2_)) {
        if (nu.empty()) throw std::invalid_argument("CorrelationLhvModel: empty Omega");
        detail::check_probability_vector(nu, 1e-12, "CorrelationLhvModel nu");
        for (const auto* fs : {&f1, &f2})
            for (const auto& f : *fs) {
                if (f.size() != nu.size())
                    throw std::invalid_argument("CorrelationLhvModel: response length != |Omega|");
                for (double x : f)
                    if (x < -1.0 || x > 1.0)
                        throw std::invalid_argument("CorrelationLhvModel: response value outside [-1,1]");
            }
    }

    int omega_size() const { return static_cast<int>(nu.size()); }
};

// sum_w f1_i(w)^p * f2_k(w)^q * nu(w), p+q <= 2
inline double lhv_moment(const CorrelationLhvModel& m, int i, int k, int p, int q) {
    detail::check_setting(i);
    detail::check_setting(k);
    if (p < 0 || q < 0 || p + q > 2) throw std::invalid_argument("lhv_moment: powers must satisfy p+q <= 2");
    const auto& fa = m.f1[i - 1];
    const auto& fb = m.f2[k - 1];
    double s = 0.0;
    for (size_t w = 0; w < m.nu.size(); ++w)
        s += std::pow(fa[w], p) * std::pow(fb[w], q) * m.nu[w];
    return s;
}

inline CorrelationQuad correlation_quad(const CorrelationLhvModel& m) {
    return CorrelationQuad(lhv_moment(m, 1, 1, 1, 1), lhv_moment(m, 1, 2, 1, 1),
                           lhv_moment(m, 2, 1, 1, 1), lhv_moment(m, 2, 2, 1, 1));
}

// sum_w f2_2(w) * (f2_1(w) -/+ f1_2(w)) * nu(w); the general sufficient
// condition holds iff the value is >= -1e-12.
inline double condition8_value(const CorrelationLhvModel& m, SignVersion sign) {
    const double sf = sign_factor(sign);
    double s = 0.0;
    for (size_t w = 0; w < m.nu.size(); ++w)
        s += m.f2[1][w] * (m.f2[0][w] + sf * m.f1[1][w]) * m.nu[w];
    return s;
}

struct Theorem1Report {
    double condition8 = 0.0;
    double slack = 0.0;
    bool consistent = true;  // condition8 >= 0 must never coexist with slack < -1e-12
};

inline Theorem1Report theorem1_check(const CorrelationLhvModel& m, SignVersion sign) {
    Theorem1Report r;
    r.condition8 = condition8_value(m, sign);
    r.slack = bell_slack(correlation_quad(m), sign);
    r.consistent = !(r.condition8 >= 0.0 && r.slack < -1e-12);
    return r;
}

// f1_2(w) = +/- f2_1(w) for every w carrying nu-mass
inline bool pointwise_eq12_check(const CorrelationLhvModel& m, SignVersion sign, double tol = 1e-12) {
    const double sf = sign_factor(sign);
    for (size_t w = 0; w < m.nu.size(); ++w) {
        if (m.nu[w] <= 0.0) continue;
        if (std::abs(m.f1[1][w] + sf * m.f2[0][w]) > tol) return false;
    }
    return true;
}

// Hidden variable model with per-setting conditional outcome distributions
// over shared site grids.
struct ConditionalLhvModel {
    std::vector<double> nu;
    OutcomeGrid grid1, grid2;
    // p1[setting-1][omega] is a probability vector over grid1; p2 over grid2
    std::array<std::vector<std::vector<double>>, 2> p1;
    std::array<std::vector<std::vector<double>>, 2> p2;

    ConditionalLhvModel(std::vector<double> nu_, OutcomeGrid g1, OutcomeGrid g2,
                        std::array<std::vector<std::vector<double>>, 2> p1_,
                        std::array<std::vector<std::vector<double>>, 2> p2_)
        : nu(std::move(nu_)), grid1(std::move(g1)), grid2(std::move(g2)), p1(std::move(p1_)),
          p2(std::move(p2_)) {
        if (nu.empty()) throw std::invalid_argument("ConditionalLhvModel: empty Omega");
        detail::check_probability_vector(nu, 1e-12, "ConditionalLhvModel nu");
        auto check_site = [&](const std::array<std::vector<std::vector<double>>, 2>& p, int grid_size,
                              const char* what) {
            for (const auto& per_setting : p) {
                if (per_setting.size() != nu.size())
                    throw std::invalid_argument(std::string(what) + ": conditional count != |Omega|");
                for (size_t w = 0; w < per_setting.size(); ++w) {
                    if (static_cast<int>(per_setting[w].size()) != grid_size)
                        throw std::invalid_argument(std::string(what) + ": conditional length != grid size");
                    if (nu[w] > 0.0) detail::check_probability_vector(per_setting[w], 1e-12, what);
                }
            }
        };
        check_site(p1, grid1.size(), "ConditionalLhvModel p1");
        check_site(p2, grid2.size(), "ConditionalLhvModel p2");
    }

    int omega_size() const { return static_cast<int>(nu.size()); }
};

// P(l1,l2) = sum_w p1_i(l1|w) p2_k(l2|w) nu(w)
inline JointDistribution lhv_joint(const ConditionalLhvModel& m, int i, int k) {
    detail::check_setting(i);
    detail::check_setting(k);
    const auto& pa = m.p1[i - 1];
    const auto& pb = m.p2[k - 1];
    std::vector<std::vector<double>> t(m.grid1.size(), std::vector<double>(m.grid2.size(), 0.0));
    for (size_t w = 0; w < m.nu.size(); ++w) {
        if (m.nu[w] == 0.0) continue;
        for (int x = 0; x < m.grid1.size(); ++x) {
            const double ax = pa[w][x] * m.nu[w];
            if (ax == 0.0) continue;
            for (int y = 0; y < m.grid2.size(); ++y) t[x][y] += ax * pb[w][y];
        }
    }
    return JointDistribution(m.grid1, m.grid2, std::move(t));
}

// Average the conditionals: f(w) = sum_l l * p(l|w). Reduces a model for
// joint distributions to a model for correlation functions over the same nu.
inline CorrelationLhvModel induced_correlation_model(const ConditionalLhvModel& m) {
    std::array<std::vector<double>, 2> f1, f2;
    for (int s = 0; s < 2; ++s) {
        f1[s].resize(m.nu.size(), 0.0);
        f2[s].resize(m.nu.size(), 0.0);
        for (size_t w = 0; w < m.nu.size(); ++w) {
            double a = 0.0, b = 0.0;
            for (int x = 0; x < m.grid1.size(); ++x) a += m.grid1[x] * m.p1[s][w][x];
            for (int y = 0; y < m.grid2.size(); ++y) b += m.grid2[y] * m.p2[s][w][y];
            // conditionals under a nu-null w may be arbitrary; clamp rounding
            f1[s][w] = std::clamp(a, -1.0, 1.0);
            f2[s][w] = std::clamp(b, -1.0, 1.0);
        }
    }
    return CorrelationLhvModel(m.nu, std::move(f1), std::move(f2));
}

// Probability table over grids (l1', l2, l2').
class TripartiteMeasure {
public:
    TripartiteMeasure(OutcomeGrid g1p, OutcomeGrid g2, OutcomeGrid g2p,
                      std::vector<std::vector<std::vector<double>>> probs)
        : g1p_(std::move(g1p)), g2_(std::move(g2)), g2p_(std::move(g2p)), p_(std::move(probs)) {
        if (static_cast<int>(p_.size()) != g1p_.size())
            throw std::invalid_argument("TripartiteMeasure: axis-1 size mismatch");
        double mass = 0.0;
        for (auto& plane : p_) {
            if (static_cast<int>(plane.size()) != g2_.size())
                throw std::invalid_argument("TripartiteMeasure: axis-2 size mismatch");
            for (auto& row : plane) {
                if (static_cast<int>(row.size()) != g2p_.size())
                    throw std::invalid_argument("TripartiteMeasure: axis-3 size mismatch");
                for (double& x : row) {
                    if (x < 0.0) {
                        if (x < -1e-12) throw std::invalid_argument("TripartiteMeasure: negative entry");
                        x = 0.0;
                    }
                    mass += x;
                }
            }
        }
        if (std::abs(mass - 1.0) > 1e-9)
            throw std::invalid_argument("TripartiteMeasure: total mass deviates from 1 by more than 1e-9");
        if (mass != 1.0)
            for (auto& plane : p_)
                for (auto& row : plane)
                    for (double& x : row) x /= mass;
    }

    const OutcomeGrid& grid1p() const { return g1p_; }
    const OutcomeGrid& grid2() const { return g2_; }
    const OutcomeGrid& grid2p() const { return g2p_; }
    double prob(int i, int j, int k) const { return p_[i][j][k]; }

    bool is_dichotomic() const {
        return g1p_.is_dichotomic() && g2_.is_dichotomic() && g2p_.is_dichotomic();
    }

    // mass of the event {pred(l1', l2, l2')}
    template <class Pred>
    double event_mass(Pred&& pred) const {
        double s = 0.0;
        for (int i = 0; i < g1p_.size(); ++i)
            for (int j = 0; j < g2_.size(); ++j)
                for (int k = 0; k < g2p_.size(); ++k)
                    if (pred(g1p_[i], g2_[j], g2p_[k])) s += p_[i][j][k];
        return s;
    }

    // marginal over the third axis -> distribution of (l1', l2)
    JointDistribution marginal_12() const {
        std::vector<std::vector<double>> t(g1p_.size(), std::vector<double>(g2_.size(), 0.0));
        for (int i = 0; i < g1p_.size(); ++i)
            for (int j = 0; j < g2_.size(); ++j)
                for (int k = 0; k < g2p_.size(); ++k) t[i][j] += p_[i][j][k];
        return JointDistribution(g1p_, g2_, std::move(t));
    }
    // marginal over the second axis -> distribution of (l1', l2')
    JointDistribution marginal_13() const {
        std::vector<std::vector<double>> t(g1p_.size(), std::vector<double>(g2p_.size(), 0.0));
        for (int i = 0; i < g1p_.size(); ++i)
            for (int j = 0; j < g2_.size(); ++j)
                for (int k = 0; k < g2p_.size(); ++k) t[i][k] += p_[i][j][k];
        return JointDistribution(g1p_, g2p_, std::move(t));
    }
    // marginal over the first axis -> distribution of (l2, l2')
    JointDistribution marginal_23() const {
        std::vector<std::vector<double>> t(g2_.size(), std::vector<double>(g2p_.size(), 0.0));
        for (int i = 0; i < g1p_.size(); ++i)
            for (int j = 0; j < g2_.size(); ++j)
                for (int k = 0; k < g2p_.size(); ++k) t[j][k] += p_[i][j][k];
        return JointDistribution(g2_, g2p_, std::move(t));
    }

private:
    OutcomeGrid g1p_, g2_, g2p_;
    std::vector<std::vector<std::vector<double>>> p_;
};

// mu(l1',l2,l2') = sum_w p1_2(l1'|w) p2_1(l2|w) p2_2(l2'|w) nu(w)
inline TripartiteMeasure induced_mu(const ConditionalLhvModel& m) {
    std::vector<std::vector<std::vector<double>>> t(
        m.grid1.size(),
        std::vector<std::vector<double>>(m.grid2.size(), std::vector<double>(m.grid2.size(), 0.0)));
    for (size_t w = 0; w < m.nu.size(); ++w) {
        if (m.nu[w] == 0.0) continue;
        for (int i = 0; i < m.grid1.size(); ++i) {
            const double a = m.p1[1][w][i] * m.nu[w];
            if (a == 0.0) continue;
            for (int j = 0; j < m.grid2.size(); ++j) {
                const double ab = a * m.p2[0][w][j];
                if (ab == 0.0) continue;
                for (int k = 0; k < m.grid2.size(); ++k) t[i][j][k] += ab * m.p2[1][w][k];
            }
        }
    }
    return TripartiteMeasure(m.grid1, m.grid2, m.grid2, std::move(t));
}

// sum l2' * (l2 -/+ l1') mu(l1',l2,l2'); the distributional form of the
// general sufficient condition, >= -1e-12 means it holds.
inline double condition21_value(const TripartiteMeasure& mu, SignVersion sign) {
    const double sf = sign_factor(sign);
    double s = 0.0;
    for (int i = 0; i < mu.grid1p().size(); ++i)
        for (int j = 0; j < mu.grid2().size(); ++j)
            for (int k = 0; k < mu.grid2p().size(); ++k)
                s += mu.grid2p()[k] * (mu.grid2()[j] + sf * mu.grid1p()[i]) * mu.prob(i, j, k);
    return s;
}

struct DichotomicMuBounds {
    double lhs = 0.0;       // minus-sign condition value
    double bound_w = 0.0;   // 2*mu(l1'l2=-1) - 4*mu(l1'l2'=1)
    double bound_www = 0.0; // 2*sqrt(m1)*(sqrt(m1) - 2*sqrt(m2))
};

// Both derived lower bounds on the minus-sign condition value for a
// dichotomic tripartite measure; lhs >= bound_w and lhs >= bound_www.
inline DichotomicMuBounds dichotomic_mu_bounds(const TripartiteMeasure& mu) {
    if (!mu.is_dichotomic())
        throw std::invalid_argument("dichotomic_mu_bounds: grids must be {-1,+1}");
    DichotomicMuBounds r;
    r.lhs = condition21_value(mu, SignVersion::PerfectCorrelation);
    const double m1 = mu.event_mass([](double l1p, double l2, double) { return l1p * l2 == -1.0; });
    const double m2 = mu.event_mass([](double l1p, double, double l2p) { return l1p * l2p == 1.0; });
    r.bound_w = 2.0 * m1 - 4.0 * m2;
    r.bound_www = 2.0 * std::sqrt(m1) * (std::sqrt(m1) - 2.0 * std::sqrt(m2));
    return r;
}

// ---- seeded generators for the property suites ----

inline CorrelationLhvModel random_correlation_model(Rng& rng, int max_omega = 16) {
    const int n = rng.uniform_int(1, max_omega);
    std::array<std::vector<double>, 2> f1, f2;
    for (int s = 0; s < 2; ++s) {
        f1[s].resize(n);
        f2[s].resize(n);
        for (int w = 0; w < n; ++w) {
            f1[s][w] = rng.uniform(-1.0, 1.0);
            f2[s][w] = rng.uniform(-1.0, 1.0);
        }
    }
    return CorrelationLhvModel(rng.simplex(n), std::move(f1), std::move(f2));
}

inline OutcomeGrid random_grid(Rng& rng, int min_size = 2, int max_size = 4) {
    const int n = rng.uniform_int(min_size, max_size);
    std::vector<double> v;
    while (static_cast<int>(v.size()) < n) {
        const double x = rng.uniform(-1.0, 1.0);
        bool dup = false;
        for (double y : v) dup = dup || (x == y);
        if (!dup) v.push_back(x);
    }
    return OutcomeGrid(std::move(v));
}

// grid closed under negation (so perfect anticorrelation is expressible)
inline OutcomeGrid random_symmetric_grid(Rng& rng, int max_pairs = 2) {
    const int pairs = rng.uniform_int(1, max_pairs);
    std::vector<double> v;
    while (static_cast<int>(v.size()) < 2 * pairs) {
        const double x = rng.uniform(0.05, 1.0);
        bool dup = false;
        for (double y : v) dup = dup || (x == y) || (x == -y);
        if (!dup) {
            v.push_back(x);
            v.push_back(-x);
        }
    }
    return OutcomeGrid(std::move(v));
}

inline ConditionalLhvModel random_conditional_model(Rng& rng, const OutcomeGrid& g1,
                                                    const OutcomeGrid& g2, int max_omega = 16) {
    const int n = rng.uniform_int(1, max_omega);
    std::array<std::vector<std::vector<double>>, 2> p1, p2;
    for (int s = 0; s < 2; ++s) {
        p1[s].resize(n);
        p2[s].resize(n);
        for (int w = 0; w < n; ++w) {
            p1[s][w] = rng.simplex(g1.size());
            p2[s][w] = rng.simplex(g2.size());
        }
    }
    return ConditionalLhvModel(rng.simplex(n), g1, g2, std::move(p1), std::move(p2));
}

// Model whose (a2,b1) joint measurement is perfectly correlated
// (anticorrelated): both conditionals are the same (negated) point mass for
// every hidden value; the remaining settings are arbitrary.
inline ConditionalLhvModel perfectly_correlated_conditional_model(Rng& rng, const OutcomeGrid& grid,
                                                                  bool anticorrelated,
                                                                  int max_omega = 16) {
    const int n = rng.uniform_int(1, max_omega);
    std::array<std::vector<std::vector<double>>, 2> p1, p2;
    for (int s = 0; s < 2; ++s) {
        p1[s].resize(n);
        p2[s].resize(n);
    }
    for (int w = 0; w < n; ++w) {
        p1[0][w] = rng.simplex(grid.size());
        p2[1][w] = rng.simplex(grid.size());
        const int x = rng.uniform_int(0, grid.size() - 1);
        int y = x;
        if (anticorrelated) {
            y = grid.index_of(-grid[x]);
            if (y < 0) throw std::invalid_argument("grid is not symmetric");
        }
        std::vector<double> pa(grid.size(), 0.0), pb(grid.size(), 0.0);
        pa[x] = 1.0;  // Alice's a2 response
        pb[y] = 1.0;  // Bob's b1 response
        p1[1][w] = std::move(pa);
        p2[0][w] = std::move(pb);
    }
    return ConditionalLhvModel(rng.simplex(n), grid, grid, std::move(p1), std::move(p2));
}

inline TripartiteMeasure random_dichotomic_mu(Rng& rng) {
    const auto w = rng.simplex(8);
    std::vector<std::vector<std::vector<double>>> t(
        2, std::vector<std::vector<double>>(2, std::vector<double>(2, 0.0)));
    int n = 0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) t[i][j][k] = w[n++];
    const OutcomeGrid d = OutcomeGrid::dichotomic();
    return TripartiteMeasure(d, d, d, std::move(t));
}

}  // namespace bellgap

#endif
