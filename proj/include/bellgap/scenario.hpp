#ifndef BELLGAP_SCENARIO_HPP
#define BELLGAP_SCENARIO_HPP

// Finite joint outcome distributions over grids in [-1,1], and the Bell /
// CHSH functionals evaluated on measured correlations.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bellgap {

// Minus sign selects the "perfect correlation" version of the inequality,
// plus sign the "perfect anticorrelation" version.
enum class SignVersion { PerfectCorrelation, PerfectAnticorrelation };

inline double sign_factor(SignVersion s) {
    return s == SignVersion::PerfectCorrelation ? -1.0 : +1.0;
}

inline const char* to_string(SignVersion s) {
    return s == SignVersion::PerfectCorrelation ? "minus" : "plus";
}

// Finite sorted set of outcome values in [-1,1].
class OutcomeGrid {
public:
    OutcomeGrid() = default;
    explicit OutcomeGrid(std::vector<double> values) : v_(std::move(values)) {
        std::sort(v_.begin(), v_.end());
        for (size_t i = 0; i < v_.size(); ++i) {
            if (v_[i] < -1.0 || v_[i] > 1.0)
                throw std::invalid_argument("OutcomeGrid: value outside [-1,1]");
            if (i > 0 && v_[i] == v_[i - 1])
                throw std::invalid_argument("OutcomeGrid: duplicate value");
        }
        if (v_.empty()) throw std::invalid_argument("OutcomeGrid: empty");
    }

    static OutcomeGrid dichotomic() { return OutcomeGrid({-1.0, 1.0}); }

    int size() const { return static_cast<int>(v_.size()); }
    double operator[](int i) const { return v_[i]; }
    const std::vector<double>& values() const { return v_; }

    bool is_dichotomic() const { return v_.size() == 2 && v_[0] == -1.0 && v_[1] == 1.0; }

    // grids are constructed, not measured: matching is exact
    int index_of(double value) const {
        auto it = std::lower_bound(v_.begin(), v_.end(), value);
        if (it == v_.end() || *it != value) return -1;
        return static_cast<int>(it - v_.begin());
    }

    bool operator==(const OutcomeGrid& o) const { return v_ == o.v_; }

private:
    std::vector<double> v_;
};

// union of two grids (used when measurements on one site carry different grids)
inline OutcomeGrid merge_grids(const OutcomeGrid& a, const OutcomeGrid& b) {
    std::vector<double> v = a.values();
    for (double x : b.values())
        if (a.index_of(x) < 0) v.push_back(x);
    return OutcomeGrid(std::move(v));
}

// Probability table over grid1 x grid2. Ingest renormalizes a total mass
// within 1e-9 of one and rejects anything further off.
class JointDistribution {
public:
    JointDistribution(OutcomeGrid grid1, OutcomeGrid grid2, std::vector<std::vector<double>> probs)
        : g1_(std::move(grid1)), g2_(std::move(grid2)), p_(std::move(probs)) {
        if (static_cast<int>(p_.size()) != g1_.size())
            throw std::invalid_argument("JointDistribution: row count != grid1 size");
        double mass = 0.0;
        for (auto& row : p_) {
            if (static_cast<int>(row.size()) != g2_.size())
                throw std::invalid_argument("JointDistribution: column count != grid2 size");
            for (double& x : row) {
                if (x < 0.0) {
                    if (x < -1e-12) throw std::invalid_argument("JointDistribution: negative probability");
                    x = 0.0;
                }
                mass += x;
            }
        }
        if (std::abs(mass - 1.0) > 1e-9)
            throw std::invalid_argument("JointDistribution: total mass " + std::to_string(mass) +
                                        " deviates from 1 by more than 1e-9");
        if (mass != 1.0)
            for (auto& row : p_)
                for (double& x : row) x /= mass;
    }

    const OutcomeGrid& grid1() const { return g1_; }
    const OutcomeGrid& grid2() const { return g2_; }
    double prob(int i, int j) const { return p_[i][j]; }
    const std::vector<std::vector<double>>& probs() const { return p_; }

    bool is_dichotomic() const { return g1_.is_dichotomic() && g2_.is_dichotomic(); }

private:
    OutcomeGrid g1_, g2_;
    std::vector<std::vector<double>> p_;
};

// <lambda1^m lambda2^n>
inline double moment(const JointDistribution& p, int m, int n) {
    if (m < 0 || n < 0) throw std::invalid_argument("moment: negative power");
    double s = 0.0;
    for (int i = 0; i < p.grid1().size(); ++i) {
        const double l1m = std::pow(p.grid1()[i], m);
        for (int j = 0; j < p.grid2().size(); ++j)
            s += l1m * std::pow(p.grid2()[j], n) * p.prob(i, j);
    }
    return s;
}

enum class OutcomeEvent { Equal, Opposite, ProductOne, ProductMinusOne };

// mass of the exact-equality event on the grid
inline double event_prob(const JointDistribution& p, OutcomeEvent event) {
    double s = 0.0;
    for (int i = 0; i < p.grid1().size(); ++i)
        for (int j = 0; j < p.grid2().size(); ++j) {
            const double l1 = p.grid1()[i], l2 = p.grid2()[j];
            bool in = false;
            switch (event) {
                case OutcomeEvent::Equal: in = (l1 == l2); break;
                case OutcomeEvent::Opposite: in = (l1 == -l2); break;
                case OutcomeEvent::ProductOne: in = (l1 * l2 == 1.0); break;
                case OutcomeEvent::ProductMinusOne: in = (l1 * l2 == -1.0); break;
            }
            if (in) s += p.prob(i, j);
        }
    return s;
}

// Correlations <lambda1 lambda2> for the four setting pairs; c21 is optional
// because the original Bell inequality never uses it.
struct CorrelationQuad {
    double c11 = 0.0, c12 = 0.0, c22 = 0.0;
    std::optional<double> c21;

    CorrelationQuad() = default;
    CorrelationQuad(double c11_, double c12_, double c22_) : c11(c11_), c12(c12_), c22(c22_) {
        validate();
    }
    CorrelationQuad(double c11_, double c12_, double c21_, double c22_)
        : c11(c11_), c12(c12_), c22(c22_), c21(c21_) {
        validate();
    }

    void validate() const {
        auto chk = [](double c) {
            if (c < -1.0 - 1e-12 || c > 1.0 + 1e-12)
                throw std::invalid_argument("CorrelationQuad: correlation outside [-1,1]");
        };
        chk(c11);
        chk(c12);
        chk(c22);
        if (c21) chk(*c21);
    }
};

// Slack of the original Bell inequality: (1 -/+ c22) - |c11 - c12|.
// Nonnegative iff the chosen sign version holds.
inline double bell_slack(const CorrelationQuad& c, SignVersion sign) {
    return (1.0 + sign_factor(sign) * c.c22) - std::abs(c.c11 - c.c12);
}

// |c11 + c12 + c21 - c22|; LHV bound is 2.
inline double chsh_value(const CorrelationQuad& c) {
    if (!c.c21) throw std::invalid_argument("chsh_value: c21 missing");
    return std::abs(c.c11 + c.c12 + *c.c21 - c.c22);
}

enum class DichotomicBranch { None, SumBound, CertainProduct };

struct DichotomicConditionResult {
    bool holds = false;
    DichotomicBranch which = DichotomicBranch::None;
};

// Experimentally testable conditions on the (a2,b1) and (a2,b2) joint
// probabilities, each sufficient for the matching sign version of the
// original Bell inequality. Minus sign works with the event {l1*l2 = 1},
// plus sign with {l1*l2 = -1}.
inline DichotomicConditionResult dichotomic_conditions(const JointDistribution& p21,
                                                       const JointDistribution& p22,
                                                       SignVersion sign) {
    if (!p21.is_dichotomic() || !p22.is_dichotomic())
        throw std::invalid_argument("dichotomic_conditions: grids must be {-1,+1}");
    const OutcomeEvent ev = sign == SignVersion::PerfectCorrelation ? OutcomeEvent::ProductOne
                                                                    : OutcomeEvent::ProductMinusOne;
    const double q21 = event_prob(p21, ev);
    const double q22 = event_prob(p22, ev);
    DichotomicConditionResult r;
    if (q21 >= 1.0 - 1e-12) {
        r.holds = true;
        r.which = DichotomicBranch::CertainProduct;
    } else if (q21 + 2.0 * q22 <= 1.0 + 1e-12) {
        r.holds = true;
        r.which = DichotomicBranch::SumBound;
    }
    return r;
}

}  // namespace bellgap

#endif
