#ifndef BELLGAP_QUANTUM_HPP
#define BELLGAP_QUANTUM_HPP

// Quantum states, POVMs, correlation functions, Bell functionals on states,
// and the Werner / noisy state families.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "linalg.hpp"
#include "rng.hpp"
#include "scenario.hpp"

namespace bellgap {

inline ComplexMatrix pauli_x() {
    ComplexMatrix m(2);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    return m;
}
inline ComplexMatrix pauli_y() {
    ComplexMatrix m(2);
    m(0, 1) = Complex(0.0, -1.0);
    m(1, 0) = Complex(0.0, 1.0);
    return m;
}
inline ComplexMatrix pauli_z() {
    ComplexMatrix m(2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}

// |psi_S> = (|01> - |10>)/sqrt(2)
inline std::vector<Complex> singlet_vector() {
    const double r = 1.0 / std::sqrt(2.0);
    return {0.0, r, -r, 0.0};
}

inline std::vector<Complex> kron_vec(const std::vector<Complex>& u, const std::vector<Complex>& v) {
    std::vector<Complex> w(u.size() * v.size());
    for (size_t i = 0; i < u.size(); ++i)
        for (size_t j = 0; j < v.size(); ++j) w[i * v.size() + j] = u[i] * v[j];
    return w;
}

// qubit state with the given Bloch vector (unit length -> pure)
inline std::vector<Complex> bloch_vector_state(double nx, double ny, double nz) {
    // eigenvector of n.sigma with eigenvalue +1
    const double theta = std::acos(std::clamp(nz, -1.0, 1.0));
    const double phi = std::atan2(ny, nx);
    return {Complex(std::cos(theta / 2.0), 0.0),
            std::sin(theta / 2.0) * Complex(std::cos(phi), std::sin(phi))};
}

// Density operator on a bipartite (or general multi-factor) space.
struct DensityOperator {
    ComplexMatrix matrix;
    FactorShape shape;

    DensityOperator(ComplexMatrix m, FactorShape s) : matrix(std::move(m)), shape(std::move(s)) {
        shape.check_matches(matrix);
        matrix = hermitize(matrix, 1e-10);
        if (std::abs(matrix.trace().real() - 1.0) > 1e-10 || std::abs(matrix.trace().imag()) > 1e-10)
            throw std::invalid_argument("DensityOperator: trace != 1");
        if (min_eigenvalue(matrix) < -1e-10)
            throw std::invalid_argument("DensityOperator: not positive semidefinite");
    }

    int dim() const { return matrix.dim(); }
    bool equal_factors() const {
        for (int d : shape.dims)
            if (d != shape.dims[0]) return false;
        return true;
    }
};

inline DensityOperator pure_state(const std::vector<Complex>& psi, FactorShape shape) {
    double n2 = 0.0;
    for (const auto& z : psi) n2 += std::norm(z);
    if (std::abs(n2 - 1.0) > 1e-9) throw std::invalid_argument("pure_state: vector is not normalized");
    return DensityOperator(projector(psi), std::move(shape));
}

inline DensityOperator singlet_state() { return pure_state(singlet_vector(), FactorShape{2, 2}); }

// Positive operator-valued measure with outcomes on a grid in [-1,1].
struct Povm {
    OutcomeGrid grid;
    std::vector<ComplexMatrix> effects;  // one per grid value, ascending grid order

    Povm(OutcomeGrid g, std::vector<ComplexMatrix> e) : grid(std::move(g)), effects(std::move(e)) {
        if (static_cast<int>(effects.size()) != grid.size())
            throw std::invalid_argument("Povm: effect count != grid size");
        ComplexMatrix sum(effects[0].dim());
        for (auto& eff : effects) {
            eff = hermitize(eff, 1e-10);
            if (min_eigenvalue(eff) < -1e-10) throw std::invalid_argument("Povm: effect not PSD");
            sum += eff;
        }
        if (!approx_equal(sum, ComplexMatrix::identity(sum.dim()), 1e-9))
            throw std::invalid_argument("Povm: effects do not sum to identity");
    }

    int dim() const { return effects[0].dim(); }
};

// Bounded observable with spectrum in [-1,1].
struct ObservableOp {
    ComplexMatrix matrix;

    explicit ObservableOp(ComplexMatrix m) : matrix(std::move(m)) {
        matrix = hermitize(matrix, 1e-10);
        const EigenSystem es = hermitian_eig(matrix);
        if (es.eigenvalues.front() > 1.0 + 1e-9 || es.eigenvalues.back() < -1.0 - 1e-9)
            throw std::invalid_argument("ObservableOp: spectrum outside [-1,1]");
    }

    int dim() const { return matrix.dim(); }
};

// A = sum_l l * M(l)
inline ObservableOp observable_from_povm(const Povm& m) {
    ComplexMatrix a(m.dim());
    for (int i = 0; i < m.grid.size(); ++i) a += m.grid[i] * m.effects[i];
    return ObservableOp(std::move(a));
}

// Spectral measure of an observable: eigenvalues merged into clusters at
// tol 1e-9, one projector effect per cluster.
inline Povm projective_povm(const ObservableOp& obs) {
    const EigenSystem es = hermitian_eig(obs.matrix);
    const int n = obs.dim();
    std::vector<double> outcomes;
    std::vector<ComplexMatrix> effects;
    int start = 0;
    while (start < n) {
        int stop = start + 1;
        while (stop < n && es.eigenvalues[stop - 1] - es.eigenvalues[stop] <= 1e-9) ++stop;
        double mean = 0.0;
        ComplexMatrix proj(n);
        for (int c = start; c < stop; ++c) {
            mean += es.eigenvalues[c];
            std::vector<Complex> v(n);
            for (int r = 0; r < n; ++r) v[r] = es.eigenvectors(r, c);
            proj += projector(v);
        }
        mean /= (stop - start);
        outcomes.push_back(std::clamp(mean, -1.0, 1.0));
        effects.push_back(std::move(proj));
        start = stop;
    }
    // OutcomeGrid sorts ascending; effects were collected descending
    std::reverse(outcomes.begin(), outcomes.end());
    std::reverse(effects.begin(), effects.end());
    return Povm(OutcomeGrid(outcomes), std::move(effects));
}

// P(l1,l2) = tr[rho (M_A(l1) x M_B(l2))]
inline JointDistribution quantum_joint(const DensityOperator& rho, const Povm& mA, const Povm& mB) {
    if (rho.shape.factors() != 2) throw std::invalid_argument("quantum_joint: state is not bipartite");
    if (mA.dim() != rho.shape.dims[0] || mB.dim() != rho.shape.dims[1])
        throw std::invalid_argument("quantum_joint: POVM dimensions do not match state factors");
    std::vector<std::vector<double>> t(mA.grid.size(), std::vector<double>(mB.grid.size(), 0.0));
    for (int i = 0; i < mA.grid.size(); ++i)
        for (int j = 0; j < mB.grid.size(); ++j) {
            const Complex p = trace_product(rho.matrix, kron(mA.effects[i], mB.effects[j]));
            if (std::abs(p.imag()) > 1e-9)
                throw std::runtime_error("quantum_joint: probability has imaginary residue");
            double x = p.real();
            if (x < 0.0 && x >= -1e-12) x = 0.0;
            if (x > 1.0 && x <= 1.0 + 1e-12) x = 1.0;
            t[i][j] = x;
        }
    return JointDistribution(mA.grid, mB.grid, std::move(t));
}

// tr[rho (A x B)]
inline double correlation(const DensityOperator& rho, const ObservableOp& a, const ObservableOp& b) {
    if (rho.shape.factors() != 2) throw std::invalid_argument("correlation: state is not bipartite");
    if (a.dim() != rho.shape.dims[0] || b.dim() != rho.shape.dims[1])
        throw std::invalid_argument("correlation: observable dimensions do not match state factors");
    const Complex c = trace_product(rho.matrix, kron(a.matrix, b.matrix));
    if (std::abs(c.imag()) > 1e-9)
        throw std::runtime_error("correlation: imaginary residue beyond tolerance");
    return std::clamp(c.real(), -1.0, 1.0);
}

// swap V(e_i x e_j) = e_j x e_i on C^d x C^d
inline ComplexMatrix swap_operator(int d) {
    ComplexMatrix v(d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) v(i * d + j, j * d + i) = 1.0;
    return v;
}

// W_d(Phi) = (1+Phi)/2 * P+/r+ + (1-Phi)/2 * P-/r- with P+- = (I +- V)/2
inline DensityOperator werner_state(int d, double phi) {
    if (d < 2) throw std::invalid_argument("werner_state: d must be >= 2");
    if (phi < -1.0 || phi > 1.0) throw std::invalid_argument("werner_state: Phi outside [-1,1]");
    const ComplexMatrix v = swap_operator(d);
    const ComplexMatrix id = ComplexMatrix::identity(d * d);
    const ComplexMatrix pplus = (id + v) * 0.5;
    const ComplexMatrix pminus = (id - v) * 0.5;
    const double rplus = d * (d + 1) / 2.0;
    const double rminus = d * (d - 1) / 2.0;
    const ComplexMatrix w = pplus * ((1.0 + phi) / (2.0 * rplus)) + pminus * ((1.0 - phi) / (2.0 * rminus));
    return DensityOperator(w, FactorShape{d, d});
}

struct NoisyState {
    DensityOperator state;
    double gamma = 0.0;     // d * operator norm of the reduced pure state
    double beta_max = 0.0;  // 1 / (2 gamma^3 + 1)
};

// beta-mixture of a pure state with maximal noise I/d^2. The admissible
// range beta <= 1/(2 gamma^3 + 1) carries the LHV guarantee; `force` builds
// the state outside it anyway.
inline NoisyState noisy_state(const std::vector<Complex>& psi, double beta, bool force = false) {
    const int d2 = static_cast<int>(psi.size());
    const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(d2))));
    if (d * d != d2) throw std::invalid_argument("noisy_state: psi is not on C^d x C^d");
    double n2 = 0.0;
    for (const auto& z : psi) n2 += std::norm(z);
    if (std::abs(n2 - 1.0) > 1e-9) throw std::invalid_argument("noisy_state: psi is not normalized");

    const ComplexMatrix proj = projector(psi);
    const ComplexMatrix reduced = partial_trace(proj, FactorShape{d, d}, 1);
    const double gamma = d * operator_norm(reduced);
    const double beta_max = 1.0 / (2.0 * gamma * gamma * gamma + 1.0);
    if (!force && (beta < 0.0 || beta > beta_max + 1e-12))
        throw std::invalid_argument("noisy_state: beta outside [0, 1/(2 gamma^3 + 1)]");

    const ComplexMatrix eta = proj * beta + ComplexMatrix::identity(d2) * ((1.0 - beta) / d2);
    return NoisyState{DensityOperator(eta, FactorShape{d, d}), gamma, beta_max};
}

// n.sigma for a unit direction n
inline ObservableOp spin_observable(const std::vector<double>& n) {
    if (n.size() != 3) throw std::invalid_argument("spin_observable: direction must have 3 components");
    const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    if (std::abs(len - 1.0) > 1e-9) throw std::invalid_argument("spin_observable: direction not unit");
    ComplexMatrix m(2);
    m(0, 0) = n[2];
    m(1, 1) = -n[2];
    m(0, 1) = Complex(n[0], -n[1]);
    m(1, 0) = Complex(n[0], n[1]);
    return ObservableOp(std::move(m));
}

struct ConditionalOutcomeProbs {
    double same = 0.0;       // (1-beta)/2 for the noisy singlet
    double different = 0.0;  // (1+beta)/2
};

// Projective sigma_n measurements at both sites of the noisy singlet;
// conditional outcome probabilities given Alice's outcome.
inline ConditionalOutcomeProbs conditional_outcome_probs(double beta, const std::vector<double>& n) {
    const DensityOperator eta = noisy_state(singlet_vector(), beta).state;
    const Povm povm = projective_povm(spin_observable(n));
    if (povm.grid.size() != 2) throw std::runtime_error("conditional_outcome_probs: non-dichotomic POVM");
    const JointDistribution p = quantum_joint(eta, povm, povm);
    const int minus = 0, plus = 1;  // grid is ascending {~-1, ~+1}
    const double alice_plus = p.prob(plus, plus) + p.prob(plus, minus);
    if (alice_plus <= 0.0) throw std::runtime_error("conditional_outcome_probs: conditioning event has zero mass");
    return ConditionalOutcomeProbs{p.prob(plus, plus) / alice_plus, p.prob(plus, minus) / alice_plus};
}

// U diag(u_i) U^dag with u_i in [-1,1]
inline ObservableOp random_observable(Rng& rng, int d) {
    const ComplexMatrix u = rng.unitary(d);
    ComplexMatrix diag(d);
    for (int i = 0; i < d; ++i) diag(i, i) = rng.uniform(-1.0, 1.0);
    return ObservableOp(u * diag * u.adjoint());
}

// effects {E, I-E} with E = U diag(u_i) U^dag, u_i in [0,1]; outcomes -/+1
inline Povm random_dichotomic_povm(Rng& rng, int d) {
    const ComplexMatrix u = rng.unitary(d);
    ComplexMatrix diag(d);
    for (int i = 0; i < d; ++i) diag(i, i) = rng.uniform();
    const ComplexMatrix e = u * diag * u.adjoint();
    return Povm(OutcomeGrid::dichotomic(), {ComplexMatrix::identity(d) - e, e});
}

// (1 -/+ tr[rho(B1 x B2)]) - |tr[rho(A1 x B1)] - tr[rho(A1 x B2)]| with
// A2 = B1 measured on Alice's side in the third correlation.
inline double quantum_bell_slack(const DensityOperator& rho, const ObservableOp& a1,
                                 const ObservableOp& b1, const ObservableOp& b2, SignVersion sign) {
    if (!rho.equal_factors())
        throw std::invalid_argument("quantum_bell_slack: state factors must have equal dimension");
    const double c11 = correlation(rho, a1, b1);
    const double c12 = correlation(rho, a1, b2);
    const double c22 = correlation(rho, b1, b2);
    return (1.0 + sign_factor(sign) * c22) - std::abs(c11 - c12);
}

}  // namespace bellgap

#endif
