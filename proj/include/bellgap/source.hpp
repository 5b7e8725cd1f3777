#ifndef BELLGAP_SOURCE_HPP
#define BELLGAP_SOURCE_HPP

// Source operators (triple-tensor dilations of a bipartite state),
// tensor-positivity certification, the quantum form of the general LHV
// condition, and the joint-measure pipeline behind it.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lhv.hpp"
#include "linalg.hpp"
#include "parallel.hpp"
#include "quantum.hpp"
#include "rng.hpp"

namespace bellgap {

enum class ExtensionDirection { Right, Left };

// Self-adjoint unit-trace operator on a triple tensor product, extending a
// bipartite state towards Bob (Right) or Alice (Left). Not necessarily
// positive.
struct SourceOperator {
    ComplexMatrix matrix;
    FactorShape shape;  // (d1,d2,d2) for Right, (d1,d1,d2) for Left
    ExtensionDirection direction;

    SourceOperator(ComplexMatrix m, FactorShape s, ExtensionDirection dir)
        : matrix(std::move(m)), shape(std::move(s)), direction(dir) {
        shape.check_matches(matrix);
        if (shape.factors() != 3)
            throw std::invalid_argument("SourceOperator: shape must have three factors");
        const bool layout_ok = direction == ExtensionDirection::Right
                                   ? shape.dims[1] == shape.dims[2]
                                   : shape.dims[0] == shape.dims[1];
        if (!layout_ok)
            throw std::invalid_argument("SourceOperator: factor dimensions do not match direction");
        matrix = hermitize(matrix, 1e-10);
        if (std::abs(matrix.trace().real() - 1.0) > 1e-10)
            throw std::invalid_argument("SourceOperator: trace != 1");
    }

    bool equal_factors() const { return shape.dims[0] == shape.dims[1] && shape.dims[1] == shape.dims[2]; }
};

// Both designated partial traces reproduce rho: tr2 = tr3 = rho for Right,
// tr1 = tr2 = rho for Left.
inline bool verify_source(const SourceOperator& t, const DensityOperator& rho, double tol = 1e-9) {
    if (rho.shape.factors() != 2) throw std::invalid_argument("verify_source: rho is not bipartite");
    const int d1 = rho.shape.dims[0], d2 = rho.shape.dims[1];
    if (t.direction == ExtensionDirection::Right) {
        if (t.shape.dims[0] != d1 || t.shape.dims[1] != d2 || t.shape.dims[2] != d2)
            throw std::invalid_argument("verify_source: shape mismatch");
        return approx_equal(partial_trace(t.matrix, t.shape, 2), rho.matrix, tol) &&
               approx_equal(partial_trace(t.matrix, t.shape, 3), rho.matrix, tol);
    }
    if (t.shape.dims[0] != d1 || t.shape.dims[1] != d1 || t.shape.dims[2] != d2)
        throw std::invalid_argument("verify_source: shape mismatch");
    return approx_equal(partial_trace(t.matrix, t.shape, 1), rho.matrix, tol) &&
           approx_equal(partial_trace(t.matrix, t.shape, 2), rho.matrix, tol);
}

// Left-direction operators reuse the Right-direction machinery with factors
// reversed; the paired state swaps its sites the same way.
inline SourceOperator mirror_to_right(const SourceOperator& t) {
    if (t.direction == ExtensionDirection::Right) return t;
    const std::vector<int> rev = {2, 1, 0};
    FactorShape s{t.shape.dims[2], t.shape.dims[1], t.shape.dims[0]};
    return SourceOperator(permute_factors(t.matrix, t.shape, rev), std::move(s),
                          ExtensionDirection::Right);
}

inline DensityOperator swap_sites(const DensityOperator& rho) {
    return DensityOperator(permute_factors(rho.matrix, rho.shape, {1, 0}),
                           FactorShape{rho.shape.dims[1], rho.shape.dims[0]});
}

enum class PositivityStatus { WitnessFound, NoViolationFound };

// WitnessFound is definitive (the witness evaluates the product-vector form
// below -1e-10); NoViolationFound is heuristic only.
struct PositivityVerdict {
    PositivityStatus status = PositivityStatus::NoViolationFound;
    double min_value = 0.0;
    std::vector<std::vector<Complex>> witness;  // product vector per factor at the minimum

    bool witness_found() const { return status == PositivityStatus::WitnessFound; }
};

namespace detail {

// effective Hermitian matrix on factor k when all other factors are fixed:
// E(i,j) = sum_{I,J : I_k=i, J_k=j} conj(a_I) Z(I,J) a_J with
// a_I = prod_{m != k} psi_m[I_m]
inline ComplexMatrix effective_factor_matrix(const ComplexMatrix& z, const FactorShape& shape,
                                             const std::vector<std::vector<Complex>>& psi, int k) {
    const int n = shape.factors();
    const int total = shape.total();
    std::vector<int> stride(n, 1);
    for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * shape.dims[i + 1];

    std::vector<Complex> amp(total);
    std::vector<int> sub(total);
    for (int idx = 0; idx < total; ++idx) {
        Complex a = 1.0;
        int tmp = idx;
        for (int m = 0; m < n; ++m) {
            const int im = tmp / stride[m];
            tmp %= stride[m];
            if (m == k)
                sub[idx] = im;
            else
                a *= psi[m][im];
        }
        amp[idx] = a;
    }
    ComplexMatrix e(shape.dims[k]);
    for (int i = 0; i < total; ++i) {
        const Complex ci = std::conj(amp[i]);
        if (ci == Complex(0.0)) continue;
        for (int j = 0; j < total; ++j) {
            const Complex zij = z(i, j);
            if (zij == Complex(0.0)) continue;
            e(sub[i], sub[j]) += ci * zij * amp[j];
        }
    }
    return e;
}

inline double product_expectation(const ComplexMatrix& z, const FactorShape& shape,
                                  const std::vector<std::vector<Complex>>& psi) {
    const int n = shape.factors();
    const int total = shape.total();
    std::vector<int> stride(n, 1);
    for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * shape.dims[i + 1];
    std::vector<Complex> full(total);
    for (int idx = 0; idx < total; ++idx) {
        Complex a = 1.0;
        int tmp = idx;
        for (int m = 0; m < n; ++m) {
            a *= psi[m][tmp / stride[m]];
            tmp %= stride[m];
        }
        full[idx] = a;
    }
    Complex s = 0.0;
    for (int i = 0; i < total; ++i)
        for (int j = 0; j < total; ++j) s += std::conj(full[i]) * z(i, j) * full[j];
    return s.real();
}

}  // namespace detail

// Multi-start alternating minimization of the product-vector expectation
// <psi1 x ... x psiN | Z | psi1 x ... x psiN>: cyclically fix all factors but
// one and replace the free factor by the minimal eigenvector of its
// effective matrix. Restarts carry independent seed substreams and run in
// parallel; the verdict is the minimum value, ties broken by the lowest
// restart index, so the result is deterministic in the seed.
inline PositivityVerdict tensor_positivity(const ComplexMatrix& z, const FactorShape& shape,
                                           int restarts = 64, int iters = 200,
                                           std::uint64_t seed = 0) {
    shape.check_matches(z);
    const ComplexMatrix zh = hermitize(z, 1e-10);
    const int n = shape.factors();

    std::vector<double> values(restarts);
    std::vector<std::vector<std::vector<Complex>>> vectors(restarts);
    parallel_for_index(restarts, [&](int r) {
        Rng rng(Rng::substream_seed(seed, static_cast<std::uint64_t>(r)));
        std::vector<std::vector<Complex>> psi(n);
        for (int m = 0; m < n; ++m) psi[m] = rng.unit_complex_vector(shape.dims[m]);

        double value = detail::product_expectation(zh, shape, psi);
        for (int it = 0; it < iters; ++it) {
            double new_value = value;
            for (int k = 0; k < n; ++k) {
                const ComplexMatrix e = detail::effective_factor_matrix(zh, shape, psi, k);
                const EigenSystem es = hermitian_eig(e);
                const int last = e.dim() - 1;
                std::vector<Complex> v(e.dim());
                for (int row = 0; row < e.dim(); ++row) v[row] = es.eigenvectors(row, last);
                psi[k] = std::move(v);
                new_value = es.eigenvalues[last];
            }
            if (value - new_value < 1e-14) {
                value = new_value;
                break;
            }
            value = new_value;
        }
        values[r] = detail::product_expectation(zh, shape, psi);
        vectors[r] = std::move(psi);
    });

    PositivityVerdict best;
    best.min_value = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r)
        if (values[r] < best.min_value) {
            best.min_value = values[r];
            best.witness = vectors[r];
        }

    best.status = best.min_value < -1e-10 ? PositivityStatus::WitnessFound
                                          : PositivityStatus::NoViolationFound;
    if (!best.witness_found()) best.witness.clear();
    return best;
}

struct SigmaReport {
    ComplexMatrix sigma;  // tr over the first factor of a Right operator
    bool psd = false;     // reported, not assumed
    double min_eigenvalue = 0.0;
};

inline SigmaReport sigma_of(const SourceOperator& r) {
    if (r.direction != ExtensionDirection::Right)
        throw std::invalid_argument("sigma_of: operator must extend to the Right");
    SigmaReport rep;
    rep.sigma = partial_trace(r.matrix, r.shape, 1);
    rep.min_eigenvalue = min_eigenvalue(rep.sigma);
    rep.psd = rep.min_eigenvalue >= -1e-10;
    return rep;
}

// tr[sigma_R (B1 x B2)] -/+ tr[rho (A2 x B2)]; the quantum form of the
// general LHV condition, >= -1e-12 means it holds. With A2 = B1 pass the
// same observable for b1 and a2.
inline double condition32(const SourceOperator& r, const DensityOperator& rho, const ObservableOp& b1,
                          const ObservableOp& a2, const ObservableOp& b2, SignVersion sign) {
    if (r.direction != ExtensionDirection::Right)
        throw std::invalid_argument("condition32: stated for Right operators; mirror first");
    if (!verify_source(r, rho))
        throw std::invalid_argument("condition32: operator is not a source operator for rho");
    const ComplexMatrix sig = partial_trace(r.matrix, r.shape, 1);
    const Complex term1 = trace_product(sig, kron(b1.matrix, b2.matrix));
    const Complex term2 = trace_product(rho.matrix, kron(a2.matrix, b2.matrix));
    if (std::abs(term1.imag()) > 1e-9 || std::abs(term2.imag()) > 1e-9)
        throw std::runtime_error("condition32: imaginary residue beyond tolerance");
    return term1.real() + sign_factor(sign) * term2.real();
}

inline double condition32(const SourceOperator& r, const DensityOperator& rho, const ObservableOp& a2,
                          const ObservableOp& b2, SignVersion sign) {
    return condition32(r, rho, a2, a2, b2, sign);
}

// All three single-factor partial traces equal rho.
inline bool property39_check(const SourceOperator& r, const DensityOperator& rho, double tol = 1e-9) {
    if (!r.equal_factors())
        throw std::invalid_argument("property39_check: factors must have equal dimension");
    if (rho.dim() != r.shape.dims[0] * r.shape.dims[1])
        throw std::invalid_argument("property39_check: rho dimension mismatch");
    for (int k = 1; k <= 3; ++k)
        if (!approx_equal(partial_trace(r.matrix, r.shape, k), rho.matrix, tol)) return false;
    return true;
}

struct ExtensionResult {
    bool found = false;
    std::optional<SourceOperator> r;
    double marginal_residual = 0.0;
    double psd_residual = 0.0;
    int iterations_used = 0;
};

namespace detail {

// lifted marginal corrections, swept until the worst marginal deficit falls
// below tol; drives all three partial traces towards rho (the lift places
// I/d on the corrected factor)
inline ComplexMatrix project_marginals(ComplexMatrix r, const ComplexMatrix& rho, int d,
                                       double tol = 1e-12, int max_passes = 60) {
    const FactorShape shape{d, d, d};
    const int total = d * d * d;
    auto lift = [&](const ComplexMatrix& x, int k) {
        ComplexMatrix out(total);
        for (int i1 = 0; i1 < d; ++i1)
            for (int i2 = 0; i2 < d; ++i2)
                for (int i3 = 0; i3 < d; ++i3)
                    for (int j1 = 0; j1 < d; ++j1)
                        for (int j2 = 0; j2 < d; ++j2)
                            for (int j3 = 0; j3 < d; ++j3) {
                                const int I = (i1 * d + i2) * d + i3;
                                const int J = (j1 * d + j2) * d + j3;
                                Complex val = 0.0;
                                if (k == 1 && i1 == j1) val = x(i2 * d + i3, j2 * d + j3);
                                if (k == 2 && i2 == j2) val = x(i1 * d + i3, j1 * d + j3);
                                if (k == 3 && i3 == j3) val = x(i1 * d + i2, j1 * d + j2);
                                out(I, J) += val / double(d);
                            }
        return out;
    };
    for (int p = 0; p < max_passes; ++p) {
        double deficit = 0.0;
        for (int k = 1; k <= 3; ++k) {
            const ComplexMatrix diff = rho - partial_trace(r, shape, k);
            deficit = std::max(deficit, diff.max_abs());
            r += lift(diff, k);
        }
        if (deficit < tol) break;
    }
    return r;
}

// eigenvalue clipping; optionally renormalize to unit trace
inline ComplexMatrix project_psd_cone(const ComplexMatrix& r, bool renormalize) {
    const EigenSystem es = hermitian_eig(hermitize(r, 1e30));
    const int n = r.dim();
    ComplexMatrix out(n);
    double tr = 0.0;
    for (int c = 0; c < n; ++c) {
        const double lam = std::max(0.0, es.eigenvalues[c]);
        if (lam == 0.0) continue;
        std::vector<Complex> v(n);
        for (int row = 0; row < n; ++row) v[row] = es.eigenvectors(row, c);
        out += projector(v) * lam;
        tr += lam;
    }
    if (renormalize) {
        if (tr <= 0.0) return ComplexMatrix::identity(n) * (1.0 / n);
        out *= Complex(1.0 / tr, 0.0);
    }
    return out;
}

}  // namespace detail

// Best-effort search for a positive (hence tensor-positive) extension with
// all three partial traces equal to rho. Douglas-Rachford splitting between
// the PSD cone (eigenvalue clipping) and the affine marginal constraints
// (lifted corrections); plain alternation of the same projections stalls
// sublinearly at rank-deficient solutions. found=false is not a proof of
// nonexistence.
inline ExtensionResult find_positive_extension(const DensityOperator& rho, int iters = 2000) {
    if (rho.shape.factors() != 2 || !rho.equal_factors())
        throw std::invalid_argument("find_positive_extension: rho must live on H x H");
    const int d = rho.shape.dims[0];
    if (d > 4) throw std::invalid_argument("find_positive_extension: d must be <= 4");
    const FactorShape shape{d, d, d};

    ComplexMatrix x = kron(rho.matrix, ComplexMatrix::identity(d) * (1.0 / d));
    ExtensionResult result;

    auto evaluate = [&](int used) {
        // candidate: PSD-projected, trace-renormalized affine shadow of x
        ComplexMatrix shadow =
            detail::project_psd_cone(detail::project_marginals(x, rho.matrix, d), true);
        double marg = 0.0;
        for (int k = 1; k <= 3; ++k) {
            const ComplexMatrix diff = partial_trace(shadow, shape, k) - rho.matrix;
            marg = std::max(marg, diff.max_abs());
        }
        result.marginal_residual = marg;
        result.psd_residual = std::max(0.0, -min_eigenvalue(shadow));
        result.iterations_used = used;
        if (marg < 1e-7 && result.psd_residual < 1e-7) {
            result.found = true;
            result.r = SourceOperator(hermitize(shadow, 1e-6), shape, ExtensionDirection::Right);
        }
    };

    for (int it = 0; it < iters; ++it) {
        const ComplexMatrix pa = detail::project_marginals(x, rho.matrix, d);
        const ComplexMatrix pb = detail::project_psd_cone(pa * 2.0 - x, false);
        x += pb - pa;
        if ((it + 1) % 10 == 0 || it + 1 == iters) {
            evaluate(it + 1);
            if (result.found) return result;
        }
    }
    if (result.iterations_used == 0) evaluate(iters);
    return result;
}

struct TauPipelineReport {
    TripartiteMeasure tau1, tau2;
    bool marginals_ok = false;
    bool compatible = false;
    double a5_residual = 0.0;
};

namespace detail {
inline double table_max_diff(const JointDistribution& a, const JointDistribution& b) {
    if (!(a.grid1() == b.grid1()) || !(a.grid2() == b.grid2()))
        return std::numeric_limits<double>::infinity();
    double m = 0.0;
    for (int i = 0; i < a.grid1().size(); ++i)
        for (int j = 0; j < a.grid2().size(); ++j)
            m = std::max(m, std::abs(a.prob(i, j) - b.prob(i, j)));
    return m;
}
}  // namespace detail

// tau^(i)(l1,l2,l2') = tr[R (M1^{a_i}(l1) x M2^{b1}(l2) x M2^{b2}(l2'))].
// Checks that both tau marginals reproduce the observed joint distributions,
// that tau^(1) and tau^(2) are compatible, and that the condition-21 value
// of tau^(2) coincides with the quantum-condition value.
inline TauPipelineReport tau_pipeline(const SourceOperator& r, const DensityOperator& rho,
                                      const Povm& mA1, const Povm& mA2, const Povm& mB1,
                                      const Povm& mB2, SignVersion sign = SignVersion::PerfectCorrelation) {
    if (r.direction != ExtensionDirection::Right)
        throw std::invalid_argument("tau_pipeline: stated for Right operators; mirror first");
    if (!verify_source(r, rho))
        throw std::invalid_argument("tau_pipeline: operator is not a source operator for rho");

    auto build_tau = [&](const Povm& mA) {
        std::vector<std::vector<std::vector<double>>> t(
            mA.grid.size(), std::vector<std::vector<double>>(
                                mB1.grid.size(), std::vector<double>(mB2.grid.size(), 0.0)));
        for (int i = 0; i < mA.grid.size(); ++i)
            for (int j = 0; j < mB1.grid.size(); ++j)
                for (int k = 0; k < mB2.grid.size(); ++k) {
                    const Complex p = trace_product(
                        r.matrix, kron(mA.effects[i], mB1.effects[j], mB2.effects[k]));
                    if (std::abs(p.imag()) > 1e-9)
                        throw std::runtime_error("tau_pipeline: imaginary residue");
                    if (p.real() < -1e-9)
                        throw std::runtime_error(
                            "tau_pipeline: negative tau entry; source operator is not tensor-positive");
                    t[i][j][k] = std::max(0.0, p.real());
                }
        return TripartiteMeasure(mA.grid, mB1.grid, mB2.grid, std::move(t));
    };

    TauPipelineReport rep{build_tau(mA1), build_tau(mA2), false, false, 0.0};

    const double m11 = detail::table_max_diff(rep.tau1.marginal_12(), quantum_joint(rho, mA1, mB1));
    const double m12 = detail::table_max_diff(rep.tau1.marginal_13(), quantum_joint(rho, mA1, mB2));
    const double m21 = detail::table_max_diff(rep.tau2.marginal_12(), quantum_joint(rho, mA2, mB1));
    const double m22 = detail::table_max_diff(rep.tau2.marginal_13(), quantum_joint(rho, mA2, mB2));
    rep.marginals_ok = std::max(std::max(m11, m12), std::max(m21, m22)) < 1e-10;

    rep.compatible =
        detail::table_max_diff(rep.tau1.marginal_23(), rep.tau2.marginal_23()) < 1e-10;

    const ObservableOp b1 = observable_from_povm(mB1);
    const ObservableOp b2 = observable_from_povm(mB2);
    const ObservableOp a2 = observable_from_povm(mA2);
    rep.a5_residual =
        std::abs(condition21_value(rep.tau2, sign) - condition32(r, rho, b1, a2, b2, sign));
    return rep;
}

// ---- constructions used across tests and the CLI ----

// average over all six factor permutations; PSD in, PSD out
inline ComplexMatrix symmetrize_triple(const ComplexMatrix& x, int d) {
    const FactorShape shape{d, d, d};
    static const std::vector<std::vector<int>> perms = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                                        {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    ComplexMatrix acc(d * d * d);
    for (const auto& p : perms) acc += permute_factors(x, shape, p);
    return acc * (1.0 / 6.0);
}

// random permutation-symmetric density operator on (C^d)^{x3}
inline SourceOperator random_symmetric_source(Rng& rng, int d) {
    const ComplexMatrix sym = symmetrize_triple(rng.density(d * d * d), d);
    return SourceOperator(sym, FactorShape{d, d, d}, ExtensionDirection::Right);
}

inline DensityOperator reduced_state_of(const SourceOperator& r) {
    return DensityOperator(partial_trace(r.matrix, r.shape, 3),
                           FactorShape{r.shape.dims[0], r.shape.dims[1]});
}

}  // namespace bellgap

#endif
