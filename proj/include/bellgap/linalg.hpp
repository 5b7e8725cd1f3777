#ifndef BELLGAP_LINALG_HPP
#define BELLGAP_LINALG_HPP

// Dense complex linear algebra kernel: Kronecker products, partial traces,
// Hermitian eigendecomposition (cyclic complex Jacobi), norms.
// Everything here is pure and value-semantic; matrices are small (dim <= ~100).

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace bellgap {

using Complex = std::complex<double>;

class ComplexMatrix {
public:
    ComplexMatrix() : dim_(0) {}
    explicit ComplexMatrix(int dim) : dim_(dim), a_(static_cast<size_t>(dim) * dim) {
        if (dim <= 0) throw std::invalid_argument("ComplexMatrix: dimension must be positive");
    }
    ComplexMatrix(int dim, std::vector<Complex> entries) : dim_(dim), a_(std::move(entries)) {
        if (dim <= 0) throw std::invalid_argument("ComplexMatrix: dimension must be positive");
        if (a_.size() != static_cast<size_t>(dim) * dim)
            throw std::invalid_argument("ComplexMatrix: entry count does not match dimension");
    }

    static ComplexMatrix identity(int dim) {
        ComplexMatrix m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    int dim() const { return dim_; }

    Complex& operator()(int i, int j) { return a_[static_cast<size_t>(i) * dim_ + j]; }
    const Complex& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * dim_ + j]; }

    const std::vector<Complex>& entries() const { return a_; }

    ComplexMatrix adjoint() const {
        ComplexMatrix r(dim_);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) r(j, i) = std::conj((*this)(i, j));
        return r;
    }

    Complex trace() const {
        Complex t = 0.0;
        for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
        return t;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& z : a_) s += std::norm(z);
        return std::sqrt(s);
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& z : a_) m = std::max(m, std::abs(z));
        return m;
    }

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        check_same_dim(o);
        for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        check_same_dim(o);
        for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    ComplexMatrix& operator*=(Complex c) {
        for (auto& z : a_) z *= c;
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, Complex c) { return a *= c; }
    friend ComplexMatrix operator*(Complex c, ComplexMatrix a) { return a *= c; }
    friend ComplexMatrix operator*(ComplexMatrix a, double c) { return a *= Complex(c, 0.0); }
    friend ComplexMatrix operator*(double c, ComplexMatrix a) { return a *= Complex(c, 0.0); }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        a.check_same_dim(b);
        const int n = a.dim_;
        ComplexMatrix r(n);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                const Complex aik = a(i, k);
                if (aik == Complex(0.0)) continue;
                for (int j = 0; j < n; ++j) r(i, j) += aik * b(k, j);
            }
        return r;
    }

private:
    void check_same_dim(const ComplexMatrix& o) const {
        if (dim_ != o.dim_) throw std::invalid_argument("ComplexMatrix: dimension mismatch");
    }

    int dim_;
    std::vector<Complex> a_;
};

inline bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
    if (a.dim() != b.dim()) return false;
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j)
            if (std::abs(a(i, j) - b(i, j)) > tol) return false;
    return true;
}

inline double hermitian_asymmetry(const ComplexMatrix& a) {
    double m = 0.0;
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) m = std::max(m, std::abs(a(i, j) - std::conj(a(j, i))));
    return m;
}

inline bool is_hermitian(const ComplexMatrix& a, double tol = 1e-10) {
    return hermitian_asymmetry(a) <= tol;
}

// Symmetrize (A + A^dag)/2 if the asymmetry is below tol, otherwise reject.
inline ComplexMatrix hermitize(const ComplexMatrix& a, double tol = 1e-10) {
    if (hermitian_asymmetry(a) > tol)
        throw std::invalid_argument("hermitize: matrix is not Hermitian within tolerance");
    ComplexMatrix r(a.dim());
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) r(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
    return r;
}

// Factor dimensions of a tensor-product space; bookkeeping behind every
// partial trace in the library.
struct FactorShape {
    std::vector<int> dims;

    FactorShape() = default;
    FactorShape(std::initializer_list<int> d) : dims(d) { validate(); }
    explicit FactorShape(std::vector<int> d) : dims(std::move(d)) { validate(); }

    int total() const {
        int t = 1;
        for (int d : dims) t *= d;
        return t;
    }
    int factors() const { return static_cast<int>(dims.size()); }

    void validate() const {
        if (dims.empty()) throw std::invalid_argument("FactorShape: no factors");
        for (int d : dims)
            if (d <= 0) throw std::invalid_argument("FactorShape: factor dimensions must be positive");
    }
    void check_matches(const ComplexMatrix& m) const {
        if (total() != m.dim())
            throw std::invalid_argument("FactorShape: product of factor dims (" +
                                        std::to_string(total()) + ") != matrix dim (" +
                                        std::to_string(m.dim()) + ")");
    }

    bool operator==(const FactorShape& o) const { return dims == o.dims; }
};

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    const int da = a.dim(), db = b.dim();
    ComplexMatrix r(da * db);
    for (int i1 = 0; i1 < da; ++i1)
        for (int j1 = 0; j1 < da; ++j1) {
            const Complex aij = a(i1, j1);
            if (aij == Complex(0.0)) continue;
            for (int i2 = 0; i2 < db; ++i2)
                for (int j2 = 0; j2 < db; ++j2)
                    r(i1 * db + i2, j1 * db + j2) = aij * b(i2, j2);
        }
    return r;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b, const ComplexMatrix& c) {
    return kron(kron(a, b), c);
}

// Partial trace over the factor standing in the k-th place (1-based) of the
// tensor product described by shape; returns an operator on the remaining
// factors in their original order.
inline ComplexMatrix partial_trace(const ComplexMatrix& t, const FactorShape& shape, int k) {
    shape.check_matches(t);
    const int n = shape.factors();
    if (k < 1 || k > n) throw std::invalid_argument("partial_trace: factor index out of range");
    const int kk = k - 1;
    const int dk = shape.dims[kk];

    std::vector<int> rest;
    for (int i = 0; i < n; ++i)
        if (i != kk) rest.push_back(shape.dims[i]);
    int rdim = 1;
    for (int d : rest) rdim *= d;
    if (rest.empty()) {  // tracing the only factor leaves a 1x1 scalar
        ComplexMatrix r(1);
        r(0, 0) = t.trace();
        return r;
    }

    // strides in the full space
    std::vector<int> stride(n, 1);
    for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * shape.dims[i + 1];

    ComplexMatrix r(rdim);
    std::vector<int> idx(rest.size(), 0);
    for (int p = 0; p < rdim; ++p) {
        // decode p -> multi-index over remaining factors
        int tmp = p;
        for (int i = static_cast<int>(rest.size()) - 1; i >= 0; --i) {
            idx[i] = tmp % rest[i];
            tmp /= rest[i];
        }
        int base_i = 0, pos = 0;
        std::vector<int> full_i(n, 0);
        for (int i = 0; i < n; ++i)
            if (i != kk) full_i[i] = idx[pos++];
        for (int i = 0; i < n; ++i) base_i += full_i[i] * stride[i];

        std::vector<int> jdx(rest.size(), 0);
        for (int q = 0; q < rdim; ++q) {
            int tq = q;
            for (int i = static_cast<int>(rest.size()) - 1; i >= 0; --i) {
                jdx[i] = tq % rest[i];
                tq /= rest[i];
            }
            int base_j = 0;
            pos = 0;
            std::vector<int> full_j(n, 0);
            for (int i = 0; i < n; ++i)
                if (i != kk) full_j[i] = jdx[pos++];
            for (int i = 0; i < n; ++i) base_j += full_j[i] * stride[i];

            Complex s = 0.0;
            for (int m = 0; m < dk; ++m) s += t(base_i + m * stride[kk], base_j + m * stride[kk]);
            r(p, q) = s;
        }
    }
    return r;
}

// Reorder tensor factors: output slot s carries input factor perm[s]
// (0-based). Realizes P A P^dag for the basis permutation P.
inline ComplexMatrix permute_factors(const ComplexMatrix& t, const FactorShape& shape,
                                     const std::vector<int>& perm) {
    shape.check_matches(t);
    const int n = shape.factors();
    if (static_cast<int>(perm.size()) != n)
        throw std::invalid_argument("permute_factors: permutation length mismatch");
    std::vector<int> stride(n, 1);
    for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * shape.dims[i + 1];
    std::vector<int> out_dims(n), out_stride(n, 1);
    for (int s = 0; s < n; ++s) out_dims[s] = shape.dims[perm[s]];
    for (int i = n - 2; i >= 0; --i) out_stride[i] = out_stride[i + 1] * out_dims[i + 1];

    const int total = shape.total();
    // map output flat index -> input flat index
    std::vector<int> back(total);
    std::vector<int> idx(n);
    for (int p = 0; p < total; ++p) {
        int tmp = p;
        for (int s = 0; s < n; ++s) {
            idx[s] = tmp / out_stride[s];
            tmp %= out_stride[s];
        }
        int q = 0;
        for (int s = 0; s < n; ++s) q += idx[s] * stride[perm[s]];
        back[p] = q;
    }
    ComplexMatrix r(total);
    for (int i = 0; i < total; ++i)
        for (int j = 0; j < total; ++j) r(i, j) = t(back[i], back[j]);
    return r;
}

struct EigenSystem {
    std::vector<double> eigenvalues;  // descending
    ComplexMatrix eigenvectors;       // orthonormal columns, matching order
};

// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
// Converges when the off-diagonal Frobenius mass drops below 1e-13 (relative
// to the matrix scale); hard cap of 40 sweeps.
inline EigenSystem hermitian_eig(const ComplexMatrix& input) {
    ComplexMatrix a = hermitize(input);  // rejects non-Hermitian input
    const int n = a.dim();
    ComplexMatrix v = ComplexMatrix::identity(n);

    const double scale = std::max(1.0, a.frobenius_norm());
    const double thresh = 1e-13 * scale;

    auto offdiag_mass = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += std::norm(a(i, j));
        return std::sqrt(2.0 * s);
    };

    for (int sweep = 0; sweep < 40 && offdiag_mass() > thresh; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const Complex apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag <= 1e-300) {
                    a(p, q) = a(q, p) = 0.0;
                    continue;
                }
                // phase factor so that apq = mag * e^{i phi}
                const Complex phase = apq / mag;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();

                const double tau = (aqq - app) / (2.0 * mag);
                const double tt = (tau >= 0.0 ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                              : 1.0 / (tau - std::sqrt(1.0 + tau * tau)));
                const double c = 1.0 / std::sqrt(1.0 + tt * tt);
                const double s = tt * c;

                // unitary: U_pp = c, U_pq = s*phase, U_qp = -s*conj(phase), U_qq = c
                const Complex upq = s * phase;
                const Complex uqp = -s * std::conj(phase);

                // A <- U^dag A U ; update columns then rows
                for (int r = 0; r < n; ++r) {
                    const Complex arp = a(r, p), arq = a(r, q);
                    a(r, p) = arp * c + arq * uqp;
                    a(r, q) = arp * upq + arq * c;
                }
                for (int r = 0; r < n; ++r) {
                    const Complex apr = a(p, r), aqr = a(q, r);
                    a(p, r) = c * apr + std::conj(uqp) * aqr;
                    a(q, r) = std::conj(upq) * apr + c * aqr;
                }
                a(p, q) = a(q, p) = 0.0;
                a(p, p) = Complex(a(p, p).real(), 0.0);
                a(q, q) = Complex(a(q, q).real(), 0.0);

                for (int r = 0; r < n; ++r) {
                    const Complex vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = vrp * c + vrq * uqp;
                    v(r, q) = vrp * upq + vrq * c;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = a(i, i).real();
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return diag[x] > diag[y]; });

    EigenSystem es;
    es.eigenvalues.resize(n);
    es.eigenvectors = ComplexMatrix(n);
    for (int c = 0; c < n; ++c) {
        es.eigenvalues[c] = diag[order[c]];
        for (int r = 0; r < n; ++r) es.eigenvectors(r, c) = v(r, order[c]);
    }
    return es;
}

inline double operator_norm(const ComplexMatrix& a) {
    const EigenSystem es = hermitian_eig(a);
    double m = 0.0;
    for (double lam : es.eigenvalues) m = std::max(m, std::abs(lam));
    return m;
}

inline double min_eigenvalue(const ComplexMatrix& a) {
    const EigenSystem es = hermitian_eig(a);
    return es.eigenvalues.back();
}

inline bool is_psd(const ComplexMatrix& a, double tol = 1e-10) {
    if (!is_hermitian(a, tol)) return false;
    return min_eigenvalue(a) >= -tol;
}

// Outer product |u><w| of two coordinate vectors.
inline ComplexMatrix outer(const std::vector<Complex>& u, const std::vector<Complex>& w) {
    if (u.size() != w.size()) throw std::invalid_argument("outer: length mismatch");
    ComplexMatrix r(static_cast<int>(u.size()));
    for (size_t i = 0; i < u.size(); ++i)
        for (size_t j = 0; j < w.size(); ++j) r(static_cast<int>(i), static_cast<int>(j)) = u[i] * std::conj(w[j]);
    return r;
}

inline ComplexMatrix projector(const std::vector<Complex>& psi) { return outer(psi, psi); }

// tr[A B] for equal-dimension matrices.
inline Complex trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("trace_product: dimension mismatch");
    Complex s = 0.0;
    for (int i = 0; i < a.dim(); ++i)
        for (int k = 0; k < a.dim(); ++k) s += a(i, k) * b(k, i);
    return s;
}

}  // namespace bellgap

#endif
