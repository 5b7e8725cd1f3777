#ifndef BELLGAP_SEARCH_HPP
#define BELLGAP_SEARCH_HPP

// Parameterized observable spaces and multi-start derivative-free
// optimization for Bell-violation search and never-violates scans.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "parallel.hpp"
#include "quantum.hpp"
#include "rng.hpp"

namespace bellgap {

// For d=2 the Bloch form a0*I + a.sigma with |a0| + ||a|| <= 1; for d>2 a
// spectrum in [-1,1]^d conjugated by a unitary built from d(d-1)/2 Givens
// angles and d-1 phases.
struct ObservableParam {
    int d = 2;
    double a0 = 0.0;
    std::array<double, 3> bloch = {0.0, 0.0, 1.0};
    std::vector<double> spectrum, angles, phases;
};

// U = diag(1, e^{i p1}, ..., e^{i p_{d-1}}) * prod_{i<j} G(i,j,theta_ij)
inline ComplexMatrix assemble_unitary(int d, const std::vector<double>& angles,
                                      const std::vector<double>& phases) {
    if (static_cast<int>(angles.size()) != d * (d - 1) / 2)
        throw std::invalid_argument("assemble_unitary: need d(d-1)/2 Givens angles");
    if (static_cast<int>(phases.size()) != d - 1)
        throw std::invalid_argument("assemble_unitary: need d-1 phases");
    ComplexMatrix u = ComplexMatrix::identity(d);
    int idx = 0;
    for (int i = 0; i < d - 1; ++i)
        for (int j = i + 1; j < d; ++j) {
            const double c = std::cos(angles[idx]), s = std::sin(angles[idx]);
            ++idx;
            for (int r = 0; r < d; ++r) {  // u <- u * G(i,j)
                const Complex ui = u(r, i), uj = u(r, j);
                u(r, i) = c * ui + s * uj;
                u(r, j) = -s * ui + c * uj;
            }
        }
    for (int r = 1; r < d; ++r) {
        const Complex ph(std::cos(phases[r - 1]), std::sin(phases[r - 1]));
        for (int col = 0; col < d; ++col) u(r, col) *= ph;
    }
    return u;
}

namespace detail {
inline ComplexMatrix realize_matrix(const ObservableParam& p) {
    if (p.d == 2) {
        const double norm_a =
            std::sqrt(p.bloch[0] * p.bloch[0] + p.bloch[1] * p.bloch[1] + p.bloch[2] * p.bloch[2]);
        if (std::abs(p.a0) + norm_a > 1.0 + 1e-9)
            throw std::invalid_argument("ObservableParam: |a0| + ||a|| exceeds 1");
        ComplexMatrix m(2);
        m(0, 0) = p.a0 + p.bloch[2];
        m(1, 1) = p.a0 - p.bloch[2];
        m(0, 1) = Complex(p.bloch[0], -p.bloch[1]);
        m(1, 0) = Complex(p.bloch[0], p.bloch[1]);
        return m;
    }
    if (static_cast<int>(p.spectrum.size()) != p.d)
        throw std::invalid_argument("ObservableParam: spectrum size != d");
    for (double s : p.spectrum)
        if (s < -1.0 || s > 1.0) throw std::invalid_argument("ObservableParam: spectrum outside [-1,1]");
    const ComplexMatrix u = assemble_unitary(p.d, p.angles, p.phases);
    ComplexMatrix diag(p.d);
    for (int i = 0; i < p.d; ++i) diag(i, i) = p.spectrum[i];
    return u * diag * u.adjoint();
}

// tr[rho (A x B)] without forming the Kronecker product
inline double fast_correlation(const ComplexMatrix& rho, int d, const ComplexMatrix& a,
                               const ComplexMatrix& b) {
    Complex s = 0.0;
    for (int i1 = 0; i1 < d; ++i1)
        for (int j1 = 0; j1 < d; ++j1) {
            const Complex aji = a(j1, i1);
            if (aji == Complex(0.0)) continue;
            for (int i2 = 0; i2 < d; ++i2)
                for (int j2 = 0; j2 < d; ++j2) s += rho(i1 * d + i2, j1 * d + j2) * aji * b(j2, i2);
        }
    return s.real();
}

inline double fast_slack(const ComplexMatrix& rho, int d, const ComplexMatrix& a1,
                         const ComplexMatrix& b1, const ComplexMatrix& b2, SignVersion sign) {
    const double c11 = fast_correlation(rho, d, a1, b1);
    const double c12 = fast_correlation(rho, d, a1, b2);
    const double c22 = fast_correlation(rho, d, b1, b2);
    return (1.0 + sign_factor(sign) * c22) - std::abs(c11 - c12);
}
}  // namespace detail

inline ObservableOp realize(const ObservableParam& p) { return ObservableOp(detail::realize_matrix(p)); }

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
};

// Standard Nelder-Mead (reflect 1, expand 2, contract 1/2, shrink 1/2);
// stops on iteration budget or when the simplex value spread drops below
// shrink_tol. Deterministic.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x0, double step, int max_iters = 200,
                                    double shrink_tol = 1e-10) {
    const int n = static_cast<int>(x0.size());
    std::vector<std::vector<double>> xs(n + 1, x0);
    for (int i = 0; i < n; ++i) xs[i + 1][i] += step;
    std::vector<double> fs(n + 1);
    for (int i = 0; i <= n; ++i) fs[i] = f(xs[i]);

    auto order = [&]() {
        for (int i = 1; i <= n; ++i) {
            auto x = xs[i];
            auto v = fs[i];
            int j = i - 1;
            while (j >= 0 && fs[j] > v) {
                xs[j + 1] = xs[j];
                fs[j + 1] = fs[j];
                --j;
            }
            xs[j + 1] = std::move(x);
            fs[j + 1] = v;
        }
    };
    order();

    for (int it = 0; it < max_iters && fs[n] - fs[0] > shrink_tol; ++it) {
        std::vector<double> centroid(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) centroid[k] += xs[i][k] / n;

        auto blend = [&](double coef) {
            std::vector<double> x(n);
            for (int k = 0; k < n; ++k) x[k] = centroid[k] + coef * (centroid[k] - xs[n][k]);
            return x;
        };

        const auto xr = blend(1.0);
        const double fr = f(xr);
        if (fr < fs[0]) {
            const auto xe = blend(2.0);
            const double fe = f(xe);
            if (fe < fr) {
                xs[n] = xe;
                fs[n] = fe;
            } else {
                xs[n] = xr;
                fs[n] = fr;
            }
        } else if (fr < fs[n - 1]) {
            xs[n] = xr;
            fs[n] = fr;
        } else {
            const auto xc = blend(fr < fs[n] ? 0.5 : -0.5);
            const double fc = f(xc);
            if (fc < std::min(fr, fs[n])) {
                xs[n] = xc;
                fs[n] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    for (int k = 0; k < n; ++k) xs[i][k] = xs[0][k] + 0.5 * (xs[i][k] - xs[0][k]);
                    fs[i] = f(xs[i]);
                }
            }
        }
        order();
    }
    return NelderMeadResult{xs[0], fs[0]};
}

struct SearchReport {
    double best_slack = 0.0;
    ComplexMatrix a1, b1, b2;               // argmax observables
    std::optional<ComplexMatrix> state;     // set when the search varies the state
    int restarts_used = 0;
    std::uint64_t seed = 0;
};

namespace detail {

// raw NM coordinates -> observable matrix
struct QubitArgmap {
    bool bloch_ball;
    ComplexMatrix operator()(const double* raw) const {
        ObservableParam p;
        p.d = 2;
        if (bloch_ball) {
            p.a0 = raw[0];
            p.bloch = {raw[1], raw[2], raw[3]};
            const double s = std::abs(p.a0) +
                             std::sqrt(raw[1] * raw[1] + raw[2] * raw[2] + raw[3] * raw[3]);
            if (s > 1.0) {
                p.a0 /= s;
                for (auto& c : p.bloch) c /= s;
            }
        } else {
            const double th = raw[0], ph = raw[1];
            p.bloch = {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
        }
        return realize_matrix(p);
    }
    int arity() const { return bloch_ball ? 4 : 2; }
};

struct SpectralArgmap {
    int d;
    ComplexMatrix operator()(const double* raw) const {
        ObservableParam p;
        p.d = d;
        p.spectrum.assign(raw, raw + d);
        for (auto& s : p.spectrum) s = std::clamp(s, -1.0, 1.0);
        p.angles.assign(raw + d, raw + d + d * (d - 1) / 2);
        p.phases.assign(raw + d + d * (d - 1) / 2, raw + d + d * (d - 1) / 2 + d - 1);
        return realize_matrix(p);
    }
    int arity() const { return d + d * (d - 1) / 2 + d - 1; }
};

template <class Argmap>
inline std::vector<double> random_observable_raw(Rng& rng, const Argmap& map) {
    std::vector<double> raw(map.arity());
    for (auto& x : raw) x = rng.uniform(-M_PI, M_PI);
    return raw;
}

}  // namespace detail

// Multi-start Nelder-Mead over (A1, B1, B2) with A2 = B1, minimizing the
// Bell slack; best_slack <= 0 demonstrates a violation. Qubit observables
// range over the unit Bloch sphere unless bloch_ball is set.
inline SearchReport minimize_bell_slack(const DensityOperator& rho, SignVersion sign,
                                        int restarts = 64, std::uint64_t seed = 0,
                                        bool bloch_ball = false, int iters = 200) {
    if (!rho.equal_factors())
        throw std::invalid_argument("minimize_bell_slack: state factors must have equal dimension");
    const int d = rho.shape.dims[0];
    if (d > 4) throw std::invalid_argument("minimize_bell_slack: d must be <= 4");

    auto run = [&](auto map) {
        const int arity = map.arity();
        auto objective = [&](const std::vector<double>& raw) {
            const ComplexMatrix a1 = map(raw.data());
            const ComplexMatrix b1 = map(raw.data() + arity);
            const ComplexMatrix b2 = map(raw.data() + 2 * arity);
            return detail::fast_slack(rho.matrix, d, a1, b1, b2, sign);
        };

        std::vector<double> values(restarts);
        std::vector<std::vector<double>> raws(restarts);
        parallel_for_index(restarts, [&](int r) {
            Rng rng(Rng::substream_seed(seed, static_cast<std::uint64_t>(r)));
            std::vector<double> x0;
            for (int o = 0; o < 3; ++o) {
                auto part = detail::random_observable_raw(rng, map);
                x0.insert(x0.end(), part.begin(), part.end());
            }
            const auto res = nelder_mead(objective, x0, 0.6, iters);
            values[r] = res.value;
            raws[r] = res.x;
        });
        std::vector<double> best_raw;
        double best = std::numeric_limits<double>::infinity();
        for (int r = 0; r < restarts; ++r)
            if (values[r] < best) {  // ties keep the lowest restart index
                best = values[r];
                best_raw = raws[r];
            }
        // polish the incumbent with shrinking steps
        for (double step : {0.1, 0.02, 0.004}) {
            const auto res = nelder_mead(objective, best_raw, step, iters);
            if (res.value < best) {
                best = res.value;
                best_raw = res.x;
            }
        }

        SearchReport rep;
        rep.a1 = map(best_raw.data());
        rep.b1 = map(best_raw.data() + arity);
        rep.b2 = map(best_raw.data() + 2 * arity);
        rep.best_slack = detail::fast_slack(rho.matrix, d, rep.a1, rep.b1, rep.b2, sign);
        rep.restarts_used = restarts;
        rep.seed = seed;
        return rep;
    };

    if (d == 2) return run(detail::QubitArgmap{bloch_ball});
    return run(detail::SpectralArgmap{d});
}

struct ScanReport {
    double min_slack = std::numeric_limits<double>::infinity();
};

// Minimum Bell slack over random observable triples (A1, B1, B2), A2 = B1,
// in the minus-sign version. States with a positive property-(39) extension
// must stay >= -1e-10.
inline ScanReport never_violates_scan(const DensityOperator& rho, int trials, std::uint64_t seed = 0) {
    if (!rho.equal_factors())
        throw std::invalid_argument("never_violates_scan: state factors must have equal dimension");
    const int d = rho.shape.dims[0];
    Rng rng(seed);
    ScanReport rep;

    auto draw_qubit = [&]() {
        ObservableParam p;
        p.d = 2;
        if (rng.uniform() < 0.5) {
            const auto n = rng.unit_vector3();
            p.bloch = {n[0], n[1], n[2]};
        } else {  // full Bloch ball, rescaled into |a0| + ||a|| <= 1
            p.a0 = rng.uniform(-1.0, 1.0);
            p.bloch = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
            const double s = std::abs(p.a0) + std::sqrt(p.bloch[0] * p.bloch[0] +
                                                        p.bloch[1] * p.bloch[1] +
                                                        p.bloch[2] * p.bloch[2]);
            if (s > 1.0) {
                p.a0 /= s;
                for (auto& c : p.bloch) c /= s;
            }
        }
        return detail::realize_matrix(p);
    };
    auto draw_general = [&]() {
        ObservableParam p;
        p.d = d;
        p.spectrum.resize(d);
        for (auto& s : p.spectrum) s = rng.uniform(-1.0, 1.0);
        p.angles.resize(d * (d - 1) / 2);
        for (auto& a : p.angles) a = rng.uniform(0.0, 2.0 * M_PI);
        p.phases.resize(d - 1);
        for (auto& a : p.phases) a = rng.uniform(0.0, 2.0 * M_PI);
        return detail::realize_matrix(p);
    };

    for (int t = 0; t < trials; ++t) {
        const ComplexMatrix a1 = d == 2 ? draw_qubit() : draw_general();
        const ComplexMatrix b1 = d == 2 ? draw_qubit() : draw_general();
        const ComplexMatrix b2 = d == 2 ? draw_qubit() : draw_general();
        rep.min_slack = std::min(
            rep.min_slack,
            detail::fast_slack(rho.matrix, d, a1, b1, b2, SignVersion::PerfectCorrelation));
    }
    return rep;
}

// Search over two-qubit separable states (pure products and two-term product
// mixtures) and observable triples for violations of the perfect-correlation
// version. The known product-state optimum sits at slack 1 - sqrt(5).
inline SearchReport find_separable_violation(std::uint64_t seed = 0, int restarts = 256,
                                             int iters = 300) {
    const int d = 2;
    // state coords: either 4 (two Bloch spheres) or 9 (mixing weight + four)
    auto build_product = [&](const double* raw) {
        const auto u = bloch_vector_state(std::sin(raw[0]) * std::cos(raw[1]),
                                          std::sin(raw[0]) * std::sin(raw[1]), std::cos(raw[0]));
        const auto v = bloch_vector_state(std::sin(raw[2]) * std::cos(raw[3]),
                                          std::sin(raw[2]) * std::sin(raw[3]), std::cos(raw[2]));
        return projector(kron_vec(u, v));
    };

    detail::QubitArgmap obs{false};
    auto observables_at = [&](const double* raw) {
        return std::array<ComplexMatrix, 3>{obs(raw), obs(raw + 2), obs(raw + 4)};
    };

    auto objective_product = [&](const std::vector<double>& raw) {
        const ComplexMatrix rho = build_product(raw.data());
        const auto o = observables_at(raw.data() + 4);
        return detail::fast_slack(rho, d, o[0], o[1], o[2], SignVersion::PerfectCorrelation);
    };
    auto objective_mixture = [&](const std::vector<double>& raw) {
        const double w = std::clamp(raw[0], 0.0, 1.0);
        const ComplexMatrix rho =
            build_product(raw.data() + 1) * w + build_product(raw.data() + 5) * (1.0 - w);
        const auto o = observables_at(raw.data() + 9);
        return detail::fast_slack(rho, d, o[0], o[1], o[2], SignVersion::PerfectCorrelation);
    };

    std::vector<double> values(restarts);
    std::vector<std::vector<double>> raws(restarts);
    parallel_for_index(restarts, [&](int r) {
        Rng rng(Rng::substream_seed(seed, static_cast<std::uint64_t>(r)));
        const bool mixture = (r % 2) == 1;
        const int n = mixture ? 15 : 10;
        std::vector<double> x0(n);
        for (auto& x : x0) x = rng.uniform(-M_PI, M_PI);
        if (mixture) x0[0] = rng.uniform(0.0, 1.0);
        const auto res = nelder_mead(mixture ? std::function(objective_mixture)
                                             : std::function(objective_product),
                                     x0, 0.6, iters);
        values[r] = res.value;
        raws[r] = res.x;
    });
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> best_raw;
    bool best_is_mixture = false;
    for (int r = 0; r < restarts; ++r)
        if (values[r] < best) {
            best = values[r];
            best_raw = raws[r];
            best_is_mixture = (r % 2) == 1;
        }
    for (double step : {0.1, 0.02, 0.004}) {
        const auto res = nelder_mead(best_is_mixture ? std::function(objective_mixture)
                                                     : std::function(objective_product),
                                     best_raw, step, iters);
        if (res.value < best) {
            best = res.value;
            best_raw = res.x;
        }
    }

    SearchReport rep;
    const double* sraw = best_raw.data();
    ComplexMatrix rho = best_is_mixture
                            ? build_product(sraw + 1) * std::clamp(sraw[0], 0.0, 1.0) +
                                  build_product(sraw + 5) * (1.0 - std::clamp(sraw[0], 0.0, 1.0))
                            : build_product(sraw);
    const double* oraw = best_raw.data() + (best_is_mixture ? 9 : 4);
    rep.a1 = obs(oraw);
    rep.b1 = obs(oraw + 2);
    rep.b2 = obs(oraw + 4);
    rep.best_slack = detail::fast_slack(rho, d, rep.a1, rep.b1, rep.b2, SignVersion::PerfectCorrelation);
    rep.state = std::move(rho);
    rep.restarts_used = restarts;
    rep.seed = seed;
    return rep;
}

}  // namespace bellgap

#endif
