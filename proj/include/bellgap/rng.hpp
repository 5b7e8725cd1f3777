#ifndef BELLGAP_RNG_HPP
#define BELLGAP_RNG_HPP

// Seeded sampling helpers. All distributions are generated from raw
// mt19937_64 output with fixed arithmetic, so identical seeds give identical
// streams on every platform and toolchain.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "linalg.hpp"

namespace bellgap {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // substream for shard `index` of a parallel sweep; splitmix64-style mix
    static std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() {  // [0, 1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(uniform() * (hi - lo + 1.0));
    }
    double gaussian() {
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    Complex complex_gaussian() { return Complex(gaussian(), gaussian()); }

    // flat Dirichlet sampler (exponential spacings, normalized)
    std::vector<double> simplex(int n) {
        std::vector<double> w(n);
        double total = 0.0;
        for (auto& x : w) {
            double u = uniform();
            while (u <= 1e-300) u = uniform();
            x = -std::log(u);
            total += x;
        }
        for (auto& x : w) x /= total;
        return w;
    }

    std::vector<double> unit_vector3() {
        double x, y, z, n2;
        do {
            x = gaussian();
            y = gaussian();
            z = gaussian();
            n2 = x * x + y * y + z * z;
        } while (n2 < 1e-12);
        const double inv = 1.0 / std::sqrt(n2);
        return {x * inv, y * inv, z * inv};
    }

    std::vector<Complex> unit_complex_vector(int d) {
        std::vector<Complex> v(d);
        double n2 = 0.0;
        do {
            n2 = 0.0;
            for (auto& z : v) {
                z = complex_gaussian();
                n2 += std::norm(z);
            }
        } while (n2 < 1e-12);
        const double inv = 1.0 / std::sqrt(n2);
        for (auto& z : v) z *= inv;
        return v;
    }

    ComplexMatrix hermitian(int d, double scale = 1.0) {
        ComplexMatrix g(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) g(i, j) = 0.5 * scale * complex_gaussian();
        return g + g.adjoint();  // exactly Hermitian entrywise
    }

    // Haar-ish unitary via Gram-Schmidt on a complex Gaussian matrix
    ComplexMatrix unitary(int d) {
        ComplexMatrix u(d);
        for (int c = 0; c < d; ++c) {
            std::vector<Complex> v(d);
            for (auto& z : v) z = complex_gaussian();
            for (int prev = 0; prev < c; ++prev) {
                Complex dot = 0.0;
                for (int r = 0; r < d; ++r) dot += std::conj(u(r, prev)) * v[r];
                for (int r = 0; r < d; ++r) v[r] -= dot * u(r, prev);
            }
            double n2 = 0.0;
            for (const auto& z : v) n2 += std::norm(z);
            const double inv = 1.0 / std::sqrt(n2);
            for (int r = 0; r < d; ++r) u(r, c) = v[r] * inv;
        }
        return u;
    }

    // PSD with unit trace
    ComplexMatrix density(int d) {
        ComplexMatrix g(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) g(i, j) = complex_gaussian();
        ComplexMatrix p = g * g.adjoint();
        const double tr = p.trace().real();
        return p * (1.0 / tr);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace bellgap

#endif
