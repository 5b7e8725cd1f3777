#include <catch2/catch_amalgamated.hpp>

#include <bellgap/rng.hpp>
#include <bellgap/source.hpp>

using namespace bellgap;

namespace {

SourceOperator triple_pure(const std::vector<Complex>& phi) {
    const int d = static_cast<int>(phi.size());
    const ComplexMatrix p = projector(phi);
    return SourceOperator(kron(p, p, p), FactorShape{d, d, d}, ExtensionDirection::Right);
}

// 23-symmetrized PSD: tr2 = tr3 by construction, tr1 generally different
SourceOperator symmetrized_23(Rng& rng, int d) {
    const ComplexMatrix x = rng.density(d * d * d);
    const FactorShape s{d, d, d};
    const ComplexMatrix sym = (x + permute_factors(x, s, {0, 2, 1})) * 0.5;
    return SourceOperator(sym, s, ExtensionDirection::Right);
}

}  // namespace

TEST_CASE("verify_source accepts dilations and rejects mismatches") {
    Rng rng(71);
    // pure product extension
    {
        const auto phi = rng.unit_complex_vector(2);
        const SourceOperator t = triple_pure(phi);
        const DensityOperator rho = pure_state(kron_vec(phi, phi), FactorShape{2, 2});
        REQUIRE(verify_source(t, rho));
    }
    // permutation-symmetric sigma against its own pair marginal
    for (int d : {2, 3}) {
        const SourceOperator sigma = random_symmetric_source(rng, d);
        REQUIRE(verify_source(sigma, reduced_state_of(sigma)));
    }
    // a generic product T = rho x rho2' fails one of the constraints
    {
        const DensityOperator rho(rng.density(4), FactorShape{2, 2});
        const SourceOperator t(kron(rho.matrix, rng.density(2)), FactorShape{2, 2, 2},
                               ExtensionDirection::Right);
        REQUIRE_FALSE(verify_source(t, rho));
    }
    // shape mismatch is an error, not a false
    {
        const SourceOperator t = triple_pure(rng.unit_complex_vector(2));
        const DensityOperator rho(rng.density(9), FactorShape{3, 3});
        REQUIRE_THROWS_AS(verify_source(t, rho), std::invalid_argument);
    }
}

TEST_CASE("left-direction operators mirror onto the right machinery") {
    Rng rng(72);
    const auto phi = rng.unit_complex_vector(2);
    const SourceOperator left(kron(projector(phi), projector(phi), projector(phi)),
                              FactorShape{2, 2, 2}, ExtensionDirection::Left);
    const DensityOperator rho = pure_state(kron_vec(phi, phi), FactorShape{2, 2});
    REQUIRE(verify_source(left, rho));

    const SourceOperator mirrored = mirror_to_right(left);
    REQUIRE(mirrored.direction == ExtensionDirection::Right);
    REQUIRE(verify_source(mirrored, swap_sites(rho)));
    REQUIRE_THROWS_AS(sigma_of(left), std::invalid_argument);
    REQUIRE_NOTHROW(sigma_of(mirrored));
}

TEST_CASE("tensor_positivity finds the witness for -I") {
    const ComplexMatrix z = ComplexMatrix::identity(4) * (-1.0);
    const PositivityVerdict v = tensor_positivity(z, FactorShape{2, 2}, 8, 50, 0);
    REQUIRE(v.witness_found());
    REQUIRE(v.min_value == Catch::Approx(-1.0).margin(1e-9));
    REQUIRE(v.witness.size() == 2);
}

TEST_CASE("the swap operator is tensor-positive despite eigenvalue -1") {
    const ComplexMatrix v = swap_operator(2);
    REQUIRE(min_eigenvalue(v) == Catch::Approx(-1.0).margin(1e-12));
    const PositivityVerdict verdict = tensor_positivity(v, FactorShape{2, 2}, 64, 200, 0);
    REQUIRE_FALSE(verdict.witness_found());
    REQUIRE(verdict.min_value >= -1e-10);
}

TEST_CASE("PSD operators never produce a witness") {
    Rng rng(73);
    for (int rep = 0; rep < 60; ++rep) {
        std::vector<int> dims;
        const int nf = rng.uniform_int(1, 3);
        for (int f = 0; f < nf; ++f) dims.push_back(rng.uniform_int(2, 3));
        const FactorShape shape(dims);
        const ComplexMatrix z = rng.density(shape.total());
        const PositivityVerdict verdict = tensor_positivity(z, shape, 8, 60, rep);
        REQUIRE_FALSE(verdict.witness_found());
        REQUIRE(verdict.min_value >= -1e-10);
    }
}

TEST_CASE("witnesses are definitive when found") {
    Rng rng(74);
    // indefinite Hermitian with a strongly negative product direction
    const ComplexMatrix z = rng.hermitian(8) - ComplexMatrix::identity(8) * 2.0;
    const PositivityVerdict v = tensor_positivity(z, FactorShape{2, 2, 2}, 16, 80, 1);
    REQUIRE(v.witness_found());
    REQUIRE(detail::product_expectation(hermitize(z), FactorShape{2, 2, 2}, v.witness) ==
            Catch::Approx(v.min_value).margin(1e-12));
    REQUIRE(v.min_value < -1e-10);
}

TEST_CASE("tensor_positivity is deterministic in the seed") {
    Rng rng(75);
    const ComplexMatrix z = rng.hermitian(9);
    const PositivityVerdict a = tensor_positivity(z, FactorShape{3, 3}, 16, 60, 42);
    const PositivityVerdict b = tensor_positivity(z, FactorShape{3, 3}, 16, 60, 42);
    REQUIRE(a.min_value == b.min_value);
    REQUIRE(a.status == b.status);
}

TEST_CASE("sigma_of reduces correctly") {
    Rng rng(76);
    // property-(39) operators reduce to rho itself
    {
        const SourceOperator sigma = random_symmetric_source(rng, 2);
        const DensityOperator rho = reduced_state_of(sigma);
        const SigmaReport rep = sigma_of(sigma);
        REQUIRE(approx_equal(rep.sigma, rho.matrix, 1e-12));
        REQUIRE(std::abs(rep.sigma.trace().real() - 1.0) < 1e-12);
        REQUIRE(rep.psd);
    }
    // R = rho1 x sigma23 reduces to sigma23
    {
        const ComplexMatrix rho1 = rng.density(2);
        const ComplexMatrix sigma23 = rng.density(4);
        const SourceOperator r(kron(rho1, sigma23), FactorShape{2, 2, 2}, ExtensionDirection::Right);
        REQUIRE(approx_equal(sigma_of(r).sigma, sigma23, 1e-12));
    }
}

TEST_CASE("condition32 vanishes in the property-39 case and needs a verified source") {
    Rng rng(77);
    for (int d : {2, 3}) {
        const SourceOperator sigma = random_symmetric_source(rng, d);
        const DensityOperator rho = reduced_state_of(sigma);
        for (int rep = 0; rep < 10; ++rep) {
            const ObservableOp b1 = random_observable(rng, d);
            const ObservableOp b2 = random_observable(rng, d);
            const double v = condition32(sigma, rho, b1, b1, b2, SignVersion::PerfectCorrelation);
            REQUIRE(v == Catch::Approx(0.0).margin(1e-10));
            REQUIRE(v >= -1e-12);
        }
    }
    // generic 23-symmetric sources give sign-indefinite values without error
    {
        const SourceOperator s = symmetrized_23(rng, 2);
        const DensityOperator rho = reduced_state_of(s);
        const ObservableOp b1 = random_observable(rng, 2);
        const ObservableOp b2 = random_observable(rng, 2);
        REQUIRE_NOTHROW(condition32(s, rho, b1, b1, b2, SignVersion::PerfectCorrelation));
        // convenience overload: a2 doubles as b1
        REQUIRE(condition32(s, rho, b1, b2, SignVersion::PerfectCorrelation) ==
                condition32(s, rho, b1, b1, b2, SignVersion::PerfectCorrelation));
    }
    // unverified source operators are rejected
    {
        const DensityOperator rho(rng.density(4), FactorShape{2, 2});
        const SourceOperator bad(kron(rho.matrix, rng.density(2)), FactorShape{2, 2, 2},
                                 ExtensionDirection::Right);
        const ObservableOp o = random_observable(rng, 2);
        REQUIRE_THROWS_AS(condition32(bad, rho, o, o, o, SignVersion::PerfectCorrelation),
                          std::invalid_argument);
    }
}

TEST_CASE("property39_check") {
    Rng rng(78);
    {
        const auto phi = rng.unit_complex_vector(3);
        const SourceOperator r = triple_pure(phi);
        const DensityOperator rho = pure_state(kron_vec(phi, phi), FactorShape{3, 3});
        REQUIRE(property39_check(r, rho));
    }
    {
        const SourceOperator sigma = random_symmetric_source(rng, 2);
        REQUIRE(property39_check(sigma, reduced_state_of(sigma)));
    }
    // the violating product state has unequal marginals: every candidate fails
    {
        const double s5 = std::sqrt(5.0);
        const DensityOperator rho = pure_state(
            kron_vec(bloch_vector_state(0, 0, -1), bloch_vector_state(-2.0 / s5, 0, 1.0 / s5)),
            FactorShape{2, 2});
        const ComplexMatrix cand =
            symmetrize_triple(kron(rho.matrix, ComplexMatrix::identity(2) * 0.5), 2);
        REQUIRE_FALSE(property39_check(
            SourceOperator(cand, FactorShape{2, 2, 2}, ExtensionDirection::Right), rho));
        const SourceOperator lifted(kron(rho.matrix, ComplexMatrix::identity(2) * 0.5),
                                    FactorShape{2, 2, 2}, ExtensionDirection::Right);
        REQUIRE_FALSE(property39_check(lifted, rho));
    }
}

TEST_CASE("find_positive_extension succeeds on equal-marginal separable mixtures") {
    Rng rng(79);
    // trivial pure product case
    {
        const auto phi = rng.unit_complex_vector(2);
        const DensityOperator rho = pure_state(kron_vec(phi, phi), FactorShape{2, 2});
        const ExtensionResult res = find_positive_extension(rho, 2000);
        REQUIRE(res.found);
        REQUIRE(res.r.has_value());
        REQUIRE(verify_source(*res.r, rho, 1e-6));
        REQUIRE(property39_check(*res.r, rho, 1e-6));
        REQUIRE(min_eigenvalue(res.r->matrix) >= -1e-7);
    }
    // two-term mixture sum p_i phi_i x phi_i at d = 2 and 3
    for (int d : {2, 3}) {
        ComplexMatrix mix(d * d);
        Rng local(100 + d);
        const double p = 0.35;
        const auto phi1 = local.unit_complex_vector(d);
        const auto phi2 = local.unit_complex_vector(d);
        mix += projector(kron_vec(phi1, phi1)) * p;
        mix += projector(kron_vec(phi2, phi2)) * (1.0 - p);
        const DensityOperator rho(mix, FactorShape{d, d});
        const ExtensionResult res = find_positive_extension(rho, 3000);
        REQUIRE(res.found);
        REQUIRE(res.marginal_residual < 1e-7);
        REQUIRE(res.psd_residual < 1e-7);
    }
}

TEST_CASE("find_positive_extension reports failure on the singlet") {
    const ExtensionResult res = find_positive_extension(singlet_state(), 500);
    REQUIRE_FALSE(res.found);
}

TEST_CASE("tau pipeline on pure product extensions and projective POVMs") {
    Rng rng(80);
    const auto phi = rng.unit_complex_vector(2);
    const SourceOperator r = triple_pure(phi);
    const DensityOperator rho = pure_state(kron_vec(phi, phi), FactorShape{2, 2});
    const Povm a1 = projective_povm(random_observable(rng, 2));
    const Povm a2 = projective_povm(random_observable(rng, 2));
    const Povm b1 = projective_povm(random_observable(rng, 2));
    const Povm b2 = projective_povm(random_observable(rng, 2));
    const TauPipelineReport rep = tau_pipeline(r, rho, a1, a2, b1, b2);
    REQUIRE(rep.marginals_ok);
    REQUIRE(rep.compatible);
    REQUIRE(rep.a5_residual < 1e-10);
}

TEST_CASE("tau pipeline with trivial single-outcome POVMs") {
    Rng rng(81);
    const SourceOperator sigma = random_symmetric_source(rng, 2);
    const DensityOperator rho = reduced_state_of(sigma);
    const Povm trivial(OutcomeGrid({0.0}), {ComplexMatrix::identity(2)});
    const TauPipelineReport rep = tau_pipeline(sigma, rho, trivial, trivial, trivial, trivial);
    REQUIRE(rep.marginals_ok);
    REQUIRE(rep.compatible);
    REQUIRE(rep.a5_residual < 1e-12);
}

TEST_CASE("tau pipeline on symmetric sources with random dichotomic POVMs") {
    Rng rng(82);
    for (int d : {2, 3}) {
        for (int rep = 0; rep < 5; ++rep) {
            const SourceOperator sigma = random_symmetric_source(rng, d);
            const DensityOperator rho = reduced_state_of(sigma);
            const Povm a1 = random_dichotomic_povm(rng, d);
            const Povm a2 = random_dichotomic_povm(rng, d);
            const Povm b1 = random_dichotomic_povm(rng, d);
            const Povm b2 = random_dichotomic_povm(rng, d);
            for (SignVersion s :
                 {SignVersion::PerfectCorrelation, SignVersion::PerfectAnticorrelation}) {
                const TauPipelineReport out = tau_pipeline(sigma, rho, a1, a2, b1, b2, s);
                REQUIRE(out.marginals_ok);
                REQUIRE(out.compatible);
                REQUIRE(out.a5_residual < 1e-10);
            }
        }
    }
}

TEST_CASE("tau pipeline accepts tensor-positive non-PSD sources") {
    // R = (I x V)/d^2 extends the maximally mixed state and is tensor-positive
    const int d = 2;
    const ComplexMatrix r_mat = kron(ComplexMatrix::identity(d), swap_operator(d)) * (1.0 / (d * d));
    REQUIRE(min_eigenvalue(r_mat) < -1e-3);  // not PSD
    const SourceOperator r(r_mat, FactorShape{d, d, d}, ExtensionDirection::Right);
    const DensityOperator rho(ComplexMatrix::identity(d * d) * (1.0 / (d * d)), FactorShape{d, d});
    REQUIRE(verify_source(r, rho));
    REQUIRE_FALSE(tensor_positivity(r_mat, FactorShape{d, d, d}, 32, 100, 0).witness_found());

    Rng rng(83);
    const Povm a1 = random_dichotomic_povm(rng, d);
    const Povm a2 = random_dichotomic_povm(rng, d);
    const Povm b1 = random_dichotomic_povm(rng, d);
    const Povm b2 = random_dichotomic_povm(rng, d);
    const TauPipelineReport rep = tau_pipeline(r, rho, a1, a2, b1, b2);
    REQUIRE(rep.marginals_ok);
    REQUIRE(rep.compatible);
    REQUIRE(rep.a5_residual < 1e-10);
}

TEST_CASE("negative tau entries surface as errors") {
    Rng rng(84);
    // perturb a symmetric source by G1 x G2 x G3 with traceless G_i: the
    // marginals survive but tensor positivity is destroyed
    const SourceOperator sigma = random_symmetric_source(rng, 2);
    const ComplexMatrix spike = kron(pauli_z(), pauli_z(), pauli_z());
    const ComplexMatrix r_mat = sigma.matrix + spike * 0.9;
    const SourceOperator r(r_mat, FactorShape{2, 2, 2}, ExtensionDirection::Right);
    const DensityOperator rho = reduced_state_of(sigma);
    REQUIRE(verify_source(r, rho));
    REQUIRE(tensor_positivity(r_mat, FactorShape{2, 2, 2}, 32, 100, 0).witness_found());

    const Povm pz = projective_povm(ObservableOp(pauli_z()));
    REQUIRE_THROWS_AS(tau_pipeline(r, rho, pz, pz, pz, pz), std::runtime_error);
}

TEST_CASE("certified sources with nonnegative condition imply nonnegative slack") {
    Rng rng(85);
    int certified = 0;
    for (int rep = 0; rep < 40; ++rep) {
        const SourceOperator s = symmetrized_23(rng, 2);
        const DensityOperator rho = reduced_state_of(s);
        if (tensor_positivity(s.matrix, s.shape, 8, 60, rep).witness_found()) continue;
        const ObservableOp b1 = random_observable(rng, 2);
        const ObservableOp b2 = random_observable(rng, 2);
        for (SignVersion sv :
             {SignVersion::PerfectCorrelation, SignVersion::PerfectAnticorrelation}) {
            if (condition32(s, rho, b1, b1, b2, sv) < 0.0) continue;
            ++certified;
            for (int sweep = 0; sweep < 10; ++sweep) {
                const ObservableOp a1 = random_observable(rng, 2);
                REQUIRE(quantum_bell_slack(rho, a1, b1, b2, sv) >= -1e-10);
            }
        }
    }
    REQUIRE(certified > 10);
}

TEST_CASE("mixed factor dimensions flow through the whole pipeline") {
    Rng rng(87);
    // R = rho1 x S with S swap-symmetric on C3 x C3: tr2 R = tr3 R = rho1 x s
    const ComplexMatrix rho1 = rng.density(2);
    const ComplexMatrix s_raw = rng.density(9);
    const ComplexMatrix s_sym =
        (s_raw + permute_factors(s_raw, FactorShape{3, 3}, {1, 0})) * 0.5;
    const SourceOperator r(kron(rho1, s_sym), FactorShape{2, 3, 3}, ExtensionDirection::Right);
    const ComplexMatrix s_marg = partial_trace(s_sym, FactorShape{3, 3}, 1);
    const DensityOperator rho(kron(rho1, s_marg), FactorShape{2, 3});
    REQUIRE(verify_source(r, rho));

    const Povm a1 = random_dichotomic_povm(rng, 2);
    const Povm a2 = random_dichotomic_povm(rng, 2);
    const Povm b1 = random_dichotomic_povm(rng, 3);
    const Povm b2 = random_dichotomic_povm(rng, 3);
    const TauPipelineReport rep = tau_pipeline(r, rho, a1, a2, b1, b2);
    REQUIRE(rep.marginals_ok);
    REQUIRE(rep.compatible);
    REQUIRE(rep.a5_residual < 1e-10);
}

TEST_CASE("tau entries stay nonnegative for tensor-positive sources and PSD effects") {
    Rng rng(86);
    for (int rep = 0; rep < 10; ++rep) {
        const int d = rng.uniform_int(2, 3);
        const SourceOperator sigma = random_symmetric_source(rng, d);
        const Povm a = random_dichotomic_povm(rng, d);
        const Povm b = random_dichotomic_povm(rng, d);
        const Povm c = random_dichotomic_povm(rng, d);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k) {
                    const Complex val = trace_product(
                        sigma.matrix, kron(a.effects[i], b.effects[j], c.effects[k]));
                    REQUIRE(val.real() >= -1e-10);
                }
    }
}
