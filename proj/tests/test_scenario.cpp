#include <catch2/catch_amalgamated.hpp>

#include <bellgap/rng.hpp>
#include <bellgap/scenario.hpp>
#include <bellgap/lhv.hpp>

using namespace bellgap;

namespace {

JointDistribution random_table(Rng& rng, const OutcomeGrid& g1, const OutcomeGrid& g2) {
    const auto w = rng.simplex(g1.size() * g2.size());
    std::vector<std::vector<double>> t(g1.size(), std::vector<double>(g2.size()));
    int n = 0;
    for (auto& row : t)
        for (auto& x : row) x = w[n++];
    return JointDistribution(g1, g2, std::move(t));
}

}  // namespace

TEST_CASE("OutcomeGrid validation") {
    REQUIRE_THROWS_AS(OutcomeGrid({0.2, 0.2}), std::invalid_argument);
    REQUIRE_THROWS_AS(OutcomeGrid({1.5}), std::invalid_argument);
    REQUIRE_THROWS_AS(OutcomeGrid(std::vector<double>{}), std::invalid_argument);
    const OutcomeGrid g({0.5, -0.5, 1.0});
    REQUIRE(g[0] == -0.5);  // sorted
    REQUIRE(g.index_of(0.5) == 1);
    REQUIRE(g.index_of(0.25) == -1);
}

TEST_CASE("JointDistribution ingest renormalizes tiny deviations and rejects gross ones") {
    const OutcomeGrid d = OutcomeGrid::dichotomic();
    const double eps = 2e-10;
    const JointDistribution p(d, d, {{0.25 + eps, 0.25}, {0.25, 0.25}});
    double mass = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) mass += p.prob(i, j);
    REQUIRE(mass == Catch::Approx(1.0).margin(1e-15));

    REQUIRE_THROWS_AS(JointDistribution(d, d, {{0.3, 0.25}, {0.25, 0.25}}), std::invalid_argument);
    REQUIRE_THROWS_AS(JointDistribution(d, d, {{-0.01, 0.26}, {0.5, 0.25}}), std::invalid_argument);
}

TEST_CASE("moment on simple distributions") {
    const OutcomeGrid d = OutcomeGrid::dichotomic();
    const JointDistribution p(d, d, {{0.5, 0.0}, {0.0, 0.5}});
    REQUIRE(moment(p, 1, 1) == Catch::Approx(1.0).margin(1e-15));

    const JointDistribution point(OutcomeGrid({0.5}), OutcomeGrid({-0.5}), {{1.0}});
    REQUIRE(moment(point, 1, 1) == Catch::Approx(-0.25).margin(1e-15));
    REQUIRE(moment(point, 1, 0) == Catch::Approx(0.5).margin(1e-15));
    REQUIRE(moment(point, 0, 1) == Catch::Approx(-0.5).margin(1e-15));
}

TEST_CASE("moment equals brute-force sum on random 4x4 tables") {
    Rng rng(21);
    for (int rep = 0; rep < 50; ++rep) {
        const OutcomeGrid g1 = random_grid(rng, 4, 4), g2 = random_grid(rng, 4, 4);
        const JointDistribution p = random_table(rng, g1, g2);
        for (int m = 0; m <= 2; ++m)
            for (int n = 0; n + m <= 2; ++n) {
                double oracle = 0.0;
                for (int i = 0; i < 4; ++i)
                    for (int j = 0; j < 4; ++j)
                        oracle += std::pow(g1[i], m) * std::pow(g2[j], n) * p.prob(i, j);
                REQUIRE(moment(p, m, n) == Catch::Approx(oracle).margin(1e-14));
                if (m + n >= 1) {
                    REQUIRE(moment(p, m, n) >= -1.0 - 1e-12);
                    REQUIRE(moment(p, m, n) <= 1.0 + 1e-12);
                }
            }
    }
}

TEST_CASE("event probabilities on exact grids") {
    const OutcomeGrid d = OutcomeGrid::dichotomic();
    const JointDistribution diag(d, d, {{0.5, 0.0}, {0.0, 0.5}});
    REQUIRE(event_prob(diag, OutcomeEvent::Equal) == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(event_prob(diag, OutcomeEvent::ProductOne) == Catch::Approx(1.0).margin(1e-15));

    const JointDistribution point(OutcomeGrid({1.0}), OutcomeGrid({-1.0}), {{1.0}});
    REQUIRE(event_prob(point, OutcomeEvent::ProductMinusOne) == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(event_prob(point, OutcomeEvent::Opposite) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("dichotomic complements and the moment identity") {
    Rng rng(22);
    const OutcomeGrid d = OutcomeGrid::dichotomic();
    for (int rep = 0; rep < 100; ++rep) {
        const JointDistribution p = random_table(rng, d, d);
        const double q1 = event_prob(p, OutcomeEvent::ProductOne);
        const double qm = event_prob(p, OutcomeEvent::ProductMinusOne);
        REQUIRE(q1 + qm == Catch::Approx(1.0).margin(1e-12));
        REQUIRE(moment(p, 1, 1) == Catch::Approx(2.0 * q1 - 1.0).margin(1e-12));
    }
}

TEST_CASE("diagonal-supported distributions equate first and second moments") {
    Rng rng(23);
    const OutcomeGrid g({-0.75, -0.25, 0.5, 1.0});
    for (int rep = 0; rep < 20; ++rep) {
        const auto w = rng.simplex(g.size());
        std::vector<std::vector<double>> t(g.size(), std::vector<double>(g.size(), 0.0));
        for (int i = 0; i < g.size(); ++i) t[i][i] = w[i];
        const JointDistribution p(g, g, std::move(t));
        REQUIRE(event_prob(p, OutcomeEvent::Equal) == Catch::Approx(1.0).margin(1e-15));
        REQUIRE(moment(p, 1, 1) == Catch::Approx(moment(p, 2, 0)).margin(1e-12));
    }
}

TEST_CASE("bell_slack basic values") {
    REQUIRE(bell_slack(CorrelationQuad(1.0, 1.0, -1.0), SignVersion::PerfectCorrelation) ==
            Catch::Approx(2.0).margin(1e-15));
    // singlet with A1=B1=sigma_z and B2 at 120 degrees (cross-checked by the
    // quantum-module trace oracle): correlations (-1, 1/2, 1/2)
    REQUIRE(bell_slack(CorrelationQuad(-1.0, 0.5, 0.5), SignVersion::PerfectCorrelation) ==
            Catch::Approx(-1.0).margin(1e-15));
}

TEST_CASE("bell_slack respects the number inequality |x-y| <= 1-xy") {
    Rng rng(24);
    for (int rep = 0; rep < 1000; ++rep) {
        const double x = rng.uniform(-1.0, 1.0), y = rng.uniform(-1.0, 1.0);
        REQUIRE(bell_slack(CorrelationQuad(x, y, x * y), SignVersion::PerfectCorrelation) >= -1e-12);
    }
}

TEST_CASE("bell_slack sign duality is exact") {
    Rng rng(25);
    for (int rep = 0; rep < 100; ++rep) {
        const double c11 = rng.uniform(-1.0, 1.0), c12 = rng.uniform(-1.0, 1.0),
                     c22 = rng.uniform(-1.0, 1.0);
        const double minus =
            bell_slack(CorrelationQuad(c11, c12, -c22), SignVersion::PerfectCorrelation);
        const double plus =
            bell_slack(CorrelationQuad(c11, c12, c22), SignVersion::PerfectAnticorrelation);
        REQUIRE(minus == plus);
    }
}

TEST_CASE("chsh_value basics and the deterministic-strategy bound") {
    REQUIRE(chsh_value(CorrelationQuad(1.0, 1.0, 1.0, 1.0)) == Catch::Approx(2.0).margin(1e-15));
    REQUIRE_THROWS_AS(chsh_value(CorrelationQuad(1.0, 1.0, 1.0)), std::invalid_argument);

    // oracle: enumerate all 16 deterministic strategies; the maximum is 2
    double best = 0.0;
    for (int a1 = -1; a1 <= 1; a1 += 2)
        for (int a2 = -1; a2 <= 1; a2 += 2)
            for (int b1 = -1; b1 <= 1; b1 += 2)
                for (int b2 = -1; b2 <= 1; b2 += 2)
                    best = std::max(best,
                                    chsh_value(CorrelationQuad(double(a1 * b1), double(a1 * b2),
                                                               double(a2 * b1), double(a2 * b2))));
    REQUIRE(best == Catch::Approx(2.0).margin(1e-15));
}

TEST_CASE("dichotomic_conditions branches") {
    const OutcomeGrid d = OutcomeGrid::dichotomic();
    auto with_product_one = [&](double q) {
        // P(l1*l2 = 1) = q, split evenly across the two diagonal atoms
        return JointDistribution(d, d, {{q / 2, (1 - q) / 2}, {(1 - q) / 2, q / 2}});
    };

    const auto perfect = dichotomic_conditions(with_product_one(1.0), with_product_one(0.3),
                                               SignVersion::PerfectCorrelation);
    REQUIRE(perfect.holds);
    REQUIRE(perfect.which == DichotomicBranch::CertainProduct);

    const auto sum = dichotomic_conditions(with_product_one(0.2), with_product_one(0.3),
                                           SignVersion::PerfectCorrelation);
    REQUIRE(sum.holds);
    REQUIRE(sum.which == DichotomicBranch::SumBound);

    const auto neither = dichotomic_conditions(with_product_one(0.6), with_product_one(0.5),
                                               SignVersion::PerfectCorrelation);
    REQUIRE_FALSE(neither.holds);
    REQUIRE(neither.which == DichotomicBranch::None);

    // plus sign works with the opposite event
    const auto plus = dichotomic_conditions(with_product_one(0.0), with_product_one(0.3),
                                            SignVersion::PerfectAnticorrelation);
    REQUIRE(plus.holds);
    REQUIRE(plus.which == DichotomicBranch::CertainProduct);

    const OutcomeGrid g({-0.5, 0.5});
    const JointDistribution bad(g, g, {{0.25, 0.25}, {0.25, 0.25}});
    REQUIRE_THROWS_AS(dichotomic_conditions(bad, bad, SignVersion::PerfectCorrelation),
                      std::invalid_argument);
}
