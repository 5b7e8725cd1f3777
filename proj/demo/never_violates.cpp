// States with a symmetric (property-39) extension never violate the
// "perfect correlation" version of the original Bell inequality, even when
// their same-observable correlation is negative.

#include <cstdio>

#include <bellgap/quantum.hpp>
#include <bellgap/search.hpp>
#include <bellgap/source.hpp>

using namespace bellgap;

int main() {
    std::printf("Werner family W_2(phi), sigma_n at both sites: correlation (2 phi - 1)/3\n");
    for (double phi : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const DensityOperator w = werner_state(2, phi);
        const ObservableOp sz(pauli_z());
        const double corr = correlation(w, sz, sz);
        const double min_slack = never_violates_scan(w, 20000, 1).min_slack;
        std::printf("  phi=%5.2f  corr=%+.6f  scan min slack=%+.3e\n", phi, corr, min_slack);
    }

    std::printf("noisy singlet eta(beta), negative same-direction correlation, no violation:\n");
    for (double beta : {0.1, 0.2, 1.0 / 3.0}) {
        const DensityOperator eta = noisy_state(singlet_vector(), beta).state;
        const ObservableOp sz(pauli_z());
        const double corr = correlation(eta, sz, sz);
        const double best =
            minimize_bell_slack(eta, SignVersion::PerfectCorrelation, 64, 2).best_slack;
        std::printf("  beta=%.4f  corr=%+.6f  searched min slack=%+.3e\n", beta, corr, best);
    }

    std::printf("the singlet itself, for contrast:\n");
    const double singlet_best =
        minimize_bell_slack(singlet_state(), SignVersion::PerfectCorrelation, 64, 3).best_slack;
    std::printf("  searched min slack=%+.6f\n", singlet_best);

    std::printf("positive extension exists for W_2(0.5)? ");
    const ExtensionResult ext = find_positive_extension(werner_state(2, 0.5), 2000);
    std::printf("%s (marginal residual %.2e)\n", ext.found ? "yes" : "not found",
                ext.marginal_residual);
    return 0;
}
