#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <bellgap/json_io.hpp>

using namespace bellgap;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(BELLGAP_CLI_PATH) + " " + args + " > cli_stdout.txt 2> cli_stderr.txt";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("matrix json round trip") {
    Rng rng(101);
    const ComplexMatrix m = rng.hermitian(3);
    const ComplexMatrix back = matrix_from_json(matrix_to_json(m));
    REQUIRE(approx_equal(m, back, 0.0));
}

TEST_CASE("model json round trips") {
    Rng rng(102);
    const CorrelationLhvModel m = random_correlation_model(rng, 8);
    const CorrelationLhvModel back = correlation_model_from_json(correlation_model_to_json(m));
    REQUIRE(back.nu == m.nu);
    REQUIRE(back.f1[1] == m.f1[1]);

    const OutcomeGrid g = random_grid(rng, 2, 3);
    const ConditionalLhvModel c = random_conditional_model(rng, g, g, 6);
    const ConditionalLhvModel cback = conditional_model_from_json(conditional_model_to_json(c));
    REQUIRE(cback.nu == c.nu);
    REQUIRE(cback.p2[0] == c.p2[0]);

    const SourceOperator s = random_symmetric_source(rng, 2);
    const SourceOperator sback = source_from_json(source_to_json(s));
    REQUIRE(approx_equal(sback.matrix, s.matrix, 0.0));
    REQUIRE(sback.direction == s.direction);

    const SourceOperator left(s.matrix, s.shape, ExtensionDirection::Left);
    REQUIRE(source_from_json(source_to_json(left)).direction == ExtensionDirection::Left);
}

TEST_CASE("joint distribution json round trip") {
    const OutcomeGrid d = OutcomeGrid::dichotomic();
    const JointDistribution p(d, d, {{0.1, 0.4}, {0.3, 0.2}});
    const JointDistribution back = joint_from_json(joint_to_json(p));
    REQUIRE(back.grid1() == p.grid1());
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) REQUIRE(back.prob(i, j) == p.prob(i, j));
}

TEST_CASE("named state and observable specs") {
    REQUIRE(approx_equal(state_from_spec(json("singlet")).matrix, singlet_state().matrix, 0.0));
    REQUIRE(approx_equal(state_from_spec(json("werner:3:-0.5")).matrix,
                         werner_state(3, -0.5).matrix, 0.0));
    REQUIRE(approx_equal(state_from_spec(json("noisy:0.25")).matrix,
                         noisy_state(singlet_vector(), 0.25).state.matrix, 0.0));
    REQUIRE_THROWS_AS(state_from_spec(json("wigner:2")), std::invalid_argument);

    REQUIRE(approx_equal(observable_from_spec(json("spin:z")).matrix, pauli_z(), 0.0));
    REQUIRE(approx_equal(observable_from_spec(json("-spin:z")).matrix, pauli_z() * (-1.0), 1e-15));
    const json bloch{{"bloch", {0.0, 1.0, 0.0, 0.0}}};
    REQUIRE(approx_equal(observable_from_spec(bloch).matrix, pauli_x(), 1e-15));
}

TEST_CASE("cli reports are byte-identical across reruns") {
    REQUIRE(run_cli("search --state singlet --seed 7 --restarts 8 --out report_a.json") == 0);
    REQUIRE(run_cli("search --state singlet --seed 7 --restarts 8 --out report_b.json") == 0);
    REQUIRE(slurp("report_a.json") == slurp("report_b.json"));

    const json rep = json::parse(slurp("report_a.json"));
    REQUIRE(rep.at("schema").get<int>() == 1);
    REQUIRE(rep.at("results").at("best_slack").get<double>() <= -1.0 + 1e-6);
}

TEST_CASE("cli check-lhv on a correlation model file") {
    const json model{{"nu", {0.5, 0.5}},
                     {"f1", {{0.5, -0.5}, {1.0, -1.0}}},
                     {"f2", {{1.0, -1.0}, {0.25, 0.5}}}};
    spit("model.json", model.dump());
    REQUIRE(run_cli("check-lhv model.json --sign minus --out lhv_report.json") == 0);
    const json rep = json::parse(slurp("lhv_report.json"));
    REQUIRE(rep.at("results").at("model_kind") == "correlation");
    REQUIRE(rep.at("results").at("pointwise_eq12").get<bool>());
    REQUIRE(rep.at("results").at("slack").get<double>() >= -1e-12);
    REQUIRE(rep.at("results").at("consistent").get<bool>());
}

TEST_CASE("cli check-lhv on a conditional model file") {
    // dichotomic conditional model, perfectly correlated under (a2, b1)
    Rng rng(105);
    const ConditionalLhvModel m =
        perfectly_correlated_conditional_model(rng, OutcomeGrid::dichotomic(), false, 8);
    spit("cond_model.json", conditional_model_to_json(m).dump());
    REQUIRE(run_cli("check-lhv cond_model.json --sign minus --out cond_report.json") == 0);
    const json rep = json::parse(slurp("cond_report.json"));
    REQUIRE(rep.at("results").at("model_kind") == "conditional");
    REQUIRE(rep.at("results").at("pointwise_eq12").get<bool>());
    REQUIRE(rep.at("results").at("condition21").get<double>() >= -1e-12);
    REQUIRE(rep.at("results").at("perfect_correlation_prob").get<double>() ==
            Catch::Approx(1.0).margin(1e-12));
    REQUIRE(rep.at("results").at("dichotomic_condition").at("holds").get<bool>());
    REQUIRE(rep.at("results").at("dichotomic_condition").at("branch") == "certain_product");
    REQUIRE(rep.at("results").at("slack").get<double>() >= -1e-12);
}

TEST_CASE("cli tolerance override changes the violation verdict") {
    // slack is about -2 for the singlet; a huge tolerance silences the flag
    REQUIRE(run_cli("search --state singlet --seed 3 --restarts 8 --tol 5 --fail-on-violation "
                    "--out tol_report.json") == 0);
    const json rep = json::parse(slurp("tol_report.json"));
    REQUIRE(rep.at("config").at("tolerances").at("verdict").get<double>() == 5.0);
}

TEST_CASE("cli exit codes") {
    // parse error -> 1
    spit("broken.json", "{ not json");
    REQUIRE(run_cli("check-lhv broken.json") == 1);

    // contract violation in the input -> 2
    const json bad{{"nu", {0.5, 0.4}},
                   {"f1", {{0.0, 0.0}, {0.0, 0.0}}},
                   {"f2", {{0.0, 0.0}, {0.0, 0.0}}}};
    spit("bad_model.json", bad.dump());
    REQUIRE(run_cli("check-lhv bad_model.json") == 2);

    // violation finding + --fail-on-violation -> 3
    REQUIRE(run_cli("search --state singlet --seed 3 --restarts 8 --fail-on-violation "
                    "--out violation_report.json") == 3);

    // same run without the flag is a clean exit
    REQUIRE(run_cli("search --state singlet --seed 3 --restarts 8 --out ok_report.json") == 0);
}

TEST_CASE("cli werner sweep emits the (2*phi-1)/3 column") {
    REQUIRE(run_cli("werner --d 2 --sweep -1:1:5 --csv werner_sweep.csv --out werner_report.json") == 0);
    const std::string csv = slurp("werner_sweep.csv");
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    REQUIRE(header == "phi,correlation");
    int rows = 0;
    for (std::string line; std::getline(lines, line) && !line.empty(); ++rows) {
        const auto comma = line.find(',');
        const double phi = std::stod(line.substr(0, comma));
        const double corr = std::stod(line.substr(comma + 1));
        REQUIRE(corr == Catch::Approx((2.0 * phi - 1.0) / 3.0).margin(1e-12));
    }
    REQUIRE(rows == 5);

    // empty grid: header-only CSV
    REQUIRE(run_cli("werner --d 2 --sweep 0:1:0 --csv empty_sweep.csv --out empty_report.json") == 0);
    REQUIRE(slurp("empty_sweep.csv") == "phi,correlation\n");

    // plot data from a non-sweep run is a contract error
    REQUIRE(run_cli("werner --d 2 --phi 0.5 --csv oops.csv") == 2);
}

TEST_CASE("cli noisy sweep tracks -beta") {
    REQUIRE(run_cli("noisy --sweep 0:0.3:4 --direction z --csv noisy_sweep.csv "
                    "--out noisy_report.json") == 0);
    std::istringstream lines(slurp("noisy_sweep.csv"));
    std::string header;
    std::getline(lines, header);
    REQUIRE(header == "beta,correlation,conditional_same,conditional_different");
    for (std::string line; std::getline(lines, line) && !line.empty();) {
        std::istringstream cells(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
        REQUIRE(row.size() == 4);
        REQUIRE(row[1] == Catch::Approx(-row[0]).margin(1e-12));
        REQUIRE(row[2] == Catch::Approx((1.0 - row[0]) / 2.0).margin(1e-12));
        REQUIRE(row[3] == Catch::Approx((1.0 + row[0]) / 2.0).margin(1e-12));
    }
}

TEST_CASE("cli noisy reproduces the conditional probabilities") {
    REQUIRE(run_cli("noisy --beta 0.3333 --direction z --out noisy_point.json") == 0);
    const json rep = json::parse(slurp("noisy_point.json"));
    REQUIRE(rep.at("results").at("correlation").get<double>() ==
            Catch::Approx(-0.3333).margin(1e-12));
    REQUIRE(rep.at("results").at("conditional_different").get<double>() ==
            Catch::Approx((1 + 0.3333) / 2).margin(1e-12));
}

TEST_CASE("cli source-audit on a symmetric extension") {
    Rng rng(103);
    const SourceOperator sigma = random_symmetric_source(rng, 2);
    spit("sigma.json", source_to_json(sigma).dump());
    REQUIRE(run_cli("source-audit sigma.json --seed 5 --restarts 16 --out audit.json") == 0);
    const json rep = json::parse(slurp("audit.json"));
    REQUIRE(rep.at("results").at("verified").get<bool>());
    REQUIRE(rep.at("results").at("property39").get<bool>());
    REQUIRE(rep.at("results").at("tensor_positivity").at("status") == "no_violation_found");
    REQUIRE(rep.at("results").at("tau").at("marginals_ok").get<bool>());
    REQUIRE(rep.at("results").at("tau").at("compatible").get<bool>());
    REQUIRE(rep.at("results").at("tau").at("a5_residual").get<double>() < 1e-10);
    REQUIRE(rep.at("results").at("condition32").get<double>() >= -1e-12);
}

TEST_CASE("cli source-audit mirrors left-direction operators") {
    Rng rng(104);
    const auto phi = rng.unit_complex_vector(2);
    const ComplexMatrix p = projector(phi);
    const SourceOperator left(kron(kron(p, p), p), FactorShape{2, 2, 2}, ExtensionDirection::Left);
    spit("left.json", source_to_json(left).dump());
    REQUIRE(run_cli("source-audit left.json --seed 2 --restarts 8 --out left_report.json") == 0);
    const json rep = json::parse(slurp("left_report.json"));
    REQUIRE(rep.at("results").at("direction") == "left");
    REQUIRE(rep.at("results").at("mirrored").get<bool>());
    REQUIRE(rep.at("results").at("verified").get<bool>());
    REQUIRE(rep.at("results").at("property39").get<bool>());
}

TEST_CASE("cli check-quantum with named specs") {
    const json scenario{{"state", "singlet"}, {"a1", "spin:z"}, {"b1", "spin:z"},
                        {"b2", {{"bloch", {0.0, std::sqrt(3.0) / 2.0, 0.0, -0.5}}}}};
    spit("quantum.json", scenario.dump());
    REQUIRE(run_cli("check-quantum quantum.json --sign minus --out quantum_report.json") == 0);
    const json rep = json::parse(slurp("quantum_report.json"));
    REQUIRE(rep.at("results").at("slack").get<double>() == Catch::Approx(-1.0).margin(1e-12));
    REQUIRE(run_cli("check-quantum quantum.json --sign minus --fail-on-violation") == 3);
}

TEST_CASE("cli check-classical audits observables") {
    const json scenario{{"pi", {0.25, 0.25, 0.5}},
                        {"observables",
                         {{"a1", {0.5, -0.5, 1.0}}, {"b1", {1.0, -1.0, 0.0}}, {"b2", {0.0, 1.0, -1.0}}}}};
    spit("classical.json", scenario.dump());
    REQUIRE(run_cli("check-classical classical.json --out classical_report.json") == 0);
    const json rep = json::parse(slurp("classical_report.json"));
    REQUIRE(rep.at("results").at("slack").get<double>() >= -1e-12);
    REQUIRE(rep.at("results").at("p21_equal_prob").get<double>() ==
            Catch::Approx(1.0).margin(1e-12));
}
