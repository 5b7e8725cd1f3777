// bellgap: build, evaluate, and audit 2x2-setting bipartite correlation
// scenarios from the command line. Every task writes a deterministic JSON
// report; sweep tasks can additionally emit CSV plot data.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <bellgap/classical.hpp>
#include <bellgap/json_io.hpp>
#include <bellgap/lhv.hpp>
#include <bellgap/quantum.hpp>
#include <bellgap/scenario.hpp>
#include <bellgap/search.hpp>
#include <bellgap/source.hpp>

using namespace bellgap;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "bellgap 1.0.0";

struct Flags {
    std::string sign = "minus";
    std::uint64_t seed = 0;
    double tol = 1e-12;
    int restarts = 64;
    int trials = 10000;
    bool fail_on_violation = false;
    std::string out;
    std::string csv;
};

SignVersion sign_of(const Flags& f) {
    if (f.sign == "minus") return SignVersion::PerfectCorrelation;
    if (f.sign == "plus") return SignVersion::PerfectAnticorrelation;
    throw CLI::ValidationError("--sign must be minus or plus");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json_file(const std::string& path) { return json::parse(read_file(path)); }

json tolerances_used(const Flags& f) {
    return json{{"condition", 1e-12}, {"entrywise", 1e-9}, {"mass", 1e-9},
                {"psd", 1e-10},       {"verdict", f.tol}};
}

// report skeleton; inputs_digest covers the task, the effective config and
// any raw input content so identical runs hash identically
json make_report(const std::string& task, const json& config, const std::string& raw_inputs,
                 const json& results) {
    json rep;
    rep["schema"] = 1;
    rep["version"] = kVersion;
    rep["task"] = task;
    rep["config"] = config;
    rep["inputs_digest"] = fnv1a_hex(task + "\n" + config.dump() + "\n" + raw_inputs);
    rep["results"] = results;
    return rep;
}

void write_report(const json& rep, const Flags& f) {
    const std::string text = rep.dump(2) + "\n";
    if (f.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(f.out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open output file: " + f.out);
        out << text;
    }
}

struct Sweep {
    double lo = 0.0, hi = 0.0;
    int points = 0;
    std::vector<double> grid() const {
        std::vector<double> g;
        for (int i = 0; i < points; ++i)
            g.push_back(points == 1 ? lo : lo + (hi - lo) * double(i) / double(points - 1));
        return g;
    }
};

Sweep parse_sweep(const std::string& spec) {
    Sweep s;
    const auto c1 = spec.find(':');
    const auto c2 = spec.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw std::runtime_error("sweep must be <lo>:<hi>:<points>");
    s.lo = std::stod(spec.substr(0, c1));
    s.hi = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
    s.points = std::stoi(spec.substr(c2 + 1));
    if (s.points < 0) throw std::runtime_error("sweep points must be >= 0");
    return s;
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open csv file: " + path);
    out << header << "\n";
    char buf[64];
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            out << (i ? "," : "") << buf;
        }
        out << "\n";
    }
}

// "--state"/"--rho" accept a builtin name or a JSON file path
json state_spec_from_cli(const std::string& s) {
    std::ifstream probe(s);
    if (probe.good()) return json::parse(read_file(s));
    return json(s);
}

std::vector<double> parse_direction(const std::string& s) {
    if (s == "x") return {1.0, 0.0, 0.0};
    if (s == "y") return {0.0, 1.0, 0.0};
    if (s == "z") return {0.0, 0.0, 1.0};
    std::vector<double> n;
    std::string rest = s;
    while (!rest.empty()) {
        const auto c = rest.find(',');
        n.push_back(std::stod(rest.substr(0, c)));
        if (c == std::string::npos) break;
        rest = rest.substr(c + 1);
    }
    if (n.size() != 3) throw std::runtime_error("direction must be x, y, z or nx,ny,nz");
    return n;
}

// ---- task handlers: results json + did-we-see-a-violation ----

struct Outcome {
    json results;
    bool violation = false;
};

Outcome run_check_lhv(const json& model, const Flags& f) {
    const SignVersion sign = sign_of(f);
    Outcome o;
    if (model.contains("p1")) {
        const ConditionalLhvModel m = conditional_model_from_json(model);
        const CorrelationLhvModel c = induced_correlation_model(m);
        const Theorem1Report t = theorem1_check(c, sign);
        const TripartiteMeasure mu = induced_mu(m);
        o.results["model_kind"] = "conditional";
        o.results["condition8"] = t.condition8;
        o.results["condition21"] = condition21_value(mu, sign);
        o.results["slack"] = t.slack;
        o.results["consistent"] = t.consistent;
        o.results["pointwise_eq12"] = pointwise_eq12_check(c, sign, 1e-9);
        const JointDistribution p21 = lhv_joint(m, 2, 1);
        o.results["perfect_correlation_prob"] =
            event_prob(p21, sign == SignVersion::PerfectCorrelation ? OutcomeEvent::Equal
                                                                    : OutcomeEvent::Opposite);
        if (p21.is_dichotomic() && lhv_joint(m, 2, 2).is_dichotomic()) {
            const auto dc = dichotomic_conditions(p21, lhv_joint(m, 2, 2), sign);
            o.results["dichotomic_condition"] = {
                {"holds", dc.holds},
                {"branch", dc.which == DichotomicBranch::None          ? "none"
                           : dc.which == DichotomicBranch::SumBound    ? "sum_bound"
                                                                       : "certain_product"}};
        }
        o.violation = t.slack < -f.tol;
    } else {
        const CorrelationLhvModel m = correlation_model_from_json(model);
        const Theorem1Report t = theorem1_check(m, sign);
        const CorrelationQuad q = correlation_quad(m);
        o.results["model_kind"] = "correlation";
        o.results["condition8"] = t.condition8;
        o.results["slack"] = t.slack;
        o.results["consistent"] = t.consistent;
        o.results["pointwise_eq12"] = pointwise_eq12_check(m, sign);
        o.results["correlations"] = {{"c11", q.c11}, {"c12", q.c12}, {"c21", *q.c21}, {"c22", q.c22}};
        o.results["chsh"] = chsh_value(q);
        o.violation = t.slack < -f.tol;
    }
    return o;
}

ClassicalMeasurement classical_measurement_from_spec(const json& spec) {
    if (spec.contains("values")) return ClassicalMeasurement::ideal(spec.at("values").get<std::vector<double>>());
    return measurement_from_json(spec);
}

Outcome run_check_classical(const json& scenario, const Flags& f) {
    const ClassicalState pi(scenario.at("pi").get<std::vector<double>>());
    Outcome o;

    std::optional<ClassicalObservable> a1, b1, b2;
    if (scenario.contains("measurements")) {
        const auto& ms = scenario.at("measurements");
        const ClassicalMeasurement mA1 = classical_measurement_from_spec(ms.at("a1"));
        const ClassicalMeasurement mB1 = classical_measurement_from_spec(ms.at("b1"));
        const ClassicalMeasurement mB2 = classical_measurement_from_spec(ms.at("b2"));
        const ClassicalMeasurement mA2 =
            ms.contains("a2") ? classical_measurement_from_spec(ms.at("a2")) : mB1;
        a1 = observable_of(mA1);
        b1 = observable_of(mB1);
        b2 = observable_of(mB2);

        const ConditionalLhvModel lhv = as_conditional_lhv(pi, mA1, mA2, mB1, mB2);
        const JointDistribution p21 = lhv_joint(lhv, 2, 1);
        o.results["p21_equal_prob"] = event_prob(p21, OutcomeEvent::Equal);
        o.results["lhv_round_trip_max_err"] = [&] {
            double err = 0.0;
            const ClassicalMeasurement* s1[2] = {&mA1, &mA2};
            const ClassicalMeasurement* s2[2] = {&mB1, &mB2};
            for (int i = 1; i <= 2; ++i)
                for (int k = 1; k <= 2; ++k)
                    err = std::max(err, std::abs(moment(lhv_joint(lhv, i, k), 1, 1) -
                                                 moment(classical_joint(pi, *s1[i - 1], *s2[k - 1]), 1, 1)));
            return err;
        }();
    } else {
        const auto& obs = scenario.at("observables");
        a1 = ClassicalObservable(obs.at("a1").get<std::vector<double>>());
        b1 = ClassicalObservable(obs.at("b1").get<std::vector<double>>());
        b2 = ClassicalObservable(obs.at("b2").get<std::vector<double>>());
        // ideal joint measurement of the same observable at both sites
        o.results["p21_equal_prob"] = event_prob(ideal_joint(pi, *b1, *b1), OutcomeEvent::Equal);
    }

    const ClassicalBellAudit audit = classical_bell_audit(pi, *a1, *b1, *b2);
    o.results["slack"] = audit.slack;
    o.results["correlations"] = {{"c11", audit.c11}, {"c12", audit.c12}, {"c22", audit.c22}};
    o.violation = audit.slack < -f.tol;
    return o;
}

Outcome run_check_quantum(const json& scenario, const Flags& f) {
    const SignVersion sign = sign_of(f);
    const DensityOperator rho = state_from_spec(scenario.at("state"));
    const ObservableOp a1 = observable_from_spec(scenario.at("a1"));
    const ObservableOp b1 = observable_from_spec(scenario.at("b1"));
    const ObservableOp b2 = observable_from_spec(scenario.at("b2"));

    Outcome o;
    const double slack = quantum_bell_slack(rho, a1, b1, b2, sign);
    o.results["slack"] = slack;
    o.results["correlations"] = {{"c11", correlation(rho, a1, b1)},
                                 {"c12", correlation(rho, a1, b2)},
                                 {"c22", correlation(rho, b1, b2)}};
    o.violation = slack < -f.tol;
    return o;
}

Outcome run_werner(int d, double phi, const std::string& direction,
                   const std::optional<Sweep>& sweep, const Flags& f) {
    Outcome o;
    auto correlation_at = [&](double p) {
        const DensityOperator w = werner_state(d, p);
        const ObservableOp spin = spin_observable(parse_direction(direction));
        return correlation(w, spin, spin);
    };
    if (sweep) {
        if (d != 2) throw std::invalid_argument("werner sweep uses spin observables; d must be 2");
        std::vector<std::vector<double>> rows;
        json points = json::array();
        for (double p : sweep->grid()) {
            const double c = correlation_at(p);
            rows.push_back({p, c});
            points.push_back({{"phi", p}, {"correlation", c}});
        }
        o.results["sweep"] = points;
        if (!f.csv.empty()) write_csv(f.csv, "phi,correlation", rows);
    } else {
        const DensityOperator w = werner_state(d, phi);
        o.results["phi"] = phi;
        o.results["d"] = d;
        if (d == 2) o.results["correlation"] = correlation_at(phi);
        o.results["projector_traces"] = {{"symmetric", d * (d + 1) / 2.0},
                                         {"antisymmetric", d * (d - 1) / 2.0}};
    }
    return o;
}

Outcome run_noisy(double beta, const std::string& direction, const std::optional<Sweep>& sweep,
                  const Flags& f) {
    Outcome o;
    const auto n = parse_direction(direction);
    if (sweep) {
        std::vector<std::vector<double>> rows;
        json points = json::array();
        for (double b : sweep->grid()) {
            const NoisyState ns = noisy_state(singlet_vector(), b);
            const ObservableOp spin = spin_observable(n);
            const double c = correlation(ns.state, spin, spin);
            const auto cond = conditional_outcome_probs(b, n);
            rows.push_back({b, c, cond.same, cond.different});
            points.push_back({{"beta", b},
                              {"correlation", c},
                              {"conditional_same", cond.same},
                              {"conditional_different", cond.different}});
        }
        o.results["sweep"] = points;
        if (!f.csv.empty()) write_csv(f.csv, "beta,correlation,conditional_same,conditional_different", rows);
    } else {
        const NoisyState ns = noisy_state(singlet_vector(), beta);
        const ObservableOp spin = spin_observable(n);
        const auto cond = conditional_outcome_probs(beta, n);
        o.results["beta"] = beta;
        o.results["gamma"] = ns.gamma;
        o.results["beta_max"] = ns.beta_max;
        o.results["correlation"] = correlation(ns.state, spin, spin);
        o.results["conditional_same"] = cond.same;
        o.results["conditional_different"] = cond.different;
    }
    return o;
}

Outcome run_source_audit(const json& input, const std::optional<json>& rho_spec, const Flags& f) {
    SourceOperator r = source_from_json(input);
    Outcome o;
    o.results["direction"] = r.direction == ExtensionDirection::Right ? "right" : "left";
    if (r.direction == ExtensionDirection::Left) {
        r = mirror_to_right(r);
        o.results["mirrored"] = true;
    }

    DensityOperator rho = [&] {
        if (rho_spec) {
            DensityOperator given = state_from_spec(*rho_spec);
            return o.results.value("mirrored", false) ? swap_sites(given) : given;
        }
        return reduced_state_of(r);
    }();

    const bool verified = verify_source(r, rho);
    o.results["verified"] = verified;

    const PositivityVerdict verdict =
        tensor_positivity(r.matrix, r.shape, f.restarts, 200, f.seed);
    o.results["tensor_positivity"] = {
        {"status", verdict.witness_found() ? "witness_found" : "no_violation_found"},
        {"min_value", verdict.min_value}};
    o.violation = verdict.witness_found();

    const SigmaReport sig = sigma_of(r);
    o.results["sigma"] = {{"psd", sig.psd}, {"min_eigenvalue", sig.min_eigenvalue}};

    if (r.equal_factors()) o.results["property39"] = property39_check(r, rho);

    if (verified) {
        Rng rng(f.seed);
        const int d1 = r.shape.dims[0], d2 = r.shape.dims[1];
        const Povm a1 = random_dichotomic_povm(rng, d1);
        const Povm a2 = random_dichotomic_povm(rng, d1);
        const Povm b1 = random_dichotomic_povm(rng, d2);
        const Povm b2 = random_dichotomic_povm(rng, d2);
        o.results["condition32"] =
            condition32(r, rho, observable_from_povm(b1), observable_from_povm(a2),
                        observable_from_povm(b2), sign_of(f));
        try {
            const TauPipelineReport tau = tau_pipeline(r, rho, a1, a2, b1, b2, sign_of(f));
            o.results["tau"] = {{"marginals_ok", tau.marginals_ok},
                                {"compatible", tau.compatible},
                                {"a5_residual", tau.a5_residual}};
        } catch (const std::runtime_error& e) {
            o.results["tau"] = {{"error", e.what()}};
        }
    }
    return o;
}

Outcome run_search(const std::string& state_spec, bool separable, bool bloch_ball, const Flags& f) {
    Outcome o;
    SearchReport rep = separable
                           ? find_separable_violation(f.seed, f.restarts)
                           : minimize_bell_slack(state_from_spec(state_spec_from_cli(state_spec)), sign_of(f),
                                                 f.restarts, f.seed, bloch_ball);
    o.results = search_report_to_json(rep);
    o.violation = rep.best_slack < -f.tol;
    return o;
}

Outcome run_scan(const std::string& state_spec, const Flags& f) {
    Outcome o;
    const ScanReport rep = never_violates_scan(state_from_spec(state_spec_from_cli(state_spec)), f.trials, f.seed);
    o.results["min_slack"] = rep.min_slack;
    o.results["trials"] = f.trials;
    o.violation = rep.min_slack < -f.tol;
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"2x2-setting bipartite correlation scenarios: LHV models, classical states, "
                 "quantum states, source operators, and the original Bell inequality"};
    app.require_subcommand(1);

    Flags flags;
    std::string input_path, rho_spec_str, state_spec = "singlet", direction = "z", sweep_str;
    int werner_d = 2;
    double werner_phi = 0.0, noisy_beta = 0.0;
    bool separable = false, bloch_ball = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--sign", flags.sign, "inequality version: minus or plus");
        cmd->add_option("--seed", flags.seed, "RNG seed");
        cmd->add_option("--tol", flags.tol, "violation verdict tolerance");
        cmd->add_flag("--fail-on-violation", flags.fail_on_violation,
                      "exit 3 when a violation is found");
        cmd->add_option("--out", flags.out, "report path (default: stdout)");
    };

    CLI::App* check_lhv = app.add_subcommand("check-lhv", "audit an LHV model");
    check_lhv->add_option("model", input_path, "model JSON")->required();
    add_common(check_lhv);

    CLI::App* check_classical = app.add_subcommand("check-classical", "audit a classical scenario");
    check_classical->add_option("scenario", input_path, "scenario JSON")->required();
    add_common(check_classical);

    CLI::App* check_quantum = app.add_subcommand("check-quantum", "audit a quantum scenario");
    check_quantum->add_option("scenario", input_path, "scenario JSON")->required();
    add_common(check_quantum);

    CLI::App* werner = app.add_subcommand("werner", "Werner state diagnostics");
    werner->add_option("--d", werner_d, "local dimension");
    werner->add_option("--phi", werner_phi, "Werner parameter");
    werner->add_option("--direction", direction, "spin direction (d=2)");
    werner->add_option("--sweep", sweep_str, "phi sweep lo:hi:points");
    werner->add_option("--csv", flags.csv, "CSV output path for sweeps");
    add_common(werner);

    CLI::App* noisy = app.add_subcommand("noisy", "noisy singlet diagnostics");
    noisy->add_option("--beta", noisy_beta, "mixing weight of the singlet");
    noisy->add_option("--direction", direction, "spin direction");
    noisy->add_option("--sweep", sweep_str, "beta sweep lo:hi:points");
    noisy->add_option("--csv", flags.csv, "CSV output path for sweeps");
    add_common(noisy);

    CLI::App* source_audit = app.add_subcommand("source-audit", "audit a source operator");
    source_audit->add_option("source", input_path, "source operator JSON")->required();
    source_audit->add_option("--rho", rho_spec_str, "state the operator should extend");
    source_audit->add_option("--restarts", flags.restarts, "tensor-positivity restarts");
    add_common(source_audit);

    CLI::App* search = app.add_subcommand("search", "minimize the Bell slack");
    search->add_option("--state", state_spec, "state name or file");
    search->add_option("--restarts", flags.restarts, "optimizer restarts");
    search->add_flag("--separable", separable, "search separable two-qubit states too");
    search->add_flag("--bloch-ball", bloch_ball, "allow non-projective qubit observables");
    add_common(search);

    CLI::App* scan = app.add_subcommand("scan", "random-observable never-violates scan");
    scan->add_option("--state", state_spec, "state name or file");
    scan->add_option("--trials", flags.trials, "number of random observable triples");
    add_common(scan);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        std::string task, raw_inputs;
        json config{{"sign", flags.sign}, {"seed", flags.seed}, {"tolerances", tolerances_used(flags)}};
        Outcome out;

        if (check_lhv->parsed()) {
            task = "check-lhv";
            raw_inputs = read_file(input_path);
            out = run_check_lhv(json::parse(raw_inputs), flags);
        } else if (check_classical->parsed()) {
            task = "check-classical";
            raw_inputs = read_file(input_path);
            out = run_check_classical(json::parse(raw_inputs), flags);
        } else if (check_quantum->parsed()) {
            task = "check-quantum";
            raw_inputs = read_file(input_path);
            out = run_check_quantum(json::parse(raw_inputs), flags);
        } else if (werner->parsed()) {
            task = "werner";
            config["d"] = werner_d;
            config["phi"] = werner_phi;
            config["direction"] = direction;
            std::optional<Sweep> sweep;
            if (!sweep_str.empty()) {
                sweep = parse_sweep(sweep_str);
                config["sweep"] = sweep_str;
            } else if (!flags.csv.empty()) {
                throw std::invalid_argument("--csv requires a sweep");
            }
            out = run_werner(werner_d, werner_phi, direction, sweep, flags);
        } else if (noisy->parsed()) {
            task = "noisy";
            config["beta"] = noisy_beta;
            config["direction"] = direction;
            std::optional<Sweep> sweep;
            if (!sweep_str.empty()) {
                sweep = parse_sweep(sweep_str);
                config["sweep"] = sweep_str;
            } else if (!flags.csv.empty()) {
                throw std::invalid_argument("--csv requires a sweep");
            }
            out = run_noisy(noisy_beta, direction, sweep, flags);
        } else if (source_audit->parsed()) {
            task = "source-audit";
            config["restarts"] = flags.restarts;
            raw_inputs = read_file(input_path);
            std::optional<json> rho_spec;
            if (!rho_spec_str.empty()) {
                rho_spec = state_spec_from_cli(rho_spec_str);
                config["rho"] = rho_spec_str;
            }
            out = run_source_audit(json::parse(raw_inputs), rho_spec, flags);
        } else if (search->parsed()) {
            task = "search";
            config["state"] = separable ? "(separable family)" : state_spec;
            config["restarts"] = flags.restarts;
            config["separable"] = separable;
            config["bloch_ball"] = bloch_ball;
            out = run_search(state_spec, separable, bloch_ball, flags);
        } else if (scan->parsed()) {
            task = "scan";
            config["state"] = state_spec;
            config["trials"] = flags.trials;
            out = run_scan(state_spec, flags);
        }

        write_report(make_report(task, config, raw_inputs, out.results), flags);
        if (out.violation && flags.fail_on_violation) return 3;
        return 0;
    } catch (const json::parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
