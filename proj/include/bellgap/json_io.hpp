#ifndef BELLGAP_JSON_IO_HPP
#define BELLGAP_JSON_IO_HPP

// JSON schemas for the library types. Matrices serialize as row-major arrays
// of [re, im] pairs.

#include <cstdio>
#include <string>

#include <json.hpp>

#include "classical.hpp"
#include "lhv.hpp"
#include "linalg.hpp"
#include "quantum.hpp"
#include "scenario.hpp"
#include "search.hpp"
#include "source.hpp"

namespace bellgap {

using nlohmann::json;

inline json matrix_to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.dim(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.dim(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

inline ComplexMatrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix: expected non-empty array");
    const int n = static_cast<int>(j.size());
    ComplexMatrix m(n);
    for (int i = 0; i < n; ++i) {
        const auto& row = j.at(i);
        if (static_cast<int>(row.size()) != n) throw std::invalid_argument("matrix: ragged rows");
        for (int c = 0; c < n; ++c) {
            const auto& e = row.at(c);
            if (e.is_number()) {
                m(i, c) = Complex(e.get<double>(), 0.0);
            } else {
                if (e.size() != 2) throw std::invalid_argument("matrix: entry must be [re, im]");
                m(i, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
            }
        }
    }
    return m;
}

inline json joint_to_json(const JointDistribution& p) {
    return json{{"grid1", p.grid1().values()}, {"grid2", p.grid2().values()}, {"probs", p.probs()}};
}

inline JointDistribution joint_from_json(const json& j) {
    return JointDistribution(OutcomeGrid(j.at("grid1").get<std::vector<double>>()),
                             OutcomeGrid(j.at("grid2").get<std::vector<double>>()),
                             j.at("probs").get<std::vector<std::vector<double>>>());
}

inline json correlation_model_to_json(const CorrelationLhvModel& m) {
    return json{{"nu", m.nu}, {"f1", {m.f1[0], m.f1[1]}}, {"f2", {m.f2[0], m.f2[1]}}};
}

inline CorrelationLhvModel correlation_model_from_json(const json& j) {
    auto f1 = j.at("f1").get<std::vector<std::vector<double>>>();
    auto f2 = j.at("f2").get<std::vector<std::vector<double>>>();
    if (f1.size() != 2 || f2.size() != 2)
        throw std::invalid_argument("LHV model: f1 and f2 need one row per setting");
    return CorrelationLhvModel(j.at("nu").get<std::vector<double>>(), {f1[0], f1[1]}, {f2[0], f2[1]});
}

inline json conditional_model_to_json(const ConditionalLhvModel& m) {
    return json{{"nu", m.nu},
                {"grid1", m.grid1.values()},
                {"grid2", m.grid2.values()},
                {"p1", {m.p1[0], m.p1[1]}},
                {"p2", {m.p2[0], m.p2[1]}}};
}

inline ConditionalLhvModel conditional_model_from_json(const json& j) {
    auto p1 = j.at("p1").get<std::vector<std::vector<std::vector<double>>>>();
    auto p2 = j.at("p2").get<std::vector<std::vector<std::vector<double>>>>();
    if (p1.size() != 2 || p2.size() != 2)
        throw std::invalid_argument("LHV model: p1 and p2 need one block per setting");
    return ConditionalLhvModel(j.at("nu").get<std::vector<double>>(),
                               OutcomeGrid(j.at("grid1").get<std::vector<double>>()),
                               OutcomeGrid(j.at("grid2").get<std::vector<double>>()),
                               {p1[0], p1[1]}, {p2[0], p2[1]});
}

inline json measurement_to_json(const ClassicalMeasurement& m) {
    return json{{"grid", m.grid.values()}, {"cond", m.cond}};
}

inline ClassicalMeasurement measurement_from_json(const json& j) {
    return ClassicalMeasurement(OutcomeGrid(j.at("grid").get<std::vector<double>>()),
                                j.at("cond").get<std::vector<std::vector<double>>>());
}

inline json source_to_json(const SourceOperator& r) {
    return json{{"matrix", matrix_to_json(r.matrix)},
                {"dims", r.shape.dims},
                {"direction", r.direction == ExtensionDirection::Right ? "right" : "left"}};
}

inline SourceOperator source_from_json(const json& j) {
    const std::string dir = j.value("direction", "right");
    if (dir != "right" && dir != "left")
        throw std::invalid_argument("source operator: direction must be \"right\" or \"left\"");
    return SourceOperator(matrix_from_json(j.at("matrix")),
                          FactorShape(j.at("dims").get<std::vector<int>>()),
                          dir == "right" ? ExtensionDirection::Right : ExtensionDirection::Left);
}

inline json density_to_json(const DensityOperator& rho) {
    return json{{"matrix", matrix_to_json(rho.matrix)}, {"dims", rho.shape.dims}};
}

inline json search_report_to_json(const SearchReport& r) {
    json j{{"best_slack", r.best_slack},
           {"a1", matrix_to_json(r.a1)},
           {"b1", matrix_to_json(r.b1)},
           {"b2", matrix_to_json(r.b2)},
           {"restarts_used", r.restarts_used},
           {"seed", r.seed}};
    if (r.state) j["state"] = matrix_to_json(*r.state);
    return j;
}

// Named state constructors accepted in CLI configs:
//   "singlet" | "werner:<d>:<phi>" | "noisy:<beta>" | "mixed:<d>"
// or a JSON object {"matrix": ..., "dims": [d1, d2]}.
inline DensityOperator state_from_spec(const json& spec) {
    if (spec.is_object())
        return DensityOperator(matrix_from_json(spec.at("matrix")),
                               FactorShape(spec.at("dims").get<std::vector<int>>()));
    if (!spec.is_string()) throw std::invalid_argument("state: expected name or {matrix, dims}");
    const std::string s = spec.get<std::string>();
    auto split = [](const std::string& str) {
        std::vector<std::string> parts;
        size_t pos = 0;
        while (true) {
            const size_t c = str.find(':', pos);
            parts.push_back(str.substr(pos, c == std::string::npos ? c : c - pos));
            if (c == std::string::npos) break;
            pos = c + 1;
        }
        return parts;
    };
    const auto parts = split(s);
    if (parts[0] == "singlet") return singlet_state();
    if (parts[0] == "werner") {
        if (parts.size() != 3) throw std::invalid_argument("state: expected werner:<d>:<phi>");
        return werner_state(std::stoi(parts[1]), std::stod(parts[2]));
    }
    if (parts[0] == "noisy") {
        if (parts.size() != 2) throw std::invalid_argument("state: expected noisy:<beta>");
        return noisy_state(singlet_vector(), std::stod(parts[1])).state;
    }
    if (parts[0] == "mixed") {
        if (parts.size() != 2) throw std::invalid_argument("state: expected mixed:<d>");
        const int d = std::stoi(parts[1]);
        return DensityOperator(ComplexMatrix::identity(d * d) * (1.0 / (d * d)), FactorShape{d, d});
    }
    throw std::invalid_argument("state: unknown name \"" + s + "\"");
}

// Observables: "spin:x|y|z", "spin:<nx>,<ny>,<nz>" (optionally "-" prefixed),
// {"matrix": ...}, or {"bloch": [a0, ax, ay, az]}.
inline ObservableOp observable_from_spec(const json& spec) {
    if (spec.is_object()) {
        if (spec.contains("matrix")) return ObservableOp(matrix_from_json(spec.at("matrix")));
        if (spec.contains("bloch")) {
            const auto b = spec.at("bloch").get<std::vector<double>>();
            if (b.size() != 4) throw std::invalid_argument("observable: bloch needs [a0, ax, ay, az]");
            ObservableParam p;
            p.d = 2;
            p.a0 = b[0];
            p.bloch = {b[1], b[2], b[3]};
            return realize(p);
        }
        throw std::invalid_argument("observable: expected matrix or bloch");
    }
    if (!spec.is_string()) throw std::invalid_argument("observable: expected name or object");
    std::string s = spec.get<std::string>();
    double sign = 1.0;
    if (!s.empty() && s[0] == '-') {
        sign = -1.0;
        s = s.substr(1);
    }
    if (s.rfind("spin:", 0) != 0) throw std::invalid_argument("observable: unknown name \"" + s + "\"");
    const std::string arg = s.substr(5);
    std::vector<double> n;
    if (arg == "x") n = {1.0, 0.0, 0.0};
    else if (arg == "y") n = {0.0, 1.0, 0.0};
    else if (arg == "z") n = {0.0, 0.0, 1.0};
    else {
        std::string rest = arg;
        while (true) {
            const size_t c = rest.find(',');
            n.push_back(std::stod(rest.substr(0, c)));
            if (c == std::string::npos) break;
            rest = rest.substr(c + 1);
        }
        if (n.size() != 3) throw std::invalid_argument("observable: spin needs three components");
    }
    const ObservableOp base = spin_observable(n);
    return ObservableOp(base.matrix * sign);
}

inline std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace bellgap

#endif
