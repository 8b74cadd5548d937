#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tnswac/confidence.hpp"
#include "tnswac/simulation.hpp"

namespace tnswac {

/// Raised when an input file does not match the expected schema.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {
inline long long require_count(const nlohmann::json& j, const std::string& key) {
    if (!j.contains(key)) throw SchemaError("missing field: " + key);
    if (!j.at(key).is_number_integer())
        throw SchemaError("field " + key + " must be an integer");
    const long long v = j.at(key).get<long long>();
    if (v < 0) throw SchemaError("field " + key + " must be non-negative");
    return v;
}
}  // namespace detail

inline nlohmann::json to_json(const StudyCounts& c) {
    return {{"n_P1", c.n_P1}, {"n_P0", c.n_P0}, {"n_N1", c.n_N1},
            {"n_N0", c.n_N0}, {"n_C1", c.n_C1}, {"n_C0", c.n_C0}};
}

inline StudyCounts study_counts_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SchemaError("study counts must be a JSON object");
    StudyCounts c;
    c.n_P1 = detail::require_count(j, "n_P1");
    c.n_P0 = detail::require_count(j, "n_P0");
    c.n_N1 = detail::require_count(j, "n_N1");
    c.n_N0 = detail::require_count(j, "n_N0");
    c.n_C1 = detail::require_count(j, "n_C1");
    c.n_C0 = detail::require_count(j, "n_C0");
    return c;
}

/// One-row CSV with headers n_P1,n_P0,n_N1,n_N0,n_C1,n_C0 in any order.
inline StudyCounts study_counts_from_csv(std::istream& in) {
    std::string header_line, value_line;
    if (!std::getline(in, header_line) || !std::getline(in, value_line))
        throw SchemaError("counts CSV must have a header row and one value row");
    const auto split = [](const std::string& line) {
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
                field.pop_back();
            while (!field.empty() && field.front() == ' ') field.erase(field.begin());
            fields.push_back(field);
        }
        return fields;
    };
    const auto headers = split(header_line);
    const auto values = split(value_line);
    if (headers.size() != values.size())
        throw SchemaError("counts CSV header/value column mismatch");
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t k = 0; k < headers.size(); ++k) {
        try {
            j[headers[k]] = std::stoll(values[k]);
        } catch (const std::exception&) {
            throw SchemaError("counts CSV field " + headers[k] + " is not an integer");
        }
    }
    return study_counts_from_json(j);
}

inline nlohmann::json to_json(const PValueSet& p) {
    return {{"i", p.p_i}, {"ii", p.p_ii}, {"iii", p.p_iii}, {"i_and_iii", p.p_i_and_iii}};
}

inline nlohmann::json to_json(const DecisionSet& d, const PValueSet& p) {
    nlohmann::json j = {
        {"procedure", to_string(d.procedure)},
        {"alpha", d.alpha},
        {"lambda", d.lambda},
        {"p", to_json(p)},
        {"reject",
         {{"i", d.r_i}, {"ii", d.r_ii}, {"iii", d.r_iii}, {"union_i_iii", d.r_union}}},
    };
    if (d.procedure == Procedure::method2) j["variant"] = to_string(d.variant);
    return j;
}

inline nlohmann::json to_json(const ConfidenceSet& s) {
    nlohmann::json j = {
        {"alpha", s.alpha},
        {"procedure", to_string(s.procedure)},
        {"rule", to_string(s.rule)},
        {"stride", s.stride},
        {"empty", s.empty},
        {"counts_evaluated", s.feasible_evaluated},
        {"infeasible_skipped", s.infeasible_skipped},
    };
    if (s.procedure == Procedure::method2) j["variant"] = to_string(s.variant);
    if (!s.empty) {
        j["projections"] = {
            {"A_PN", {s.proj_PN.lo, s.proj_PN.hi}},
            {"A_PC", {s.proj_PC.lo, s.proj_PC.hi}},
            {"A_NC", {s.proj_NC.lo, s.proj_NC.hi}},
            {"theta_PN", {s.proj_PN.theta_lo(), s.proj_PN.theta_hi()}},
            {"theta_PC", {s.proj_PC.theta_lo(), s.proj_PC.theta_hi()}},
            {"theta_NC", {s.proj_NC.theta_lo(), s.proj_NC.theta_hi()}},
            {"denominators", {s.proj_PN.denom, s.proj_PC.denom, s.proj_NC.denom}},
        };
    }
    return j;
}

inline std::string members_csv(const ConfidenceSet& s) {
    std::ostringstream out;
    out << "A_PN,A_PC,A_NC\n";
    for (const auto& m : s.members) out << m.a_PN << ',' << m.a_PC << ',' << m.a_NC << '\n';
    return out.str();
}

inline nlohmann::json to_json(const MetricEstimate& m) {
    return {{"count", m.count}, {"freq", m.freq}, {"se", m.se}};
}

inline nlohmann::json to_json(const SimulationSummary& s) {
    nlohmann::json procs = nlohmann::json::array();
    for (const auto& ps : s.procedures) {
        procs.push_back({
            {"procedure", ps.choice.name()},
            {"reject_i", to_json(ps.reject_i)},
            {"reject_ii", to_json(ps.reject_ii)},
            {"reject_iii", to_json(ps.reject_iii)},
            {"reject_union", to_json(ps.reject_union)},
            {"reject_any", to_json(ps.reject_any)},
            {"reject_all", to_json(ps.reject_all)},
            {"fwer", to_json(ps.fwer)},
        });
    }
    nlohmann::json tail = nlohmann::json::array();
    for (const auto& cell : s.joint_tail)
        tail.push_back({{"p", cell.p},
                        {"q", cell.q},
                        {"joint_freq", cell.joint_freq},
                        {"excess", cell.excess},
                        {"se", cell.se}});
    return {
        {"replicates", s.replicates},
        {"seed", s.seed},
        {"alpha", s.alpha},
        {"truth", {{"h_i", s.truth.h_i}, {"h_ii", s.truth.h_ii}, {"h_iii", s.truth.h_iii}}},
        {"procedures", procs},
        {"corr_i_ii", s.corr_i_ii},
        {"corr_i_iii", s.corr_i_iii},
        {"joint_tail", tail},
        {"max_joint_excess", s.max_joint_excess},
    };
}

/// Flat TSV: one row per procedure x metric, ready for plotting.
inline std::string summary_tsv(const SimulationSummary& s) {
    std::ostringstream out;
    out << "procedure\tmetric\tfreq\tse\tcount\n";
    const auto row = [&](const std::string& proc, const std::string& metric,
                         const MetricEstimate& m) {
        out << proc << '\t' << metric << '\t' << m.freq << '\t' << m.se << '\t' << m.count << '\n';
    };
    for (const auto& ps : s.procedures) {
        const std::string name = ps.choice.name();
        row(name, "reject_i", ps.reject_i);
        row(name, "reject_ii", ps.reject_ii);
        row(name, "reject_iii", ps.reject_iii);
        row(name, "reject_union", ps.reject_union);
        row(name, "reject_any", ps.reject_any);
        row(name, "reject_all", ps.reject_all);
        row(name, "fwer", ps.fwer);
    }
    return out.str();
}

inline std::string scatter_csv(const std::vector<PValueSet>& triples) {
    std::ostringstream out;
    out << "replicate,p_i,p_ii,p_iii\n";
    out.precision(17);
    for (std::size_t r = 0; r < triples.size(); ++r)
        out << r << ',' << triples[r].p_i << ',' << triples[r].p_ii << ',' << triples[r].p_iii
            << '\n';
    return out.str();
}

}  // namespace tnswac
