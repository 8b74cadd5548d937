// Command-line front end: analyze / confset / simulate / scatter.

#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tnswac/serialization.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitArgError = 2;
constexpr int kExitSchemaError = 3;
constexpr int kExitBudgetError = 4;

void write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open output file: " + tmp.string());
        out << content;
    }
    fs::rename(tmp, target);
}

tnswac::StudyCounts load_counts(const std::string& input) {
    if (input.empty()) throw tnswac::SchemaError("--input is required");
    // Inline JSON is accepted directly; otherwise input is a file path.
    if (!input.empty() && input.front() == '{') {
        json j = json::parse(input, nullptr, false);
        if (j.is_discarded()) throw tnswac::SchemaError("inline input is not valid JSON");
        return tnswac::study_counts_from_json(j);
    }
    std::ifstream in(input);
    if (!in) throw tnswac::SchemaError("cannot open input file: " + input);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        json j = json::parse(text, nullptr, false);
        if (j.is_discarded()) throw tnswac::SchemaError("input file is not valid JSON: " + input);
        return tnswac::study_counts_from_json(j);
    }
    std::istringstream csv(text);
    return tnswac::study_counts_from_csv(csv);
}

tnswac::Method2Variant parse_variant(const std::string& name) {
    if (name == "strict-lambda" || name == "strict_lambda")
        return tnswac::Method2Variant::strict_lambda;
    if (name == "example-consistent" || name == "example_consistent")
        return tnswac::Method2Variant::example_consistent;
    throw CLI::ValidationError("--variant", "unknown variant: " + name);
}

std::vector<tnswac::ProcedureChoice> parse_procedures(const std::string& name,
                                                      tnswac::Method2Variant variant) {
    using tnswac::Procedure;
    if (name == "all") {
        auto choices = tnswac::all_procedures();
        for (auto& c : choices)
            if (c.procedure != Procedure::method2) c.variant = variant;
        return choices;
    }
    if (name == "standard") return {{Procedure::standard, variant}};
    if (name == "method1") return {{Procedure::method1, variant}};
    if (name == "method2") return {{Procedure::method2, variant}};
    throw CLI::ValidationError("--procedure", "unknown procedure: " + name);
}

struct CommonOptions {
    double alpha = 0.05;
    std::string procedure = "all";
    std::string variant = "example-consistent";
    std::string input;
    std::string output;
    std::string format = "json";
};

int run(int argc, char** argv) {
    CLI::App app{"Inference for test-negative studies with added controls"};
    app.require_subcommand(1);

    CommonOptions opt;

    auto* analyze = app.add_subcommand(
        "analyze", "Counts -> p-values and decisions for the requested procedures");
    analyze->add_option("--input", opt.input, "Counts file (JSON or CSV) or inline JSON");
    analyze->add_option("--alpha", opt.alpha, "Familywise level")->check(CLI::Range(1e-12, 1.0));
    analyze->add_option("--procedure", opt.procedure, "standard|method1|method2|all");
    analyze->add_option("--variant", opt.variant, "strict-lambda|example-consistent");
    analyze->add_option("--output", opt.output, "Output path (default: stdout)");

    auto* confset = app.add_subcommand("confset", "Counts -> confidence set for (A_PN,A_PC,A_NC)");
    long long stride = 1;
    unsigned long long budget = 100'000'000ULL;
    std::string rule = "product";
    std::string members_file;
    std::string confset_procedure = "method2";
    confset->add_option("--input", opt.input, "Counts file (JSON or CSV) or inline JSON");
    confset->add_option("--alpha", opt.alpha, "Familywise level")->check(CLI::Range(1e-12, 1.0));
    confset->add_option("--procedure", confset_procedure, "method1|method2");
    confset->add_option("--variant", opt.variant, "strict-lambda|example-consistent");
    confset->add_option("--stride", stride, "Lattice step")->check(CLI::PositiveNumber);
    confset->add_option("--budget", budget, "Max lattice points before erroring");
    confset->add_option("--rule", rule, "product|any (exclusion rule; product is the default)");
    confset->add_option("--members-file", members_file, "Stream member triples to this CSV path");
    confset->add_option("--output", opt.output, "Output path (default: stdout)");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo FWER/power/dependence tables");
    std::string scenario = "fig1-null";
    long long replicates = 10000;
    std::uint64_t seed = 0;
    long long n_total = -1;
    unsigned threads = 1;
    simulate->add_option("--scenario", scenario, "fig1-null|fig1-alt|fig1-b|fig1-c");
    simulate->add_option("--replicates", replicates, "Replicates")->check(CLI::PositiveNumber);
    auto* seed_opt = simulate->add_option("--seed", seed, "RNG seed (required)");
    seed_opt->required();
    simulate->add_option("--alpha", opt.alpha, "Familywise level")->check(CLI::Range(1e-12, 1.0));
    simulate->add_option("--n-total", n_total, "Override study size");
    simulate->add_option("--threads", threads, "Worker threads (0 = hardware)");
    simulate->add_option("--procedure", opt.procedure, "standard|method1|method2|all");
    simulate->add_option("--variant", opt.variant, "strict-lambda|example-consistent");
    simulate->add_option("--format", opt.format, "json|tsv");
    simulate->add_option("--output", opt.output, "Output path (default: stdout)");

    auto* scatter = app.add_subcommand("scatter", "p-value triples per replicate, as CSV");
    std::string scatter_scenario = "fig1-null";
    long long scatter_replicates = 10000;
    std::uint64_t scatter_seed = 0;
    scatter->add_option("--scenario", scatter_scenario, "fig1-null|fig1-alt|fig1-b|fig1-c");
    scatter->add_option("--replicates", scatter_replicates, "Replicates")
        ->check(CLI::PositiveNumber);
    scatter->add_option("--seed", scatter_seed, "RNG seed (required)")->required();
    scatter->add_option("--threads", threads, "Worker threads (0 = hardware)");
    scatter->add_option("--output", opt.output, "Output path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitArgError;
    }

    if (analyze->parsed()) {
        const auto counts = load_counts(opt.input);
        const auto variant = parse_variant(opt.variant);
        const auto p = tnswac::compute_pvalues(tnswac::comparison_tables(counts));
        const auto choices = parse_procedures(opt.procedure, variant);
        json out;
        if (choices.size() == 1) {
            out = tnswac::to_json(
                tnswac::run_procedure(p, opt.alpha, choices[0].procedure, choices[0].variant), p);
        } else {
            out = json::array();
            for (const auto& c : choices)
                out.push_back(tnswac::to_json(
                    tnswac::run_procedure(p, opt.alpha, c.procedure, c.variant), p));
        }
        write_output(opt.output, out.dump(2) + "\n");
        return kExitOk;
    }

    if (confset->parsed()) {
        const auto counts = load_counts(opt.input);
        tnswac::ConfidenceSetOptions cso;
        cso.alpha = opt.alpha;
        if (confset_procedure == "method1")
            cso.procedure = tnswac::Procedure::method1;
        else if (confset_procedure == "method2")
            cso.procedure = tnswac::Procedure::method2;
        else
            throw CLI::ValidationError("--procedure", "confset supports method1|method2");
        cso.variant = parse_variant(opt.variant);
        if (rule == "product")
            cso.rule = tnswac::ExclusionRule::product;
        else if (rule == "any")
            cso.rule = tnswac::ExclusionRule::any_rejection;
        else
            throw CLI::ValidationError("--rule", "unknown rule: " + rule);
        cso.stride = stride;
        cso.budget = budget;
        cso.emit_members = !members_file.empty();
        const auto set = tnswac::confidence_set(counts, cso);
        json out = tnswac::to_json(set);
        if (!members_file.empty()) {
            write_output(members_file, tnswac::members_csv(set));
            out["members_file"] = members_file;
            out["members_truncated"] = set.members_truncated;
        }
        write_output(opt.output, out.dump(2) + "\n");
        return kExitOk;
    }

    if (simulate->parsed()) {
        auto sc = tnswac::scenario_by_name(scenario);
        sc.config.replicates = replicates;
        sc.config.seed = seed;
        sc.config.alpha = opt.alpha;
        sc.config.threads = threads;
        if (n_total >= 0) sc.config.n_total = n_total;
        const auto variant = parse_variant(opt.variant);
        const auto summary =
            tnswac::run_study(sc.config, sc.truth, parse_procedures(opt.procedure, variant));
        if (opt.format == "json")
            write_output(opt.output, tnswac::to_json(summary).dump(2) + "\n");
        else if (opt.format == "tsv")
            write_output(opt.output, tnswac::summary_tsv(summary));
        else
            throw CLI::ValidationError("--format", "simulate supports json|tsv");
        return kExitOk;
    }

    if (scatter->parsed()) {
        auto sc = tnswac::scenario_by_name(scatter_scenario);
        sc.config.replicates = scatter_replicates;
        sc.config.seed = scatter_seed;
        sc.config.threads = threads;
        write_output(opt.output, tnswac::scatter_csv(tnswac::pvalue_scatter(sc.config)));
        return kExitOk;
    }

    return kExitArgError;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return kExitArgError;
    } catch (const tnswac::SchemaError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitSchemaError;
    } catch (const tnswac::BudgetError& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return kExitBudgetError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return kExitArgError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
