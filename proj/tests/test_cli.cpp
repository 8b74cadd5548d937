#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tnswac/serialization.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommandResult {
    int exit_code = -1;
    std::string output;
};

CommandResult run_cli(const std::string& args) {
    const std::string cmd = std::string(TNSWAC_CLI) + " " + args + " 2>/dev/null";
    std::array<char, 4096> buffer{};
    CommandResult result;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::size_t n;
    while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0)
        result.output.append(buffer.data(), n);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

fs::path temp_file(const std::string& name, const std::string& content) {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream out(p, std::ios::trunc);
    out << content;
    return p;
}

const std::string kCountsJson =
    R"({"n_P1":20,"n_P0":80,"n_N1":20,"n_N0":80,"n_C1":20,"n_C0":80})";

}  // namespace

TEST_CASE("analyze emits the pinned decision schema") {
    const auto counts = temp_file("tnswac_counts.json", kCountsJson);
    const auto res = run_cli("analyze --input " + counts.string() + " --procedure method2");
    REQUIRE(res.exit_code == 0);
    const json j = json::parse(res.output);
    REQUIRE(j.is_object());
    const std::vector<std::string> keys = {"procedure", "variant", "alpha", "lambda", "p",
                                           "reject"};
    for (const auto& k : keys) CHECK(j.contains(k));
    CHECK(j["procedure"] == "method2");
    CHECK(j["variant"] == "example_consistent");
    for (const auto& k : {"i", "ii", "iii", "i_and_iii"}) CHECK(j["p"].contains(k));
    for (const auto& k : {"i", "ii", "iii", "union_i_iii"}) CHECK(j["reject"].contains(k));
    // Balanced counts: nothing rejects.
    CHECK(j["reject"]["i"] == false);
    CHECK(j["reject"]["ii"] == false);
    CHECK(j["reject"]["iii"] == false);
    CHECK(j["p"]["i"].get<double>() > 1.0 - 1e-12);
}

TEST_CASE("analyze accepts CSV and inline JSON and never mutates input") {
    const auto csv = temp_file("tnswac_counts.csv", "n_P1,n_P0,n_N1,n_N0,n_C1,n_C0\n20,80,20,80,20,80\n");
    const auto before = fs::last_write_time(csv);
    const auto res = run_cli("analyze --input " + csv.string());
    REQUIRE(res.exit_code == 0);
    CHECK(fs::last_write_time(csv) == before);
    {
        std::ifstream in(csv);
        std::stringstream ss;
        ss << in.rdbuf();
        CHECK(ss.str() == "n_P1,n_P0,n_N1,n_N0,n_C1,n_C0\n20,80,20,80,20,80\n");
    }
    const json all = json::parse(res.output);
    REQUIRE(all.is_array());
    CHECK(all.size() == 4);

    const auto inline_res = run_cli("analyze --input '" + kCountsJson + "' --procedure standard");
    REQUIRE(inline_res.exit_code == 0);
    CHECK(json::parse(inline_res.output)["procedure"] == "standard");
}

TEST_CASE("analyze on all-zero counts succeeds with p = 1 everywhere") {
    const auto res = run_cli(
        R"(analyze --input '{"n_P1":0,"n_P0":0,"n_N1":0,"n_N0":0,"n_C1":0,"n_C0":0}' --procedure method1)");
    REQUIRE(res.exit_code == 0);
    const json j = json::parse(res.output);
    CHECK(j["p"]["i"] == 1.0);
    CHECK(j["reject"]["i"] == false);
}

TEST_CASE("exit codes distinguish argument, schema, and budget errors") {
    CHECK(run_cli("analyze --no-such-flag").exit_code == 2);
    CHECK(run_cli("frobnicate").exit_code == 2);
    CHECK(run_cli("simulate --scenario fig1-null").exit_code == 2);  // missing --seed
    CHECK(run_cli("analyze --input '{\"n_P1\":1}'").exit_code == 3);
    CHECK(run_cli("analyze --input /no/such/file.json").exit_code == 3);
    CHECK(run_cli(R"(analyze --input '{"n_P1":-3,"n_P0":0,"n_N1":0,"n_N0":0,"n_C1":0,"n_C0":0}')")
              .exit_code == 3);

    const auto counts = temp_file("tnswac_counts.json", kCountsJson);
    CHECK(run_cli("confset --input " + counts.string() + " --budget 10").exit_code == 4);
}

TEST_CASE("simulate output is byte-identical across runs") {
    const std::string args = "simulate --scenario fig1-null --replicates 40 --seed 1 --n-total 150";
    const auto a = run_cli(args);
    const auto b = run_cli(args);
    REQUIRE(a.exit_code == 0);
    CHECK(a.output == b.output);
    const json j = json::parse(a.output);
    CHECK(j["replicates"] == 40);
    CHECK(j["seed"] == 1);
    CHECK(j["procedures"].size() == 4);

    const auto tsv = run_cli(args + " --format tsv");
    REQUIRE(tsv.exit_code == 0);
    CHECK(tsv.output.rfind("procedure\tmetric\tfreq\tse\tcount\n", 0) == 0);
}

TEST_CASE("scatter emits the CSV schema deterministically") {
    const std::string args = "scatter --scenario fig1-null --replicates 20 --seed 5";
    const auto a = run_cli(args);
    REQUIRE(a.exit_code == 0);
    CHECK(a.output.rfind("replicate,p_i,p_ii,p_iii\n", 0) == 0);
    CHECK(a.output == run_cli(args).output);
    CHECK(std::count(a.output.begin(), a.output.end(), '\n') == 21);
}

TEST_CASE("confset writes projections and optional members file") {
    const auto counts = temp_file("tnswac_counts2.json",
                                  R"({"n_P1":6,"n_P0":14,"n_N1":5,"n_N0":15,"n_C1":4,"n_C0":16})");
    const fs::path members = fs::temp_directory_path() / "tnswac_members.csv";
    const auto res = run_cli("confset --input " + counts.string() +
                             " --procedure method1 --members-file " + members.string());
    REQUIRE(res.exit_code == 0);
    const json j = json::parse(res.output);
    CHECK(j["procedure"] == "method1");
    CHECK(j["stride"] == 1);
    REQUIRE(j.contains("projections"));
    for (const auto& k : {"A_PN", "A_PC", "A_NC", "theta_PN", "theta_PC", "theta_NC"})
        CHECK(j["projections"].contains(k));
    CHECK(j["members_file"] == members.string());
    std::ifstream in(members);
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header == "A_PN,A_PC,A_NC");
}

TEST_CASE("output files are written to the named path") {
    const fs::path out = fs::temp_directory_path() / "tnswac_out.json";
    fs::remove(out);
    const auto res = run_cli("analyze --input '" + kCountsJson + "' --procedure method2 --output " +
                             out.string());
    REQUIRE(res.exit_code == 0);
    REQUIRE(fs::exists(out));
    std::ifstream in(out);
    json j;
    in >> j;
    CHECK(j["procedure"] == "method2");
    // No stray temp files left behind.
    for (const auto& entry : fs::directory_iterator(fs::temp_directory_path())) {
        const auto name = entry.path().filename().string();
        CHECK(name.find("tnswac_out.json.tmp") == std::string::npos);
    }
}
