#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "cohomflow/superpotential.hpp"
#include "cohomflow/weight_config.hpp"

using namespace cohomflow;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(COHOMFLOW_CLI_PATH) + " " + args + " 2>/dev/null";
    RunResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (size_t n = fread(buf, 1, sizeof buf, pipe)) res.out.append(buf, n);
    int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

fs::path temp_file(const std::string& name, const std::string& content) {
    fs::path p = fs::temp_directory_path() / ("cohomflow_test_" + name);
    std::ofstream(p) << content;
    return p;
}

std::string case5_config_json(const std::string& a_y = "-1/2", const std::string& energy = "1") {
    nlohmann::json j = {
        {"r", 3},
        {"dims", {1, 2, 2}},
        {"weights",
         {{{"vec", {0, -1, 0}}, {"A", "4"}},
          {{"vec", {0, 0, -1}}, {"A", "4"}},
          {{"vec", {1, -2, 0}}, {"A", a_y}},
          {{"vec", {1, 0, -2}}, {"A", "-1/2"}}}},
        {"E", energy},
        {"lambda", "0"}};
    return j.dump();
}

std::string case5_unit_ansatz_json() {
    Configuration cfg = *find_catalog_entry("bbc-case5");
    cfg.energy = Rat(1);
    auto out = solve_coefficients(cfg, case5_exponent_set(cfg));
    REQUIRE(out.ansatz);
    return ansatz_to_json(*out.ansatz).dump();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("catalog lists the builtin configurations") {
    auto res = run_cli("catalog");
    CHECK(res.exit_code == 0);
    auto j = nlohmann::json::parse(res.out);
    CHECK(j.at("entries").size() == 6);
    CHECK(j.contains("manifest"));
    bool has_case5 = false;
    for (const auto& e : j.at("entries"))
        if (e.value("name", "") == "bbc-case5") has_case5 = true;
    CHECK(has_case5);
}

TEST_CASE("verify accepts the solved ansatz and rejects perturbed data") {
    auto cfg_ok = temp_file("cfg_ok.json", case5_config_json());
    auto ansatz = temp_file("ansatz.json", case5_unit_ansatz_json());
    auto ok = run_cli("verify --config " + cfg_ok.string() + " --ansatz " + ansatz.string());
    CHECK(ok.exit_code == 0);
    CHECK(nlohmann::json::parse(ok.out).at("satisfied").get<bool>());

    auto cfg_bad = temp_file("cfg_bad.json", case5_config_json("-1/4"));
    auto bad = run_cli("verify --config " + cfg_bad.string() + " --ansatz " + ansatz.string());
    CHECK(bad.exit_code == 1);
    auto jb = nlohmann::json::parse(bad.out);
    CHECK_FALSE(jb.at("satisfied").get<bool>());
    CHECK_FALSE(jb.at("violated_b").empty());
}

TEST_CASE("schema violations exit with code 2") {
    auto cfg = temp_file("cfg_schema.json", case5_config_json("1/0"));
    auto ansatz = temp_file("ansatz2.json", case5_unit_ansatz_json());
    auto res = run_cli("verify --config " + cfg.string() + " --ansatz " + ansatz.string());
    CHECK(res.exit_code == 2);
    auto res2 = run_cli("verify --config /nonexistent.json --ansatz " + ansatz.string());
    CHECK(res2.exit_code == 2);
}

TEST_CASE("classify reproduces the warped-product result deterministically") {
    auto r1 = run_cli("classify --entry warped-2x2 --threads 1");
    auto r4 = run_cli("classify --entry warped-2x2 --threads 4");
    CHECK(r1.exit_code == 0);
    auto j1 = nlohmann::json::parse(r1.out);
    auto j4 = nlohmann::json::parse(r4.out);
    auto strip = [](nlohmann::json j) {
        j.erase("manifest");
        return j;
    };
    // The entire payload is thread-count independent.
    CHECK(strip(j1) == strip(j4));
    CHECK(j1.at("found").size() == 1);
    // Idempotence: identical runs give identical payloads modulo wall time.
    auto r1b = run_cli("classify --entry warped-2x2 --threads 1");
    auto j1b = nlohmann::json::parse(r1b.out);
    CHECK(strip(j1) == strip(j1b));
}

TEST_CASE("classify finds two exponent sets on the d=(1,2,2) entry") {
    auto res = run_cli("classify --entry bbc-case5");
    CHECK(res.exit_code == 0);
    CHECK(nlohmann::json::parse(res.out).at("found").size() == 2);
}

TEST_CASE("an exhausted search budget flags a partial result with exit 3") {
    auto res = run_cli("classify --entry warped-2x2 --budget 3 --threads 1");
    CHECK(res.exit_code == 3);
    CHECK(nlohmann::json::parse(res.out).at("partial").get<bool>());
}

TEST_CASE("integrating a verified ansatz file over a short window") {
    Configuration cfg = *find_catalog_entry("bryant5");
    auto out = solve_coefficients(cfg, {{Rat(2), Rat(-1)}, {Rat(1), Rat(-1)}});
    REQUIRE(out.ansatz);
    auto fp = temp_file("b5_ansatz.json", ansatz_to_json(*out.ansatz).dump());
    auto res = run_cli("integrate --entry bryant5 --ansatz " + fp.string() + " --t-max 0.5");
    CHECK(res.exit_code == 0);
    CHECK(res.out.substr(0, res.out.find('\n')) == "t,q1,u,H");
}

TEST_CASE("non-steady constant-coefficient classify is empty") {
    auto res = run_cli("classify --entry bryant-n1 --mode constant");
    CHECK(res.exit_code == 0);
    CHECK(nlohmann::json::parse(res.out).at("found").empty());
    auto poly = run_cli("classify --entry bryant-n1 --mode poly");
    CHECK(nlohmann::json::parse(poly.out).at("found").size() == 1);
}

TEST_CASE("integrate emits the trajectory and closed-form deviations") {
    fs::path out = fs::temp_directory_path() / "cohomflow_test_traj.csv";
    auto res = run_cli("integrate --solution case5 --entry bbc-case5 --s0 1e-6 --s-max 10 "
                       "--tol 1e-11 --check-closed-form --out " + out.string());
    CHECK(res.exit_code == 0);
    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,q1,q2,q3,u,dev_beta1,dev_beta2,dev_u");
    std::ifstream min(out.string() + ".manifest.json");
    nlohmann::json manifest;
    min >> manifest;
    CHECK(manifest.at("parameters").at("max_closed_form_deviation").get<double>() < 1e-8);
}

TEST_CASE("integrate in the radial coordinate reports tolerance-driven deviations") {
    fs::path out = fs::temp_directory_path() / "cohomflow_test_traj_t.csv";
    auto coarse = run_cli("integrate --solution case5 --coordinate t --s0 1e-3 --s-max 5 "
                          "--tol 1e-5 --check-closed-form --out " + out.string());
    CHECK(coarse.exit_code == 0);
    auto read_dev = [&]() {
        std::ifstream min(out.string() + ".manifest.json");
        nlohmann::json manifest;
        min >> manifest;
        return manifest.at("parameters").at("max_closed_form_deviation").get<double>();
    };
    const double dev_coarse = read_dev();
    auto fine = run_cli("integrate --solution case5 --coordinate t --s0 1e-3 --s-max 5 "
                        "--tol 5e-6 --check-closed-form --out " + out.string());
    CHECK(fine.exit_code == 0);
    CHECK(read_dev() < dev_coarse);
}

TEST_CASE("integrate runs the two-dimensional family to t = 10") {
    auto res = run_cli("integrate --solution bryant-n1 --a 1 --lambda 0 --E 2 --t-max 10");
    CHECK(res.exit_code == 0);
    CHECK(res.out.substr(0, res.out.find('\n')) == "t,h,u");
    const bool reached_end = res.out.find("\n10,") != std::string::npos ||
                             res.out.find("\n10.") != std::string::npos;
    CHECK(reached_end);
}

TEST_CASE("check-gfi confirms the difference integral") {
    nlohmann::json f;
    f["terms"] = nlohmann::json::array();
    f["terms"].push_back(
        {{"exponent", {"-3", "1"}},
         {"coeff",
          {{{"monomial", {2, 0, 0, 0}}, {"value", "-1/4"}},
           {{"monomial", {1, 1, 0, 0}}, {"value", "-1"}},
           {{"monomial", {0, 2, 0, 0}}, {"value", "-3/4"}}}}});
    f["terms"].push_back(
        {{"exponent", {"1", "-1"}},
         {"coeff", {{{"monomial", {0, 0, 0, 0}}, {"value", "-1"}}}}});
    f["terms"].push_back(
        {{"exponent", {"0", "-1"}},
         {"coeff", {{{"monomial", {0, 0, 0, 0}}, {"value", "-12"}}}}});
    auto fp = temp_file("gfi.json", f.dump());
    auto res = run_cli("check-gfi --entry bryant5 --f " + fp.string());
    CHECK(res.exit_code == 0);
    CHECK(nlohmann::json::parse(res.out).at("is_gfi").get<bool>());

    // A bare momentum fails with exit 1.
    nlohmann::json g;
    g["terms"] = nlohmann::json::array();
    g["terms"].push_back({{"exponent", {"0", "0"}},
                          {"coeff", {{{"monomial", {1, 0, 0, 0}}, {"value", "1"}}}}});
    auto gp = temp_file("gfi_bad.json", g.dump());
    auto bad = run_cli("check-gfi --entry bryant5 --f " + gp.string());
    CHECK(bad.exit_code == 1);
}

TEST_CASE("smoothness gate passes at A=-1/2 and fails at A=-1") {
    auto ok = run_cli("smoothness --E 8 --A -0.5");
    CHECK(ok.exit_code == 0);
    CHECK(nlohmann::json::parse(ok.out).at("all_pass").get<bool>());
    auto bad = run_cli("smoothness --E 8 --A -1");
    CHECK(bad.exit_code == 1);
    CHECK_FALSE(nlohmann::json::parse(bad.out).at("all_pass").get<bool>());
}

}  // TEST_SUITE
