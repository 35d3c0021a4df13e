#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

// End-to-end checks against the built binary.

namespace {

const std::string cli = SYMDIV_CLI_PATH;

struct RunResult {
    int exit_code;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    std::string out_path = "/tmp/symdiv_cli_out.txt";
    std::string cmd = cli + " " + args + " > " + out_path + " 2>/dev/null";
    int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    std::remove(out_path.c_str());
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& text) {
    std::size_t lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    return lines;
}

} // namespace

TEST_CASE("cli: sample writes CSV files and validates arguments") {
    auto r = run_cli("sample --dist wss1d:r=4 --n 100 --seed 1 --out /tmp/symdiv_s.csv");
    REQUIRE(r.exit_code == 0);
    auto text = slurp("/tmp/symdiv_s.csv");
    CHECK(text.rfind("x1\n", 0) == 0);
    CHECK(count_lines(text) == 101);

    auto stdout_run = run_cli("sample --dist disk:l=16 --n 10 --seed 2 --out -");
    REQUIRE(stdout_run.exit_code == 0);
    CHECK(stdout_run.out.rfind("x1,x2\n", 0) == 0);
    CHECK(count_lines(stdout_run.out) == 11);

    CHECK(run_cli("sample --dist wss1d:r=0 --n 10 --seed 1 --out -").exit_code == 2);
    CHECK(run_cli("sample --dist wss1d:r=4 --n 10 --seed 1 --out - --bogus").exit_code == 2);
    std::remove("/tmp/symdiv_s.csv");
}

TEST_CASE("cli: estimate emits JSON lines with exit-code contracts") {
    REQUIRE(run_cli("sample --dist disk:l=4 --n 40 --seed 3 --out /tmp/symdiv_p.csv").exit_code == 0);
    REQUIRE(run_cli("sample --dist disk:l=4 --n 40 --seed 4 --out /tmp/symdiv_q.csv").exit_code == 0);

    auto same = run_cli("estimate w1 --p /tmp/symdiv_p.csv --q /tmp/symdiv_p.csv --group rot:4");
    REQUIRE(same.exit_code == 0);
    CHECK(same.out.find("\"divergence\":\"w1\"") != std::string::npos);
    auto vat = same.out.find("\"value\":");
    REQUIRE(vat != std::string::npos);
    CHECK(std::abs(std::stod(same.out.substr(vat + 8))) < 1e-10);

    auto orbit = run_cli(
        "estimate mmd --p /tmp/symdiv_p.csv --q /tmp/symdiv_q.csv --group rot:4 "
        "--kernel gaussian:s=0.3 --path orbit");
    auto symk = run_cli(
        "estimate mmd --p /tmp/symdiv_p.csv --q /tmp/symdiv_q.csv --group rot:4 "
        "--kernel gaussian:s=0.3 --path symk");
    REQUIRE(orbit.exit_code == 0);
    REQUIRE(symk.exit_code == 0);
    auto value_of = [](const std::string& s) {
        auto at = s.find("\"value\":");
        return std::stod(s.substr(at + 8));
    };
    CHECK(value_of(orbit.out) == Catch::Approx(value_of(symk.out)).margin(1e-10));

    CHECK(run_cli("estimate falpha --p /tmp/symdiv_p.csv --q /tmp/symdiv_q.csv "
                  "--group rot:4 --alpha 1")
              .exit_code == 2);
    CHECK(run_cli("estimate w1 --p /does/not/exist.csv --q /tmp/symdiv_q.csv").exit_code == 2);

    std::remove("/tmp/symdiv_p.csv");
    std::remove("/tmp/symdiv_q.csv");
}

TEST_CASE("cli: check reports assumption and kernel constants") {
    auto trivial = run_cli("check --group trivial --kernel gaussian:s=0.5");
    REQUIRE(trivial.exit_code == 0);
    CHECK(trivial.out.find("\"C_sigma_k\":1.0") != std::string::npos);

    // boundary-radius grid: c ~ exp(-2 sin^2(pi/16)/s^2) ~ 1.9e-8, C ~ 0.25
    auto rot = run_cli(
        "check --group rot:16 --kernel gaussian:s=0.0654 --grid 64 --min-radius 1");
    REQUIRE(rot.exit_code == 0);
    auto at = rot.out.find("\"C_sigma_k\":");
    REQUIRE(at != std::string::npos);
    double cbig = std::stod(rot.out.substr(at + 13));
    CHECK(cbig == Catch::Approx(0.25).margin(1e-4));
    CHECK(rot.out.find("\"assumption_4_7_violated\":false") != std::string::npos);

    // default grid reaches down to radius 1e-6 where orbits nearly coincide:
    // the checker must expose the violation rather than average over it
    auto inner = run_cli("check --group rot:16 --kernel gaussian:s=0.0654 --grid 16");
    REQUIRE(inner.exit_code == 0);
    CHECK(inner.out.find("\"assumption_4_7_violated\":true") != std::string::npos);
    CHECK(inner.out.find("\"separation_ok\":false") != std::string::npos);

    CHECK(run_cli("check --group rot:abc").exit_code == 2);
}

TEST_CASE("cli: experiment writes the three CSVs, reruns are byte-identical") {
    std::string dir = "/tmp/symdiv_exp";
    std::string cmd = "experiment --name wss1d --orders 1 4 --sizes 32 64 --replicas 2 "
                      "--seed 7 --out-dir " + dir;
    REQUIRE(std::system(("mkdir -p " + dir).c_str()) == 0);
    REQUIRE(run_cli(cmd).exit_code == 0);
    auto raw = slurp(dir + "/wss1d_raw.csv");
    auto agg = slurp(dir + "/wss1d_aggregate.csv");
    auto ratio = slurp(dir + "/wss1d_ratio.csv");
    CHECK(raw.rfind("experiment,group_order,n,replica,seed,value\n", 0) == 0);
    CHECK(count_lines(raw) == 1 + 2 * 2 * 2);
    CHECK(agg.rfind("experiment,group_order,n,mean,stderr\n", 0) == 0);
    CHECK(ratio.rfind("experiment,order_a,order_b,n,ratio\n", 0) == 0);

    REQUIRE(run_cli(cmd).exit_code == 0);
    CHECK(slurp(dir + "/wss1d_raw.csv") == raw);
    CHECK(slurp(dir + "/wss1d_aggregate.csv") == agg);
    CHECK(slurp(dir + "/wss1d_ratio.csv") == ratio);
    std::system(("rm -rf " + dir).c_str());

    CHECK(run_cli("experiment --name bogus --out-dir /tmp").exit_code == 2);
}

TEST_CASE("cli: help and version") {
    CHECK(run_cli("--help").exit_code == 0);
    for (const char* sub : {"sample", "estimate", "check", "experiment"})
        CHECK(run_cli(std::string(sub) + " --help").exit_code == 0);
    auto v = run_cli("--version");
    CHECK(v.exit_code == 0);
    CHECK(v.out.find("0.1.0") != std::string::npos);
    CHECK(run_cli("").exit_code == 2);        // subcommand required
    CHECK(run_cli("frobnicate").exit_code == 2);
}
