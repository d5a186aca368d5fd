#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "sosg/json_io.hpp"

// End-to-end checks of the command-line frontend: spawn the binary on the
// bundled data files and inspect exit codes and streams.

namespace {

const std::string kCli = SOSG_CLI_PATH;
const std::string kData = SOSG_DATA_DIR;

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    static int counter = 0;
    const std::string out_path =
        "/tmp/sosg_cli_test_" + std::to_string(getpid()) + "_" + std::to_string(counter++);
    const std::string cmd = kCli + " " + args + " > " + out_path + " 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WEXITSTATUS(rc);
    std::ifstream in(out_path);
    std::string line;
    while (std::getline(in, line)) r.out += line + "\n";
    std::remove(out_path.c_str());
    return r;
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

TEST_CASE("sos-check classifies the bundled quadratic") {
    RunResult r = run("sos-check " + kData + "/quarter_poly.json -d 1");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("SOS") == 0);
    CHECK(r.out.find("gram") != std::string::npos);
}

TEST_CASE("emitted certificates re-parse and re-verify") {
    RunResult r = run("sos-check " + kData + "/quarter_poly.json -d 1");
    REQUIRE(r.exit_code == 0);
    const size_t brace = r.out.find('{');
    REQUIRE(brace != std::string::npos);
    sosg::json j = sosg::json::parse(r.out.substr(brace));
    sosg::GramRepresentation g = sosg::gram_from_json(j.at("gram"));
    std::ifstream pf(kData + "/quarter_poly.json");
    sosg::Polynomial p = sosg::poly_from_json(sosg::json::parse(pf));
    CHECK((sosg::gram_to_poly(g) - p).max_abs_coefficient() <= 1e-6);
    CHECK(sosg::sym_min_eig(g.Q) >= -1e-7);
}

TEST_CASE("prevision prints the covariance bound") {
    RunResult lo = run("prevision " + kData + "/covariance_f.json --omega " + kData +
                       "/covariance_gambles.json --gambles " + kData +
                       "/covariance_gambles.json -d 1");
    CHECK(lo.exit_code == 0);
    CHECK(lo.out.find("status: Value") != std::string::npos);
    CHECK(lo.out.find("value: -1.000000") != std::string::npos);
    RunResult hi = run("prevision " + kData + "/covariance_f.json --omega " + kData +
                       "/covariance_gambles.json --gambles " + kData +
                       "/covariance_gambles.json -d 1 --upper");
    CHECK(hi.exit_code == 0);
    CHECK(hi.out.find("value: 1.000000") != std::string::npos);
}

TEST_CASE("piecewise prevision with the oracle cross-check") {
    RunResult r = run("prevision " + kData + "/markov_indicator.json --omega " + kData +
                      "/interval_0_10.json --gambles " + kData +
                      "/markov_gambles.json -d 2 --upper --oracle 2001");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("value: 0.400") != std::string::npos);
    CHECK(r.out.find("oracle:") != std::string::npos);
    CHECK(r.out.find("gap:") != std::string::npos);
}

TEST_CASE("asl prints the dichotomy verdict") {
    RunResult r = run("asl --gambles " + kData + "/markov_gambles.json --omega " + kData +
                      "/interval_0_10.json -d 2");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("Avoids") == 0);
}

TEST_CASE("condition computes a conditional value") {
    RunResult r = run("condition " + kData + "/covariance_f.json --omega " + kData +
                      "/interval_0_10.json --gambles " + kData +
                      "/markov_gambles.json --given " + kData + "/event_tail_5.json -d 2");
    // covariance_f is bivariate; expect a data error (exit 3)
    CHECK(r.exit_code == 3);
    RunResult ok = run("condition " + kData + "/quarter_poly.json --omega " + kData +
                       "/interval_0_10.json --gambles " + kData +
                       "/markov_gambles.json --given " + kData + "/event_tail_5.json -d 2");
    CHECK(ok.exit_code == 0);
    CHECK(ok.out.find("status: Value") != std::string::npos);
}

TEST_CASE("sweep emits one row per degree") {
    RunResult r = run("sweep " + kData + "/quarter_poly.json --omega " + kData +
                      "/interval_0_10.json --degrees 1..3");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("d,value,status") == 0);
    CHECK(count_lines(r.out) == 4);
}

TEST_CASE("options emits the default 41-row curve") {
    RunResult r = run("options " + kData + "/table1.csv");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("c,lower,upper") == 0);
    CHECK(count_lines(r.out) == 42);  // header + 41 thresholds of 2400:2800:10
}

TEST_CASE("options output is byte-stable across runs") {
    const std::string args = "options " + kData + "/table1.csv --cgrid 2500:2560:30";
    RunResult a = run(args);
    RunResult b = run(args);
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
    CHECK(count_lines(a.out) == 4);
}

TEST_CASE("usage and data errors map to distinct exit codes") {
    CHECK(run("").exit_code == 1);
    CHECK(run("prevision").exit_code == 1);
    CHECK(run("sos-check /nonexistent.json").exit_code == 3);
    CHECK(run("options /nonexistent.csv").exit_code == 3);
    // malformed degree range
    CHECK(run("sweep " + kData + "/quarter_poly.json --omega " + kData +
              "/interval_0_10.json --degrees x")
              .exit_code == 1);
}
