#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = LEAFREC_CLI_PATH;

int run(const std::string& args) {
    int rc = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Workspace {
    fs::path root;
    Workspace() {
        root = fs::temp_directory_path() / "leafrec_cli_test";
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~Workspace() { fs::remove_all(root); }
    std::string p(const std::string& rel) const { return (root / rel).string(); }
};

}  // namespace

TEST_CASE("cli end to end: synth, manifest, extract, cv, report") {
    Workspace ws;

    CHECK(run("synth --out " + ws.p("data") + " --per-class 2 --seed 5") == 0);
    CHECK(fs::exists(ws.p("data") + "/class_0"));

    CHECK(run("manifest --dataset " + ws.p("data") + " --out " + ws.p("m.csv")) == 0);
    REQUIRE(fs::exists(ws.p("m.csv")));

    std::string common = " --manifest " + ws.p("m.csv") + " --features " +
                         ws.p("feats") + " --side 32";
    CHECK(run("extract" + common) == 0);
    // Second run is a pure cache hit and still succeeds.
    CHECK(run("extract" + common) == 0);

    std::string cv_args = "cv" + common + " --out " + ws.p("out") +
                          " --mode indexed --folds 1 --seed 3"
                          " --conv-epochs 1 --conv1d-epochs 1 --dense-epochs 2";
    CHECK(run(cv_args) == 0);
    REQUIRE(fs::exists(ws.p("out") + "/cv_report.csv"));
    CHECK(fs::exists(ws.p("out") + "/cv_report.svg"));
    std::string rep1 = slurp(ws.p("out") + "/cv_report.csv");
    CHECK(rep1.find("fold,") != std::string::npos);

    // Same seed, same inputs: byte-identical report.
    CHECK(run("cv" + common + " --out " + ws.p("out2") +
              " --mode indexed --folds 1 --seed 3"
              " --conv-epochs 1 --conv1d-epochs 1 --dense-epochs 2") == 0);
    CHECK(slurp(ws.p("out2") + "/cv_report.csv") == rep1);

    CHECK(run("report --report " + ws.p("out") + "/cv_report.csv") == 0);
}

TEST_CASE("cli config file supplies defaults, flags win") {
    Workspace ws;
    CHECK(run("synth --out " + ws.p("data") + " --per-class 1 --seed 2") == 0);
    CHECK(run("manifest --dataset " + ws.p("data") + " --out " + ws.p("m.csv")) == 0);

    std::ofstream(ws.p("cfg.json"))
        << "{\"manifest\": \"" << ws.p("m.csv") << "\","
        << " \"features\": \"" << ws.p("feats_cfg") << "\","
        << " \"side\": 32}";
    CHECK(run("extract --config " + ws.p("cfg.json")) == 0);
    CHECK(fs::exists(ws.p("feats_cfg")));

    // --features on the command line overrides the config value.
    CHECK(run("extract --config " + ws.p("cfg.json") + " --features " +
              ws.p("feats_flag")) == 0);
    CHECK(fs::exists(ws.p("feats_flag")));
}

TEST_CASE("cli error handling and exit codes") {
    Workspace ws;
    CHECK(run("") == 2);                     // missing subcommand
    CHECK(run("no-such-command") == 2);      // unknown subcommand
    CHECK(run("synth") == 2);                // missing required --out
    CHECK(run("manifest --dataset " + ws.p("nowhere")) == 2);
    CHECK(run("cv --manifest " + ws.p("missing.csv")) == 2);
    CHECK(run("report --report " + ws.p("missing.csv")) == 2);
}

TEST_CASE("cli extract reports partial failure") {
    Workspace ws;
    CHECK(run("synth --out " + ws.p("data") + " --per-class 1 --seed 7") == 0);
    std::ofstream(ws.p("data") + "/class_0/zz_broken.png") << "not a png";
    CHECK(run("manifest --dataset " + ws.p("data") + " --out " + ws.p("m.csv")) == 0);
    CHECK(run("extract --manifest " + ws.p("m.csv") + " --features " +
              ws.p("feats") + " --side 32") == 1);
}
