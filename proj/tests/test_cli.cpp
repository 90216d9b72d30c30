#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "eqbase/cli.hpp"

namespace fs = std::filesystem;
using eqbase::run_cli;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("eqbase_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("simulate writes byte-identical catalogs on rerun") {
    const auto d = scratch("sim");
    const auto a = (d / "a").string(), b = (d / "b").string();
    REQUIRE(cli({"simulate", "--count", "2", "--seed", "5", "--out", a}).code == 0);
    REQUIRE(cli({"simulate", "--count", "2", "--seed", "5", "--out", b, "--workers", "2"}).code == 0);
    for (const char* f : {"catalog_000000.csv", "catalog_000001.csv", "manifest.json"})
        CHECK(slurp(fs::path(a) / f) == slurp(fs::path(b) / f));
    const auto manifest = slurp(fs::path(a) / "manifest.json");
    for (const char* key : {"tool_version", "config_hash", "master_seed", "truncated"})
        CHECK(manifest.find(key) != std::string::npos);
    CHECK(slurp(fs::path(a) / "catalog_000000.csv") != slurp(fs::path(a) / "catalog_000001.csv"));
}

TEST_CASE("simulate edge cases") {
    const auto d = scratch("sim_edge");
    CHECK(cli({"simulate", "--count", "0", "--out", (d / "zero").string()}).code == 0);
    CHECK(fs::exists(d / "zero" / "manifest.json"));
    CHECK_FALSE(fs::exists(d / "zero" / "catalog_000000.csv"));

    CHECK(cli({"simulate", "--count", "1", "--mu", "0", "--K0", "0", "--out", (d / "empty").string()}).code == 0);
    CHECK(slurp(d / "empty" / "catalog_000000.csv") == "t_days,magnitude,generation\n");
}

TEST_CASE("grid writes results, heatmaps and maxima") {
    const auto d = scratch("grid");
    const auto r = cli({"grid", "--sims", "3", "--n", "1", "4", "--m-th", "4", "5", "--quiet",
                        "--out", d.string()});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(d / "grid_results.json"));
    for (const char* rule : {"poisson-half", "rate-ge-0p5", "rate-ge-1"}) {
        CHECK(fs::exists(d / (std::string("heatmap_tpr_") + rule + ".csv")));
        CHECK(fs::exists(d / (std::string("heatmap_r_") + rule + ".csv")));
    }
    CHECK(r.out.find("max TPR") != std::string::npos);
    CHECK(r.out.find("max R") != std::string::npos);

    const auto again = scratch("grid2");
    REQUIRE(cli({"grid", "--sims", "3", "--n", "1", "4", "--m-th", "4", "5", "--quiet", "--workers", "2",
                 "--out", again.string()})
                .code == 0);
    CHECK(slurp(d / "grid_results.json") == slurp(again / "grid_results.json"));
}

TEST_CASE("validation errors exit with code 2") {
    const auto d = scratch("bad");
    const auto r = cli({"grid", "--n", "0", "--sims", "1", "--out", d.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("n") != std::string::npos);
    CHECK(cli({"grid", "--no-such-flag"}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);

    std::ofstream(d / "cfg.json") << R"({"etas": {"K00": 1}})";
    const auto c = cli({"simulate", "--config", (d / "cfg.json").string(), "--out", d.string()});
    CHECK(c.code == 2);
    CHECK(c.err.find("K00") != std::string::npos);
}

TEST_CASE("runtime errors exit with code 3") {
    const auto d = scratch("rt");
    CHECK(cli({"logreg", "--in", (d / "missing.csv").string(), "--out", d.string()}).code == 3);
    std::ofstream(d / "one.csv") << "r_km,d_m,label\n1,1,1\n2,1,1\n";
    const auto r = cli({"logreg", "--in", (d / "one.csv").string(), "--out", d.string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("single class") != std::string::npos);
}

TEST_CASE("synth-grid, logreg and stress features") {
    const auto d = scratch("lr");
    REQUIRE(cli({"synth-grid", "--out", d.string(), "--slip", "0.5", "2", "--stress", "--spacing", "4"}).code == 0);
    CHECK(fs::exists(d / "cells.csv"));
    CHECK(fs::exists(d / "features.csv"));
    CHECK(fs::exists(d / "truth.json"));

    const auto r = cli({"logreg", "--in", (d / "cells.csv").string(), "--features", "rd", "--out", d.string()});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(d / "model_rd.json"));
    CHECK(fs::exists(d / "auc_report.json"));

    const auto s = cli({"logreg", "--in", (d / "features.csv").string(), "--features", "A", "stress12",
                        "--out", (d / "s").string()});
    REQUIRE(s.code == 0);
    CHECK(fs::exists(d / "s" / "model_A.json"));
    CHECK(fs::exists(d / "s" / "model_stress12.json"));
    const auto report = slurp(d / "s" / "auc_report.json");
    CHECK(report.find("\"A\"") != std::string::npos);
    CHECK(report.find("\"stress12\"") != std::string::npos);

    const auto s2 = cli({"logreg", "--in", (d / "features.csv").string(), "--features", "A", "stress12",
                         "--out", (d / "s2").string()});
    REQUIRE(s2.code == 0);
    CHECK(slurp(d / "s" / "auc_report.json") == slurp(d / "s2" / "auc_report.json"));

    std::ofstream(d / "t.csv") << "sxx,syy,szz,sxy,sxz,syz,label\n2,0,0,0,0,0,1\n0,0,0,1,0,0,0\n";
    REQUIRE(cli({"stress-features", "--in", (d / "t.csv").string(), "--out", (d / "f.csv").string()}).code == 0);
    const auto f = slurp(d / "f.csv");
    CHECK(f.find("abs_xx,abs_xy") != std::string::npos);
    CHECK(f.find("2,0,0,0,0,0,-2,0,0,0,0,0,1") != std::string::npos);
}

TEST_CASE("metrics command") {
    const auto d = scratch("metrics");
    std::ofstream(d / "pairs.csv") << "predicted,true\n1,1\n1,1\n1,1\n0,1\n0,0\n0,0\n0,0\n0,0\n1,0\n1,0\n";
    const auto r = cli({"metrics", "--in", (d / "pairs.csv").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("\"tp\": 3") != std::string::npos);
    CHECK(r.out.find("\"tpr\": 0.75") != std::string::npos);

    std::ofstream(d / "scores.csv") << "score,label\n2,1\n3,1\n0,0\n1,0\n";
    const auto s = cli({"metrics", "--in", (d / "scores.csv").string()});
    REQUIRE(s.code == 0);
    CHECK(s.out.find("\"auc\": 1.0") != std::string::npos);
}

TEST_CASE("small-sample command") {
    const auto d = scratch("ss");
    REQUIRE(cli({"small-sample", "--reps", "3", "--batch", "2", "--out", d.string()}).code == 0);
    const auto text = slurp(d / "small_sample.json");
    CHECK(text.find("undefined") != std::string::npos);
    CHECK(text.find("config_hash") != std::string::npos);
}

TEST_CASE("the installed tool returns the documented exit codes") {
    const std::string tool = EQBASE_TOOL_PATH;
    const auto d = scratch("exe");
    auto code = [](const std::string& cmd) {
        const int s = std::system((cmd + " > /dev/null 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    CHECK(code(tool + " simulate --count 1 --out " + d.string()) == 0);
    CHECK(code(tool + " grid --n 0 --sims 1 --out " + d.string()) == 2);
    CHECK(code(tool + " logreg --in " + (d / "nope.csv").string() + " --out " + d.string()) == 3);
    CHECK(code(tool + " --version") == 0);
}
