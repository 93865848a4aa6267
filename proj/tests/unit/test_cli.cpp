#include "doctest.h"
#include "helpers.hpp"

#include "marcast/cli.hpp"
#include "marcast/mar.hpp"
#include "marcast/timeseries.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

#ifndef MARCAST_DATA_DIR
#define MARCAST_DATA_DIR "data"
#endif

using namespace marcast;

namespace {

struct Run {
    int code = -1;
    std::string out, err;
};

Run run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "marcast");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Dated MAR(1,1) cycle plus a quadratic trend, written as date,value.
std::string write_sample(const testing::TempDir& dir, const std::string& name, std::uint64_t seed,
                         double phi = 0.6, double psi = 0.8) {
    MarModel m;
    if (phi != 0.0) m.phi = {phi};
    if (psi != 0.0) m.psi = {psi};
    m.dist = ErrorDist::student_t(2.0);
    const auto c = simulate(m, 403, seed);
    std::vector<double> v(c.values().begin(), c.values().end());
    std::vector<YearMonth> dates;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double t = static_cast<double>(i) / 402.0;
        v[i] += 20.0 + 30.0 * t + 25.0 * t * t;
        dates.push_back(YearMonth{1987, 6}.plus(static_cast<int>(i)));
    }
    const std::string path = dir.file(name);
    write_csv(TimeSeries(v, dates), path);
    return path;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage and help") {
    CHECK(run_cli({"--help"}).code == cli::Success);
    CHECK(run_cli({}).code == cli::Usage);
    CHECK(run_cli({"bogus"}).code == cli::Usage);
    CHECK(run_cli({"fit", "--nope"}).code == cli::Usage);
    CHECK(run_cli({"fit"}).code == cli::Usage);  // --input is required
}

TEST_CASE("detrend") {
    testing::TempDir dir("cli_detrend");
    const std::string in = write_sample(dir, "s.csv", 1);
    const std::string out = dir.file("out/hp");
    Run r = run_cli({"detrend", "--input", in, "--method", "hp", "--lambda", "129600", "-o", out});
    REQUIRE(r.code == cli::Success);
    const std::string csv = slurp(out + ".csv");
    CHECK(csv.rfind("date,observed,trend,cycle\n1987-06,", 0) == 0);
    auto j = nlohmann::json::parse(slurp(out + ".json"));
    CHECK(j["trend"]["spec"]["lambda"] == 129600.0);
    CHECK(j["input"]["length"] == 403);

    r = run_cli({"detrend", "--input", in, "--method", "poly", "--order", "6", "-o", out});
    REQUIRE(r.code == cli::Success);
    j = nlohmann::json::parse(slurp(out + ".json"));
    CHECK(j["trend"]["coefficients"].size() == 7);

    r = run_cli({"detrend", "--input", in, "--method", "breaks", "--breaks", "2008-07,2014-06", "-o", out});
    REQUIRE(r.code == cli::Success);
    j = nlohmann::json::parse(slurp(out + ".json"));
    CHECK(j["trend"]["spec"]["break_times"] == nlohmann::json::array({254, 325}));

    CHECK(run_cli({"detrend", "--input", in, "--method", "hp", "--lambda", "0", "-o", out}).code == cli::Usage);
    CHECK(run_cli({"detrend", "--input", in, "--method", "hp", "--lambda", "-5", "-o", out}).code == cli::Usage);
    CHECK(run_cli({"detrend", "--input", in, "--method", "breaks", "-o", out}).code == cli::Usage);
    CHECK(run_cli({"detrend", "--input", in, "--method", "breaks", "--breaks", "1900-01", "-o", out}).code == cli::Usage);
    CHECK(run_cli({"detrend", "--input", dir.file("missing.csv"), "-o", out}).code == cli::Data);
    CHECK(run_cli({"detrend", "--input", in, "--column", "price", "-o", out}).code == cli::Data);
}

TEST_CASE("fit") {
    testing::TempDir dir("cli_fit");
    const std::string in = write_sample(dir, "s.csv", 2);
    const std::string out = dir.file("fit");
    const Run r = run_cli({"fit", "--input", in, "--method", "hp", "-o", out});
    REQUIRE(r.code == cli::Success);
    const auto j = nlohmann::json::parse(slurp(out + ".json"));
    CHECK(j["fit"]["model"]["r"] == 1);
    CHECK(j["fit"]["model"]["s"] == 1);
    CHECK(j["pseudo_order"]["values"].size() == 5);  // default p_max 4
    CHECK(j["fit"]["std_errors"].is_object());
    CHECK(slurp(out + "_residuals.csv").rfind("t,residual,u\n", 0) == 0);

    const Run fixed = run_cli({"fit", "--input", in, "--method", "hp", "--orders", "0,1", "--no-se", "-o", out});
    REQUIRE(fixed.code == cli::Success);
    const auto k = nlohmann::json::parse(slurp(out + ".json"));
    CHECK(k["fit"]["model"]["r"] == 0);
    CHECK(k["fit"]["std_errors"].is_null());
    CHECK_FALSE(k.contains("pseudo_order"));

    // missing input and estimation failures map to different codes
    CHECK(run_cli({"fit", "--input", dir.file("none.csv")}).code == cli::Data);
}

TEST_CASE("forecast modes") {
    testing::TempDir dir("cli_fc");
    const std::string in = write_sample(dir, "s.csv", 3);
    const std::string ex = dir.file("ex"), rt = dir.file("rt");
    Run r = run_cli({"forecast", "--input", in, "--method", "hp", "--orders", "1,1", "--fit-end", "2020-11", "--periods",
                     "2020-12", "--N", "20000", "-o", ex});
    REQUIRE(r.code == cli::Success);
    r = run_cli({"forecast", "--input", in, "--method", "hp", "--orders", "1,1", "--mode", "realtime", "--periods",
                 "2020-12", "--N", "20000", "-o", rt});
    REQUIRE(r.code == cli::Success);
    // the realtime window through 2020-11 equals the expost estimation sample
    CHECK(slurp(ex + "_table.csv") == slurp(rt + "_table.csv"));
    CHECK(slurp(ex + "_density.csv") == slurp(rt + "_density.csv"));

    r = run_cli({"forecast", "--input", in, "--method", "hp", "--orders", "1,1", "--periods", "2020-01,2020-02,2020-03",
                 "--N", "20000", "-o", ex});
    REQUIRE(r.code == cli::Success);
    const std::string table = slurp(ex + "_table.csv");
    CHECK(table.rfind("period,simulations_p_decrease,simulations_p_decrease_1sd,sample_p_decrease,sample_p_decrease_1sd\n", 0) == 0);
    std::size_t lines = 0;
    for (char c : table) lines += c == '\n';
    CHECK(lines == 4);
    const auto j = nlohmann::json::parse(slurp(ex + ".json"));
    for (const auto& p : j["periods"])
        for (const auto& d : p["densities"]) CHECK(d["p_decrease_1sd"].get<double>() <= d["p_decrease"].get<double>());

    SUBCASE("errors") {
        CHECK(run_cli({"forecast", "--input", in, "--periods", "1980-01", "-o", ex}).code == cli::Usage);
        CHECK(run_cli({"forecast", "--input", in, "--fit-end", "2019-06", "--periods", "2020-01", "-o", ex}).code ==
              cli::Usage);
        CHECK(run_cli({"forecast", "--input", in, "--periods", "2020-01", "--N", "5", "-o", ex}).code == cli::Usage);
        // a purely causal model has no lead for the estimators
        CHECK(run_cli({"forecast", "--input", in, "--method", "hp", "--orders", "1,0", "--periods", "2020-01", "--N",
                       "20000", "-o", ex})
                  .code == cli::Numerical);
    }
}

TEST_CASE("mc smoke run and config precedence") {
    testing::TempDir dir("cli_mc");
    const std::string trends = std::string(MARCAST_DATA_DIR) + "/mc_trends_default.json";
    const std::string out = dir.file("mc");
    Run r = run_cli({"mc", "--trends", trends, "--reps", "1", "--dgps", "MAR(1,0) + no trend", "-o", out});
    REQUIRE(r.code == cli::Success);
    const std::string mse = slurp(out + "_mse.csv");
    CHECK(mse.rfind("dgp,t4,t6,HP1,HP2\n\"MAR(1,0) + no trend\",", 0) == 0);
    CHECK(slurp(out + "_ident.csv").find("raw") != std::string::npos);

    const std::string cfg = dir.file("cfg.json");
    std::ofstream(cfg) << R"({"seed": 99, "mc": {"reps": 2, "trends": ")" << trends
                       << R"(", "dgps": ["MAR(0,1) + no trend"], "detrenders": ["t4", "hp129600"], "output": ")" << out
                       << R"("}})";
    r = run_cli({"--config", cfg, "mc"});
    REQUIRE(r.code == cli::Success);
    auto j = nlohmann::json::parse(slurp(out + ".json"));
    CHECK(j["master_seed"] == 99);
    CHECK(j["replications"] == 2);
    CHECK(slurp(out + "_mse.csv").rfind("dgp,t4,HP2\n", 0) == 0);

    r = run_cli({"--config", cfg, "--seed", "7", "mc", "--reps", "1"});
    REQUIRE(r.code == cli::Success);
    j = nlohmann::json::parse(slurp(out + ".json"));
    CHECK(j["master_seed"] == 7);
    CHECK(j["replications"] == 1);

    std::ofstream(dir.file("bad.json")) << "{broken";
    CHECK(run_cli({"--config", dir.file("bad.json"), "mc"}).code == cli::Usage);
    CHECK(run_cli({"mc", "--trends", dir.file("none.json"), "--reps", "1"}).code == cli::Data);
    CHECK(run_cli({"mc", "--trends", trends, "--reps", "1", "--dgps", "nothing"}).code == cli::Usage);
    CHECK(run_cli({"mc", "--trends", trends, "--reps", "1", "--detrenders", "cubic"}).code == cli::Usage);
}

TEST_CASE("cobubble") {
    testing::TempDir dir("cli_cb");
    MarModel bubble;
    bubble.psi = {0.8};
    bubble.dist = ErrorDist::student_t(3.0);
    MarModel noise;
    noise.phi = {0.5};
    noise.dist = ErrorDist::student_t(3.0, 0.3);
    const auto x = simulate(bubble, 400, 1), n = simulate(noise, 400, 2);
    std::ofstream f(dir.file("pair.csv"));
    f << "x,y\n";
    for (std::size_t i = 0; i < 400; ++i) f << format_double(x[i]) << ',' << format_double(0.75 * x[i] + n[i]) << '\n';
    f.close();
    const std::string out = dir.file("cb");
    const Run r = run_cli({"cobubble", "--y", dir.file("pair.csv"), "--y-column", "y", "--x", dir.file("pair.csv"),
                           "--x-column", "x", "--lo", "0.6", "--hi", "0.9", "--step", "0.01", "-o", out});
    REQUIRE(r.code == cli::Success);
    const auto j = nlohmann::json::parse(slurp(out + ".json"));
    CHECK(j["result"]["best_delta"].get<double>() == doctest::Approx(0.75).epsilon(0.03));
    CHECK(j["result"]["null_class"] == "purely_causal");
    CHECK(slurp(out + ".csv").rfind("delta,p,r,s,loglik,selection_loglik\n0.6,", 0) == 0);

    std::ofstream(dir.file("short.csv")) << "x\n1\n2\n3\n";
    CHECK(run_cli({"cobubble", "--y", dir.file("pair.csv"), "--y-column", "y", "--x", dir.file("short.csv"),
                   "--x-column", "x", "-o", out})
              .code == cli::Data);
    CHECK(run_cli({"cobubble", "--y", dir.file("pair.csv"), "--y-column", "y", "--x", dir.file("pair.csv"),
                   "--x-column", "x", "--step", "0", "-o", out})
              .code == cli::Usage);
}

TEST_CASE("outputs are byte-identical across runs and worker counts") {
    testing::TempDir dir("cli_det");
    const std::string in = write_sample(dir, "s.csv", 4);
    const std::string trends = std::string(MARCAST_DATA_DIR) + "/mc_trends_default.json";
    std::vector<std::string> bundles;
    for (const std::string threads : {"1", "3", "1"}) {
        const std::string p = dir.file("run" + std::to_string(bundles.size()));
        REQUIRE(run_cli({"--threads", threads, "--seed", "5", "mc", "--trends", trends, "--reps", "2", "--dgps",
                         "MAR(1,1)", "-o", p})
                    .code == cli::Success);
        REQUIRE(run_cli({"--threads", threads, "--seed", "5", "forecast", "--input", in, "--method", "hp", "--orders",
                         "1,1", "--periods", "2020-02", "--N", "20000", "-o", p + "_fc"})
                    .code == cli::Success);
        std::string all;
        for (const char* s : {"_mse.csv", "_ident.csv", "_coeff.csv", ".json", "_fc.csv", "_fc_table.csv",
                              "_fc_density.csv", "_fc.json"})
            all += slurp(p + s);
        bundles.push_back(all);
    }
    CHECK(bundles[0] == bundles[1]);
    CHECK(bundles[0] == bundles[2]);
}

}
