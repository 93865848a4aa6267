#include "doctest.h"
#include "helpers.hpp"

#include "marcast/errors.hpp"
#include "marcast/montecarlo.hpp"
#include "marcast/rng.hpp"

#include <cmath>
#include <fstream>

#ifndef MARCAST_DATA_DIR
#define MARCAST_DATA_DIR "data"
#endif

using namespace marcast;

namespace {

const std::string kTrendFile = std::string(MARCAST_DATA_DIR) + "/mc_trends_default.json";

McConfig small_config(std::size_t reps) {
    McConfig c = default_design_config(kTrendFile);
    c.replications = reps;
    return c;
}

}  // namespace

TEST_SUITE("montecarlo") {

TEST_CASE("default design") {
    const McConfig c = default_design_config(kTrendFile);
    REQUIRE(c.dgps.size() == 12);
    REQUIRE(c.detrenders.size() == 4);
    CHECK(c.T == 400);
    CHECK(c.p_max == 4);
    CHECK(c.criterion == InfoCriterion::BIC);
    CHECK(detrender_label(c.detrenders[0]) == "t4");
    CHECK(detrender_label(c.detrenders[1]) == "t6");
    CHECK(detrender_label(c.detrenders[2]) == "HP1");
    CHECK(detrender_label(c.detrenders[3]) == "HP2");
    CHECK(c.detrenders[2].lambda == 14400.0);
    CHECK(c.detrenders[3].lambda == 129600.0);
    int mar01 = 0, mar11 = 0, mar10 = 0;
    for (const auto& d : c.dgps) {
        CHECK(d.cycle.dist.dof == 2.0);
        CHECK(d.cycle.dist.kind == DistKind::StudentT);
        if (d.cycle.r() == 0 && d.cycle.s() == 1 && d.cycle.psi[0] == 0.8) ++mar01;
        if (d.cycle.r() == 1 && d.cycle.s() == 1 && d.cycle.phi[0] == 0.6 && d.cycle.psi[0] == 0.8) ++mar11;
        if (d.cycle.r() == 1 && d.cycle.s() == 0 && d.cycle.phi[0] == 0.6) ++mar10;
        CHECK_NOTHROW(d.trend.validate(c.T));
    }
    CHECK(mar01 == 4);
    CHECK(mar11 == 4);
    CHECK(mar10 == 4);
    CHECK(c.dgps[0].name == "MAR(0,1) + no trend");
    CHECK(c.dgps[10].name == "MAR(1,0) + tau6");
}

TEST_CASE("trend file parsing") {
    const McTrendFile f = load_trend_file(kTrendFile);
    CHECK(f.tau4.coefficients.size() == 5);
    CHECK(f.tau6.coefficients.size() == 7);
    CHECK(f.breaks.kind == DgpTrend::Kind::Breaks);
    CHECK_FALSE(f.description.empty());

    CHECK_THROWS_AS((void)load_trend_file("/nonexistent/trends.json"), DataError);
    CHECK_THROWS_AS((void)parse_trend_file("{not json"), DataError);
    CHECK_THROWS_AS((void)parse_trend_file(R"({"tau4": [1,2,3,4,5]})"), DataError);
    CHECK_THROWS_AS((void)parse_trend_file(
                        R"({"tau4": [1,2,3], "tau6": [1,2,3,4,5,6,7],
                            "breaks": {"level": 0, "slope": 0, "break_times": [100], "kinks": [1]}})"),
                    DataError);
    const McTrendFile ok = parse_trend_file(
        R"({"tau4": [1,0,0,0,0], "tau6": [0,0,0,0,0,0,1],
            "breaks": {"level": 1, "slope": 0.1, "break_times": [100, 300], "kinks": [0.2, -0.3]}})");
    CHECK(ok.breaks.jumps.empty());
    const auto v = ok.tau6.values(401);
    CHECK(v.front() == doctest::Approx(0.0));
    CHECK(v.back() == doctest::Approx(1.0));
}

TEST_CASE("dgp trends") {
    CHECK(DgpTrend::none().values(5) == std::vector<double>(5, 0.0));
    const DgpTrend p = DgpTrend::polynomial("q", {1.0, 2.0});
    const auto v = p.values(3);
    CHECK(v[0] == doctest::Approx(1.0));
    CHECK(v[1] == doctest::Approx(2.0));
    CHECK(v[2] == doctest::Approx(3.0));
    CHECK_THROWS_AS(DgpTrend::breaks("b", 0.0, 1.0, {10, 5}, {1.0, 1.0}).validate(20), std::invalid_argument);
    CHECK_THROWS_AS(DgpTrend::breaks("b", 0.0, 1.0, {30}, {1.0}).validate(20), std::invalid_argument);
    CHECK_THROWS_AS(DgpTrend::breaks("b", 0.0, 1.0, {5}, {1.0, 2.0}).validate(20), std::invalid_argument);
}

TEST_CASE("MSE against reproduced replications") {
    McConfig c = small_config(6);
    c.dgps = {c.dgps[0], c.dgps[8]};  // MAR(0,1) and MAR(1,0), no trend
    c.detrenders = {TrendSpec::intercept(), TrendSpec::hp(0.0)};
    const auto rows = run_mse(c);
    REQUIRE(rows.size() == 4);
    for (std::size_t d = 0; d < 2; ++d) {
        double demeaned = 0.0, identity = 0.0;
        for (std::size_t rep = 0; rep < c.replications; ++rep) {
            const auto p = simulate_path(c.dgps[d].cycle, c.T, derive_seed(c.master_seed, {d, rep}), c.burn);
            double m = 0.0, ss = 0.0;
            for (double y : p.y) {
                m += y / static_cast<double>(c.T);
                ss += y * y / static_cast<double>(c.T);
            }
            demeaned += m * m;
            identity += ss;
        }
        CHECK(rows[2 * d].mse == doctest::Approx(demeaned / 6.0).epsilon(1e-10));
        CHECK(rows[2 * d + 1].mse == doctest::Approx(identity / 6.0).epsilon(1e-10));
    }
}

TEST_CASE("identification tables are consistent") {
    McConfig c = small_config(4);
    c.dgps = {c.dgps[0], c.dgps[5], c.dgps[8]};
    c.detrenders = {TrendSpec::polynomial(4), TrendSpec::hp(129600)};
    const McReport rep = run_monte_carlo(c);
    REQUIRE(rep.ident_table.size() == 3 * 3);
    CHECK(rep.trend_labels.size() == 3);
    for (const auto& row : rep.ident_table) {
        CHECK(row.mar_wrong >= row.p_wrong - 0.001);
        CHECK(row.p_over <= row.p_wrong + 1e-12);
        for (double v : {row.p_wrong, row.mar_wrong}) {
            CHECK(v >= 0.0);
            CHECK(v <= 100.0);
        }
    }
    // s_zero applies to leads in the truth, s_positive to purely causal truth
    CHECK_FALSE(std::isnan(rep.ident_table[0].s_zero));
    CHECK(std::isnan(rep.ident_table[0].s_positive));
    CHECK(std::isnan(rep.ident_table[6].s_zero));
    CHECK_FALSE(std::isnan(rep.ident_table[6].s_positive));

    // separate entry points agree with the single pass
    const auto ident = run_identification(c);
    const auto coeff = run_coefficients(c);
    const auto mse = run_mse(c);
    REQUIRE(ident.size() == rep.ident_table.size());
    for (std::size_t i = 0; i < ident.size(); ++i) CHECK(ident[i].mar_wrong == rep.ident_table[i].mar_wrong);
    REQUIRE(coeff.size() == rep.coeff_summaries.size());
    for (std::size_t i = 0; i < coeff.size(); ++i) CHECK(coeff[i].summary.median == rep.coeff_summaries[i].summary.median);
    for (std::size_t i = 0; i < mse.size(); ++i) CHECK(mse[i].mse == rep.mse_table[i].mse);
}

TEST_CASE("results do not depend on the worker count") {
    McConfig c = small_config(3);
    c.dgps = {c.dgps[4], c.dgps[6]};
    c.threads = 1;
    const McReport a = run_monte_carlo(c);
    c.threads = 5;
    const McReport b = run_monte_carlo(c);
    REQUIRE(a.mse_table.size() == b.mse_table.size());
    for (std::size_t i = 0; i < a.mse_table.size(); ++i) CHECK(a.mse_table[i].mse == b.mse_table[i].mse);
    for (std::size_t i = 0; i < a.ident_table.size(); ++i) CHECK(a.ident_table[i].mar_wrong == b.ident_table[i].mar_wrong);
    for (std::size_t i = 0; i < a.coeff_summaries.size(); ++i)
        CHECK(a.coeff_summaries[i].summary.q3 == b.coeff_summaries[i].summary.q3);
}

TEST_CASE("five-number summaries") {
    const FiveNumber f = five_number_summary({5.0, 1.0, 3.0, 2.0, 4.0});
    CHECK(f.count == 5);
    CHECK(f.min == 1.0);
    CHECK(f.q1 == 2.0);
    CHECK(f.median == 3.0);
    CHECK(f.q3 == 4.0);
    CHECK(f.max == 5.0);
    const FiveNumber e = five_number_summary({});
    CHECK(e.count == 0);
    CHECK(std::isnan(e.median));
}

TEST_CASE("configuration checks") {
    McConfig c = small_config(1);
    c.replications = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = small_config(1);
    c.detrenders.clear();
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = small_config(1);
    c.burn = 10;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

}
