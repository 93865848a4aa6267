#include "doctest.h"

#include "marcast/io.hpp"

#include <cmath>
#include <sstream>

using namespace marcast;

TEST_SUITE("io") {

TEST_CASE("numbers and cells") {
    CHECK(io::number(NAN).is_null());
    CHECK(io::number(1.5).get<double>() == 1.5);
    CHECK(io::cell(NAN).empty());
    CHECK(std::stod(io::cell(0.1)) == 0.1);
    const double third = 1.0 / 3.0;
    CHECK(std::stod(io::cell(third)) == third);
}

TEST_CASE("trend names round-trip") {
    for (const TrendSpec& s : {TrendSpec::intercept(), TrendSpec::polynomial(6), TrendSpec::hp(129600.0), TrendSpec::hp(2.5)}) {
        const TrendSpec back = io::parse_trend_name(s.name());
        CHECK(back.method == s.method);
        CHECK(back.order == s.order);
        CHECK(back.lambda == s.lambda);
    }
    CHECK(io::parse_trend_name("HP1").lambda == 14400.0);
    CHECK(io::parse_trend_name("HP2").lambda == 129600.0);
    for (const char* bad : {"t", "tx", "hp", "hp1e", "breaks", "cubic"})
        CHECK_THROWS_AS((void)io::parse_trend_name(bad), std::invalid_argument);
}

TEST_CASE("trend CSV layout") {
    const std::vector<double> y{1.0, 2.0, 4.0};
    const TrendFit fit = detrend(y, TrendSpec::intercept());
    std::ostringstream a, b;
    io::write_trend_csv(a, fit, std::nullopt);
    CHECK(a.str().rfind("t,observed,trend,cycle\n1,1,", 0) == 0);
    io::write_trend_csv(b, fit, std::vector<YearMonth>{{2020, 1}, {2020, 2}, {2020, 3}});
    CHECK(b.str().find("2020-03,4,") != std::string::npos);
    const auto j = io::to_json(fit);
    CHECK(j["spec"]["name"] == "intercept");
    CHECK(j["coefficients"].size() == 1);
}

TEST_CASE("fit JSON splits standard errors") {
    MarModel m;
    m.phi = {0.5};
    m.psi = {0.8};
    m.dist = ErrorDist::student_t(2.0);
    const auto y = simulate(m, 300, 3);
    const FittedMar f = estimate(y.values(), 1, 1, DistKind::StudentT);
    const auto j = io::to_json(f);
    CHECK(j["model"]["r"] == 1);
    CHECK(j["model"]["psi"].size() == 1);
    REQUIRE(f.std_errors.has_value());
    CHECK(j["std_errors"]["phi"].size() == 1);
    CHECK(j["std_errors"]["psi"].size() == 1);
    CHECK(j["std_errors"]["dof"].is_number());
    std::ostringstream csv;
    io::write_residuals_csv(csv, f);
    std::size_t lines = 0;
    for (char c : csv.str()) lines += c == '\n';
    CHECK(lines == 1 + f.u_path.size());
}

TEST_CASE("Monte Carlo tables quote names with commas") {
    std::vector<MseRow> rows{{"MAR(0,1) + no trend", "t4", 1.0}, {"MAR(0,1) + no trend", "HP2", 2.0}};
    std::ostringstream out;
    io::write_mse_csv(out, rows);
    CHECK(out.str() == "dgp,t4,HP2\n\"MAR(0,1) + no trend\",1,2\n");
    IdentRow r;
    r.dgp = "MAR(1,0) + tau6";
    r.column = "raw";
    r.s_positive = 12.5;
    std::ostringstream id;
    io::write_ident_csv(id, {r});
    CHECK(id.str().find("\"MAR(1,0) + tau6\",raw,0,0,0,,12.5,0\n") != std::string::npos);
}

}
