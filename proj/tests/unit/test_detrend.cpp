#include "doctest.h"
#include "helpers.hpp"

#include "marcast/detrend.hpp"
#include "marcast/errors.hpp"
#include "marcast/mar.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

using namespace marcast;

namespace {

Eigen::MatrixXd second_difference(std::size_t n) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n - 2), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < D.rows(); ++i) {
        D(i, i) = 1.0;
        D(i, i + 1) = -2.0;
        D(i, i + 2) = 1.0;
    }
    return D;
}

std::vector<double> dense_hp(const std::vector<double>& y, double lambda) {
    const std::size_t n = y.size();
    const Eigen::MatrixXd D = second_difference(n);
    const Eigen::MatrixXd A =
        Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) + lambda * D.transpose() * D;
    const Eigen::VectorXd f = A.fullPivLu().solve(Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(n)));
    return {f.data(), f.data() + f.size()};
}

/// OLS of y on (1, t), t = 1..n, via the textbook closed form.
std::vector<double> ols_line(const std::vector<double>& y) {
    const double n = static_cast<double>(y.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double t = static_cast<double>(i + 1);
        st += t;
        sy += y[i];
        stt += t * t;
        sty += t * y[i];
    }
    const double b = (n * sty - st * sy) / (n * stt - st * st);
    const double a = (sy - b * st) / n;
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = a + b * static_cast<double>(i + 1);
    return out;
}

void check_decomposition(const TrendFit& fit, std::span<const double> y) {
    REQUIRE(fit.trend.size() == y.size());
    REQUIRE(fit.cycle.size() == y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double ulp = std::numeric_limits<double>::epsilon() * std::max(std::abs(y[i]), std::abs(fit.trend[i]));
        CHECK(std::abs(fit.trend[i] + fit.cycle[i] - y[i]) <= 4.0 * ulp);
    }
}

std::vector<double> random_walk(std::size_t n, unsigned seed) {
    auto e = testing::gaussian_noise(n, seed);
    for (std::size_t i = 1; i < n; ++i) e[i] += e[i - 1];
    return e;
}

}  // namespace

TEST_SUITE("detrend") {

TEST_CASE("polynomial fits") {
    const std::size_t n = 300;
    SUBCASE("cubic data with order 4 leaves no cycle") {
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i + 1);
            y[i] = 3.0 - 0.2 * t + 0.004 * t * t - 1e-5 * t * t * t;
        }
        const TrendFit fit = fit_polynomial(y, 4);
        CHECK(testing::max_abs(fit.cycle) < 1e-8 * testing::max_abs(y));
        check_decomposition(fit, y);
        CHECK(fit.coefficients.size() == 5);
    }
    SUBCASE("order 0 is the mean") {
        const std::vector<double> y{2.0, 4.0, 9.0};
        const TrendFit fit = fit_polynomial(y, 0);
        for (double f : fit.trend) CHECK(f == doctest::Approx(5.0));
    }
    SUBCASE("cycle orthogonal to every regressor") {
        const auto y = random_walk(n, 5);
        for (int k : {1, 4, 6}) {
            const TrendFit fit = fit_polynomial(y, k);
            double scale = 0.0;
            for (double c : fit.cycle) scale += std::abs(c);
            for (int j = 0; j <= k; ++j) {
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += fit.cycle[i] * std::pow(static_cast<double>(i) / (n - 1), j);
                CHECK(std::abs(dot) < 1e-9 * scale);
            }
            double sum = 0.0;
            for (double c : fit.cycle) sum += c;
            CHECK(std::abs(sum) < 1e-9 * scale);
        }
    }
    SUBCASE("scaled coefficients reproduce the trend") {
        const auto y = random_walk(n, 6);
        const TrendFit fit = fit_polynomial(y, 6);
        for (std::size_t i = 0; i < n; i += 37)
            CHECK(eval_scaled_polynomial(fit.coefficients, static_cast<double>(i + 1), n) ==
                  doctest::Approx(fit.trend[i]).epsilon(1e-10));
    }
    SUBCASE("errors") {
        const std::vector<double> y{1.0, 2.0, 3.0};
        CHECK_THROWS_AS((void)fit_polynomial(y, 3), std::invalid_argument);
        CHECK_THROWS_AS((void)fit_polynomial(y, -1), std::invalid_argument);
    }
}

TEST_CASE("breaks and step trends") {
    const std::size_t n = 200;
    SUBCASE("no breaks on a line") {
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = 1.0 + 0.5 * static_cast<double>(i + 1);
        const std::vector<std::size_t> none;
        CHECK(testing::max_abs(fit_breaks(y, none).cycle) < 1e-9);
    }
    SUBCASE("kinked line is recovered exactly") {
        const std::vector<std::size_t> br{80, 150};
        const std::vector<double> kinks{-0.7, 1.1};
        const auto y = piecewise_linear_trend(4.0, 0.3, br, kinks, n);
        const TrendFit fit = fit_breaks(y, br);
        CHECK(testing::max_abs(fit.cycle) < 1e-9 * testing::max_abs(y));
        check_decomposition(fit, y);
    }
    SUBCASE("step function recovered by the step basis") {
        std::vector<double> y(n, 2.0);
        for (std::size_t i = 99; i < n; ++i) y[i] += 5.0;
        const std::vector<std::size_t> br{100};
        const TrendFit fit = fit_step(y, br);
        CHECK(testing::max_abs(fit.cycle) < 1e-10);
        CHECK(fit.trend[98] == doctest::Approx(2.0));
        CHECK(fit.trend[99] == doctest::Approx(7.0));
    }
    SUBCASE("jumps enter the generating trend") {
        const std::vector<std::size_t> br{10};
        const std::vector<double> kinks{0.0}, jumps{3.0};
        const auto f = piecewise_linear_trend(0.0, 0.0, br, kinks, 20, jumps);
        CHECK(f[8] == 0.0);
        CHECK(f[9] == 3.0);
        const std::vector<double> bad{1.0, 2.0};
        CHECK_THROWS_AS((void)piecewise_linear_trend(0.0, 0.0, br, kinks, 20, bad), std::invalid_argument);
    }
    SUBCASE("invalid break times") {
        const auto y = random_walk(n, 1);
        for (const std::vector<std::size_t>& br :
             {std::vector<std::size_t>{1}, std::vector<std::size_t>{50, 50}, std::vector<std::size_t>{90, 40},
              std::vector<std::size_t>{n + 1}})
            CHECK_THROWS_AS((void)fit_breaks(y, br), std::invalid_argument);
    }
}

TEST_CASE("deterministic trends are projections") {
    const auto y = random_walk(250, 8);
    for (const TrendSpec& spec : {TrendSpec::intercept(), TrendSpec::polynomial(4), TrendSpec::polynomial(6),
                                  TrendSpec::breaks({100, 200}), TrendSpec::step({120})}) {
        const TrendFit once = detrend(y, spec);
        check_decomposition(once, y);
        const TrendFit twice = detrend(once.cycle, spec);
        CHECK(testing::max_abs_diff(once.cycle, twice.cycle) < 1e-9 * testing::max_abs(once.cycle));
    }
}

TEST_CASE("intercept cycle is series minus mean") {
    const std::vector<double> y{1.0, 2.0, 6.0};
    const TrendFit fit = detrend(y, TrendSpec::intercept());
    CHECK(fit.cycle[0] == doctest::Approx(-2.0));
    CHECK(fit.cycle[2] == doctest::Approx(3.0));
}

TEST_CASE("HP filter") {
    SUBCASE("matches a dense solve of the normal equations") {
        const auto y = testing::gaussian_noise(50, 21, 3.0);
        for (double lambda : {1.0, 1600.0, 14400.0, 129600.0}) {
            const TrendFit fit = hp_filter(y, lambda);
            CHECK(testing::max_abs_diff(fit.trend, dense_hp(y, lambda)) < 1e-9);
            check_decomposition(fit, y);
        }
    }
    SUBCASE("first-order conditions hold at T = 400") {
        const auto y = random_walk(400, 9);
        const Eigen::MatrixXd D = second_difference(y.size());
        for (double lambda : {1600.0, 14400.0, 129600.0, 1e6}) {
            const TrendFit fit = hp_filter(y, lambda);
            const Eigen::Map<const Eigen::VectorXd> f(fit.trend.data(), static_cast<Eigen::Index>(y.size()));
            const Eigen::Map<const Eigen::VectorXd> yy(y.data(), static_cast<Eigen::Index>(y.size()));
            const Eigen::VectorXd resid = f + lambda * (D.transpose() * (D * f)) - yy;
            CHECK(resid.cwiseAbs().maxCoeff() < 1e-8 * yy.cwiseAbs().maxCoeff());
        }
    }
    SUBCASE("lambda zero is the identity") {
        const auto y = testing::gaussian_noise(30, 2);
        const TrendFit fit = hp_filter(y, 0.0);
        CHECK(testing::max_abs_diff(fit.trend, y) < 1e-14);
        CHECK(testing::max_abs(fit.cycle) < 1e-14);
    }
    SUBCASE("lines pass through untouched") {
        std::vector<double> y(120);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = -3.0 + 0.25 * static_cast<double>(i);
        for (double lambda : {1.0, 129600.0, 1e10}) CHECK(testing::max_abs(hp_filter(y, lambda).cycle) < 1e-9);
    }
    SUBCASE("large lambda tends to the OLS line") {
        const auto y = random_walk(400, 17);
        const auto line = ols_line(y);
        const double range = *std::max_element(y.begin(), y.end()) - *std::min_element(y.begin(), y.end());
        CHECK(testing::max_abs_diff(hp_filter(y, 1e12).trend, line) < 1e-4 * range);
    }
    SUBCASE("pentadiagonal solver against a dense solve") {
        const std::size_t n = 12;
        const auto a = testing::gaussian_noise(3 * n, 4);
        std::vector<double> d0(n), d1(n - 1), d2(n - 2);
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t i = 0; i < n; ++i) A(i, i) = d0[i] = 8.0 + std::abs(a[i]);
        for (std::size_t i = 0; i + 1 < n; ++i) A(i, i + 1) = A(i + 1, i) = d1[i] = a[n + i];
        for (std::size_t i = 0; i + 2 < n; ++i) A(i, i + 2) = A(i + 2, i) = d2[i] = a[2 * n + i];
        std::vector<double> rhs = testing::gaussian_noise(n, 5);
        const Eigen::VectorXd expect = A.lu().solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), n));
        detail::solve_pentadiagonal_spd(d0, d1, d2, rhs);
        for (std::size_t i = 0; i < n; ++i) CHECK(rhs[i] == doctest::Approx(expect(static_cast<Eigen::Index>(i))).epsilon(1e-12));
    }
    SUBCASE("errors") {
        const std::vector<double> tiny{1.0, 2.0, 3.0};
        CHECK_THROWS_AS((void)hp_filter(tiny, 10.0), std::invalid_argument);
        const auto y = testing::gaussian_noise(10, 1);
        CHECK_THROWS_AS((void)hp_filter(y, -1.0), std::invalid_argument);
    }
}

TEST_CASE("monthly lambda rules") {
    CHECK(hp_lambda_for_monthly(HpRule::BackusKehoe) == 14400.0);
    CHECK(hp_lambda_for_monthly(HpRule::RavnUhlig) == 129600.0);
    CHECK(hp_lambda(4.0, 2) == 1600.0);
    CHECK(hp_lambda(4.0, 4) == 1600.0);
}

TEST_CASE("smaller lambda absorbs more of a noncausal cycle") {
    MarModel m;
    m.psi = {0.8};
    m.dist = ErrorDist::student_t(2.0);
    double e1 = 0.0, e2 = 0.0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const auto y = simulate(m, 400, seed);
        const TrendFit a = hp_filter(y.values(), 14400.0), b = hp_filter(y.values(), 129600.0);
        for (std::size_t i = 0; i < y.size(); ++i) {
            e1 += (a.cycle[i] - y[i]) * (a.cycle[i] - y[i]);
            e2 += (b.cycle[i] - y[i]) * (b.cycle[i] - y[i]);
        }
    }
    CHECK(e1 > e2);
}

TEST_CASE("trend names") {
    CHECK(TrendSpec::polynomial(4).name() == "t4");
    CHECK(TrendSpec::hp(129600).name() == "hp129600");
    CHECK(TrendSpec::intercept().name() == "intercept");
}

}
