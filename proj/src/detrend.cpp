#include "marcast/detrend.hpp"

#include "marcast/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace marcast {

namespace {

double scaled_time(std::size_t t, std::size_t length) {
    return length > 1 ? static_cast<double>(t - 1) / static_cast<double>(length - 1) : 0.0;
}

TrendFit finish_ols(std::span<const double> series, const Eigen::MatrixXd& X, TrendSpec spec) {
    const auto n = static_cast<Eigen::Index>(series.size());
    Eigen::Map<const Eigen::VectorXd> y(series.data(), n);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-12);
    if (qr.rank() < X.cols())
        throw NumericalError("trend regressors are rank deficient (" + spec.name() + ")");
    Eigen::VectorXd beta = qr.solve(y);
    Eigen::VectorXd fitted = X * beta;

    TrendFit fit;
    fit.observed.assign(series.begin(), series.end());
    fit.trend.resize(series.size());
    fit.cycle.resize(series.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        fit.trend[i] = fitted[i];
        fit.cycle[i] = series[i] - fitted[i];
    }
    fit.coefficients.assign(beta.data(), beta.data() + beta.size());
    fit.spec = std::move(spec);
    fit.time_origin = 1.0;
    fit.time_span = series.size() > 1 ? static_cast<double>(series.size() - 1) : 1.0;
    return fit;
}

void check_breaks(std::span<const std::size_t> break_times, std::size_t length) {
    std::size_t prev = 1;
    for (std::size_t b : break_times) {
        if (b <= prev || b > length)
            throw std::invalid_argument("break times must be increasing and strictly inside the sample");
        prev = b;
    }
}

}  // namespace

std::string TrendSpec::name() const {
    switch (method) {
        case TrendMethod::Intercept: return "intercept";
        case TrendMethod::Polynomial: return "t" + std::to_string(order);
        case TrendMethod::Breaks: return "breaks";
        case TrendMethod::Step: return "step";
        case TrendMethod::HP: {
            double r = std::round(lambda);
            return "hp" + (r == lambda ? std::to_string(static_cast<long long>(r)) : format_double(lambda));
        }
    }
    return "unknown";
}

TrendFit fit_intercept(std::span<const double> series) { return fit_polynomial(series, 0); }

TrendFit fit_polynomial(std::span<const double> series, int order) {
    if (order < 0) throw std::invalid_argument("polynomial order must be non-negative");
    const std::size_t n = series.size();
    if (static_cast<std::size_t>(order) + 1 > n)
        throw std::invalid_argument("polynomial order too large for sample length");
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), order + 1);
    for (std::size_t t = 1; t <= n; ++t) {
        double x = scaled_time(t, n), p = 1.0;
        for (int j = 0; j <= order; ++j, p *= x) X(static_cast<Eigen::Index>(t - 1), j) = p;
    }
    return finish_ols(series, X, order == 0 ? TrendSpec::intercept() : TrendSpec::polynomial(order));
}

TrendFit fit_breaks(std::span<const double> series, std::span<const std::size_t> break_times) {
    const std::size_t n = series.size();
    check_breaks(break_times, n);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(2 + break_times.size()));
    for (std::size_t t = 1; t <= n; ++t) {
        const auto row = static_cast<Eigen::Index>(t - 1);
        const double x = scaled_time(t, n);
        X(row, 0) = 1.0;
        X(row, 1) = x;
        for (std::size_t b = 0; b < break_times.size(); ++b) {
            double xb = scaled_time(break_times[b], n);
            X(row, static_cast<Eigen::Index>(2 + b)) = t >= break_times[b] ? x - xb : 0.0;
        }
    }
    return finish_ols(series, X, TrendSpec::breaks({break_times.begin(), break_times.end()}));
}

TrendFit fit_step(std::span<const double> series, std::span<const std::size_t> break_times) {
    const std::size_t n = series.size();
    check_breaks(break_times, n);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(1 + break_times.size()));
    for (std::size_t t = 1; t <= n; ++t) {
        const auto row = static_cast<Eigen::Index>(t - 1);
        X(row, 0) = 1.0;
        for (std::size_t b = 0; b < break_times.size(); ++b)
            X(row, static_cast<Eigen::Index>(1 + b)) = t >= break_times[b] ? 1.0 : 0.0;
    }
    return finish_ols(series, X, TrendSpec::step({break_times.begin(), break_times.end()}));
}

namespace detail {

void solve_pentadiagonal_spd(std::vector<double> d0, std::vector<double> d1, std::vector<double> d2,
                             std::vector<double>& rhs) {
    const std::size_t n = d0.size();
    if (rhs.size() != n || (n > 1 && d1.size() != n - 1) || (n > 2 && d2.size() != n - 2))
        throw std::invalid_argument("pentadiagonal system: inconsistent band sizes");
    // In-place LDL': d0 -> D, d1 -> L(i+1,i), d2 -> L(i+2,i).
    for (std::size_t i = 0; i < n; ++i) {
        double di = d0[i];
        if (i >= 1) di -= d1[i - 1] * d1[i - 1] * d0[i - 1];
        if (i >= 2) di -= d2[i - 2] * d2[i - 2] * d0[i - 2];
        if (!(di > 0.0)) throw NumericalError("pentadiagonal system is not positive definite");
        d0[i] = di;
        if (i + 1 < n) {
            double a = d1[i];
            if (i >= 1) a -= d2[i - 1] * d1[i - 1] * d0[i - 1];
            d1[i] = a / di;
        }
        if (i + 2 < n) d2[i] /= di;
    }
    for (std::size_t i = 1; i < n; ++i) {
        rhs[i] -= d1[i - 1] * rhs[i - 1];
        if (i >= 2) rhs[i] -= d2[i - 2] * rhs[i - 2];
    }
    for (std::size_t i = 0; i < n; ++i) rhs[i] /= d0[i];
    for (std::size_t i = n; i-- > 0;) {
        if (i + 1 < n) rhs[i] -= d1[i] * rhs[i + 1];
        if (i + 2 < n) rhs[i] -= d2[i] * rhs[i + 2];
    }
}

}  // namespace detail

TrendFit hp_filter(std::span<const double> series, double lambda) {
    const std::size_t n = series.size();
    if (n < 4) throw std::invalid_argument("hp_filter requires at least 4 observations");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("hp_filter: lambda must be >= 0");

    TrendFit fit;
    fit.observed.assign(series.begin(), series.end());
    fit.spec = TrendSpec::hp(lambda);
    fit.time_span = static_cast<double>(n - 1);
    fit.cycle.assign(n, 0.0);
    fit.trend = fit.observed;
    if (lambda == 0.0) return fit;

    const std::size_t m = n - 2;
    // Solves (I + lambda D'D) f = rhs through f = rhs - D'w, (I/lambda + DD') w = D rhs.
    auto solve = [&](std::span<const double> rhs) {
        std::vector<double> w(m);
        for (std::size_t i = 0; i < m; ++i) w[i] = rhs[i] - 2.0 * rhs[i + 1] + rhs[i + 2];
        std::vector<double> d0(m, 6.0 + 1.0 / lambda), d1(m - 1, -4.0), d2(m >= 2 ? m - 2 : 0, 1.0);
        detail::solve_pentadiagonal_spd(std::move(d0), std::move(d1), std::move(d2), w);
        std::vector<double> f(n);
        for (std::size_t j = 0; j < n; ++j) {
            double c = 0.0;
            if (j < m) c += w[j];
            if (j >= 1 && j - 1 < m) c -= 2.0 * w[j - 1];
            if (j >= 2 && j - 2 < m) c += w[j - 2];
            f[j] = rhs[j] - c;
        }
        return f;
    };

    std::vector<double> f = solve(series);
    // One step of iterative refinement on the normal equations.
    std::vector<double> dd(m), resid(n);
    for (std::size_t i = 0; i < m; ++i) dd[i] = f[i] - 2.0 * f[i + 1] + f[i + 2];
    for (std::size_t j = 0; j < n; ++j) {
        double pen = 0.0;
        if (j < m) pen += dd[j];
        if (j >= 1 && j - 1 < m) pen -= 2.0 * dd[j - 1];
        if (j >= 2 && j - 2 < m) pen += dd[j - 2];
        resid[j] = series[j] - f[j] - lambda * pen;
    }
    const std::vector<double> delta = solve(resid);
    for (std::size_t j = 0; j < n; ++j) {
        fit.trend[j] = f[j] + delta[j];
        fit.cycle[j] = series[j] - fit.trend[j];
    }
    return fit;
}

double hp_lambda(double obs_per_year, int exponent) {
    if (!(obs_per_year > 0.0)) throw std::invalid_argument("hp_lambda: observations per year must be positive");
    return std::pow(obs_per_year / 4.0, exponent) * 1600.0;
}

double hp_lambda_for_monthly(HpRule rule) {
    return hp_lambda(12.0, rule == HpRule::BackusKehoe ? 2 : 4);
}

TrendFit detrend(std::span<const double> series, const TrendSpec& spec) {
    switch (spec.method) {
        case TrendMethod::Intercept: return fit_intercept(series);
        case TrendMethod::Polynomial: return fit_polynomial(series, spec.order);
        case TrendMethod::Breaks: return fit_breaks(series, spec.break_times);
        case TrendMethod::Step: return fit_step(series, spec.break_times);
        case TrendMethod::HP: return hp_filter(series, spec.lambda);
    }
    throw std::invalid_argument("unknown trend method");
}

double eval_scaled_polynomial(std::span<const double> coefficients, double t, std::size_t length) {
    const double x = length > 1 ? (t - 1.0) / static_cast<double>(length - 1) : 0.0;
    double acc = 0.0;
    for (std::size_t j = coefficients.size(); j-- > 0;) acc = acc * x + coefficients[j];
    return acc;
}

std::vector<double> piecewise_linear_trend(double level, double slope, std::span<const std::size_t> break_times,
                                           std::span<const double> kinks, std::size_t length,
                                           std::span<const double> jumps) {
    if (break_times.size() != kinks.size()) throw std::invalid_argument("one kink per break time required");
    if (!jumps.empty() && jumps.size() != break_times.size())
        throw std::invalid_argument("jumps must be empty or one per break time");
    std::vector<double> out(length);
    for (std::size_t t = 1; t <= length; ++t) {
        double v = level + slope * static_cast<double>(t);
        for (std::size_t b = 0; b < break_times.size(); ++b)
            if (t >= break_times[b]) {
                v += kinks[b] * static_cast<double>(t - break_times[b]);
                if (!jumps.empty()) v += jumps[b];
            }
        out[t - 1] = v;
    }
    return out;
}

}  // namespace marcast
