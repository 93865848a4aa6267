#pragma once

#include "marcast/timeseries.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace marcast {

enum class TrendMethod {
    Intercept,   ///< f_t = mu
    Polynomial,  ///< f_t = a_0 + a_1 t + ... + a_k t^k
    Breaks,      ///< continuous piecewise-linear trend with slope changes at break times
    Step,        ///< f_t = mu + sum_b beta_b 1[t >= t_b]
    HP,          ///< Hodrick-Prescott filter
};

/**
 * @brief Trend family and its tuning parameters.
 *
 * Break times are 1-based observation indices t_b with 1 < t_b <= T, strictly
 * increasing. Lambda is the HP smoothing penalty (0 is the identity filter).
 */
struct TrendSpec {
    TrendMethod method = TrendMethod::Intercept;
    int order = 0;
    std::vector<std::size_t> break_times;
    double lambda = 0.0;

    [[nodiscard]] static TrendSpec intercept() { return {}; }
    [[nodiscard]] static TrendSpec polynomial(int k) { return {TrendMethod::Polynomial, k, {}, 0.0}; }
    [[nodiscard]] static TrendSpec breaks(std::vector<std::size_t> times) {
        return {TrendMethod::Breaks, 1, std::move(times), 0.0};
    }
    [[nodiscard]] static TrendSpec step(std::vector<std::size_t> times) {
        return {TrendMethod::Step, 0, std::move(times), 0.0};
    }
    [[nodiscard]] static TrendSpec hp(double lambda) { return {TrendMethod::HP, 0, {}, lambda}; }

    /// Short name used in reports: "intercept", "t4", "breaks", "step", "hp129600".
    [[nodiscard]] std::string name() const;
};

/**
 * Result of a trend extraction. `trend + cycle` reproduces the input.
 *
 * Deterministic-trend coefficients are expressed in the scaled time basis
 * x = (t - time_origin) / time_span with t = 1..T, so x runs over [0, 1].
 */
struct TrendFit {
    std::vector<double> observed;
    std::vector<double> trend;
    std::vector<double> cycle;
    TrendSpec spec;
    std::vector<double> coefficients;
    double time_origin = 1.0;
    double time_span = 1.0;
};

[[nodiscard]] TrendFit fit_intercept(std::span<const double> series);
[[nodiscard]] TrendFit fit_polynomial(std::span<const double> series, int order);
[[nodiscard]] TrendFit fit_breaks(std::span<const double> series, std::span<const std::size_t> break_times);
[[nodiscard]] TrendFit fit_step(std::span<const double> series, std::span<const std::size_t> break_times);

/**
 * @brief Hodrick-Prescott trend.
 *
 * The trend solves (I + lambda D'D) f = y exactly, D being the (T-2) x T
 * second-difference operator, including the endpoint rows. The system is
 * solved through the cycle c = y - f = D'w with (I/lambda + D D') w = D y,
 * a pentadiagonal SPD system whose conditioning does not degrade as lambda
 * grows, followed by one step of iterative refinement. Requires T >= 4 and
 * lambda >= 0.
 */
[[nodiscard]] TrendFit hp_filter(std::span<const double> series, double lambda);

enum class HpRule { BackusKehoe, RavnUhlig };

/// (obs_per_year / 4)^exponent * 1600.
[[nodiscard]] double hp_lambda(double obs_per_year, int exponent);
/// 14400 (exponent 2) or 129600 (exponent 4).
[[nodiscard]] double hp_lambda_for_monthly(HpRule rule);

[[nodiscard]] TrendFit detrend(std::span<const double> series, const TrendSpec& spec);
[[nodiscard]] inline TrendFit detrend(const TimeSeries& series, const TrendSpec& spec) {
    return detrend(series.values(), spec);
}

/// Evaluate a polynomial given in the scaled basis at observation t (1-based) of a T-length sample.
[[nodiscard]] double eval_scaled_polynomial(std::span<const double> coefficients, double t, std::size_t length);

/**
 * Piecewise-linear trend: level + slope*t + sum_b [kink_b*(t - t_b) + jump_b] 1[t >= t_b],
 * with t = 1..length. Used to build the breaks data-generating trend.
 */
[[nodiscard]] std::vector<double> piecewise_linear_trend(double level, double slope,
                                                         std::span<const std::size_t> break_times,
                                                         std::span<const double> kinks, std::size_t length,
                                                         std::span<const double> jumps = {});

namespace detail {
/// Solve a symmetric positive-definite pentadiagonal system in place (LDL').
/// d0: main diagonal (n), d1: first off-diagonal (n-1), d2: second (n-2).
void solve_pentadiagonal_spd(std::vector<double> d0, std::vector<double> d1, std::vector<double> d2,
                             std::vector<double>& rhs);
}  // namespace detail

}  // namespace marcast
