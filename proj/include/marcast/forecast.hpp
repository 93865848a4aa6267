#pragma once

#include "marcast/mar.hpp"
#include "marcast/timeseries.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace marcast {

enum class ForecastMethod { CauchyClosedForm, Simulations, Sample };
enum class ForecastTarget { U, Y };

[[nodiscard]] std::string to_string(ForecastMethod method);

/// Predictive distribution of a forecast target evaluated on a grid.
struct PredictiveDensity {
    std::vector<double> grid;  ///< strictly increasing
    std::vector<double> pdf;   ///< empty for cdf-only estimators
    std::vector<double> cdf;   ///< nondecreasing, clipped to [0, 1]
    ForecastTarget target = ForecastTarget::Y;
    std::size_t horizon = 1;
    ForecastMethod method = ForecastMethod::Simulations;

    /// For y-targets built from a u-density: y = u + u_to_y_shift.
    double u_to_y_shift = 0.0;
    /// Simulations: effective sample size of the importance weights.
    double effective_sample_size = 0.0;
    /// Sample-based: trapezoid mass of the unnormalized density on the grid.
    double raw_mass = 1.0;
    std::vector<std::string> warnings;

    /// Linear interpolation of the cdf; throws DataError outside the grid.
    [[nodiscard]] double cdf_at(double x) const;
};

struct ForecastConfig {
    std::size_t M = 100;           ///< truncation of the future-error expansion
    std::size_t N = 1'000'000;     ///< simulated error paths
    std::size_t grid_points = 1001;
    double grid_span = 3.0;        ///< grid extends this many sample s.d. past the sample range
    std::uint64_t seed = 20200101;
    unsigned threads = 0;          ///< 0 = hardware concurrency

    void validate() const;
};

/// Companion matrix of the causal polynomial and the selector vector iota = e_1.
struct CompanionForm {
    Eigen::MatrixXd Phi;
    Eigen::VectorXd iota;

    [[nodiscard]] static CompanionForm from_phi(std::span<const double> phi);
    [[nodiscard]] double spectral_radius() const;
    /// iota' Phi^i iota for i = 0..count-1 (the causal impulse responses).
    [[nodiscard]] std::vector<double> impulse_responses(std::size_t count) const;
    /// iota' Phi^h y_vec with y_vec = (y_T, y_{T-1}, ..., y_{T-r+1}).
    [[nodiscard]] double propagate(std::span<const double> y_vec, std::size_t h) const;
};

/**
 * Information carried from the sample into a forecast, in demeaned units.
 * recent holds (y_T, y_{T-1}, ..., y_{T-r+1}); u_path is u-hat over the sample.
 */
struct ForecastState {
    std::vector<double> recent;
    double u_last = 0.0;
    std::vector<double> u_path;
    double intercept = 0.0;
    double last_y = 0.0;  ///< y_T in original units
};

[[nodiscard]] ForecastState forecast_state(const MarModel& model, std::span<const double> history);

/// [min - span*sd, max + span*sd] with `points` evenly spaced values.
[[nodiscard]] std::vector<double> default_grid(std::span<const double> history, const ForecastConfig& config);

/**
 * Joint predictive density of (u*_{T+1}, ..., u*_{T+h}) given u_T for a
 * standard-Cauchy MAR(0,1) with lead coefficient psi.
 */
[[nodiscard]] double cauchy_density(double u_last, double psi, std::span<const double> path);

/// P(u*_{T+1} <= threshold | u_T) for the standard-Cauchy MAR(0,1), by adaptive quadrature.
[[nodiscard]] double cauchy_one_step_probs(double u_last, double psi, double threshold);

/// Local maxima of the one-step Cauchy predictive density, ascending.
[[nodiscard]] std::vector<double> cauchy_one_step_modes(double u_last, double psi);

/// Closed-form one-step density and cdf of u*_{T+1} on a grid.
[[nodiscard]] PredictiveDensity cauchy_forecast(double u_last, double psi, std::span<const double> grid);

/**
 * @brief Simulations-based predictive cdf of y*_{T+h} for a MAR(r,1).
 *
 * Draws N paths of M future errors from the fitted error law and forms the
 * self-normalized importance estimate of P(y*_{T+h} <= x | F_T) with weights
 * g(u_T - sum_i psi^i eps*_{T+i}). Paths are generated in fixed-size chunks
 * with per-chunk seeds, so the output does not depend on `threads`.
 * Adds a warning when the effective sample size falls below 50.
 */
[[nodiscard]] PredictiveDensity simulations_forecast(const MarModel& model, const ForecastState& state,
                                                     std::size_t h, const ForecastConfig& config,
                                                     std::span<const double> grid);
[[nodiscard]] PredictiveDensity simulations_forecast(const MarModel& model, const TimeSeries& history,
                                                     std::size_t h, const ForecastConfig& config);

/**
 * @brief Sample-based one-step predictive density for a MAR(r,1).
 *
 * density(u*) ~ g(u_T - psi u*) * sum_i g(u* - psi u_i) / sum_i g(u_T - psi u_i),
 * normalized by trapezoid integration over the grid, and carried to
 * y*_{T+1} = sum_i phi_i y_{T+1-i} + u* by a shift.
 */
[[nodiscard]] PredictiveDensity sample_forecast(const MarModel& model, const ForecastState& state,
                                                std::span<const double> grid);
[[nodiscard]] PredictiveDensity sample_forecast(const MarModel& model, const TimeSeries& history,
                                                const ForecastConfig& config);

/// Sample-based joint density of an explicit future u-path (no marginalization).
[[nodiscard]] double sample_joint_density(const MarModel& model, const ForecastState& state,
                                          std::span<const double> u_future);

struct EventProbabilities {
    double p_decrease = 0.0;      ///< P(y*_{T+1} <= y_T)
    double p_decrease_1sd = 0.0;  ///< P(y*_{T+1} <= y_T - sd)
};

/// Event probabilities from a y-target density. last_y must lie on the grid;
/// a threshold below the grid gives probability 0.
[[nodiscard]] EventProbabilities prob_events(const PredictiveDensity& density, double last_y, double sd);

/// Sample quantile with linear interpolation between order statistics.
[[nodiscard]] double sample_quantile(std::span<const double> values, double q);

}  // namespace marcast
