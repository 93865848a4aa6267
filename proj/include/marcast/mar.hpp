#pragma once

#include "marcast/rng.hpp"
#include "marcast/timeseries.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace marcast {

enum class DistKind { StudentT, Cauchy };

[[nodiscard]] std::string to_string(DistKind kind);
[[nodiscard]] DistKind parse_dist_kind(const std::string& text);

/**
 * Location-zero error distribution. A Cauchy law is stored as a Student-t
 * with one degree of freedom; kind records which family was estimated.
 */
struct ErrorDist {
    DistKind kind = DistKind::StudentT;
    double dof = 2.0;
    double scale = 1.0;

    [[nodiscard]] static ErrorDist student_t(double dof, double scale = 1.0);
    [[nodiscard]] static ErrorDist cauchy(double scale = 1.0);

    [[nodiscard]] double logpdf(double x) const;
    [[nodiscard]] double pdf(double x) const;
    [[nodiscard]] double sample(Rng& rng) const;
};

/// ErrorDist density with the normalizing constant computed once.
class DensityEvaluator {
public:
    explicit DensityEvaluator(const ErrorDist& dist);
    [[nodiscard]] double logpdf(double x) const noexcept;
    [[nodiscard]] double pdf(double x) const noexcept;

private:
    double log_norm_;
    double half_power_;  ///< (dof + 1) / 2
    double inv_dof_scale2_;
};

/// Draws from an ErrorDist; reuse one sampler per random stream.
class ErrorSampler {
public:
    explicit ErrorSampler(const ErrorDist& dist);
    double operator()(Rng& rng);

private:
    ErrorDist dist_;
    std::student_t_distribution<double> student_;
    std::cauchy_distribution<double> cauchy_;
};

/// log density of a location-0, scale-`scale` Student-t with `dof` degrees of freedom.
[[nodiscard]] double student_t_logpdf(double x, double dof, double scale);

/**
 * @brief MAR(r,s): Phi(L) Psi(L^{-1}) (y_t - intercept) = eps_t.
 *
 * phi holds the r lag coefficients, psi the s lead coefficients, with
 * Phi(z) = 1 - phi_1 z - ... - phi_r z^r, and likewise Psi.
 */
struct MarModel {
    std::vector<double> phi;
    std::vector<double> psi;
    ErrorDist dist;
    double intercept = 0.0;

    [[nodiscard]] std::size_t r() const noexcept { return phi.size(); }
    [[nodiscard]] std::size_t s() const noexcept { return psi.size(); }
    [[nodiscard]] bool is_stationary(double margin = 0.0) const;
};

/// Reverse-time view of a model: lags and leads exchanged.
[[nodiscard]] MarModel swap_time(const MarModel& model);

/// True when all roots of 1 - a_1 z - ... - a_p z^p lie outside the circle of radius 1 + margin.
[[nodiscard]] bool is_stationary_polynomial(std::span<const double> coefficients, double margin = 0.0);

/// Moduli of the roots of 1 - a_1 z - ... - a_p z^p, ascending.
[[nodiscard]] std::vector<double> polynomial_root_moduli(std::span<const double> coefficients);

struct OrderCandidate {
    std::size_t r = 0;
    std::size_t s = 0;
    double loglik = 0.0;
};

struct IdentificationInfo {
    std::size_t p = 0;
    std::vector<OrderCandidate> candidates;
    bool tie = false;  ///< best split tied with another; the larger lead order was kept
};

struct FittedMar {
    MarModel model;
    double loglik = 0.0;
    /// Standard errors ordered phi..., psi..., dof (Student-t only), scale.
    /// Absent when the numerical Hessian is not positive definite.
    std::optional<std::vector<double>> std_errors;
    std::vector<double> residuals;  ///< eps-hat, t = r+1..T-s
    std::vector<double> u_path;     ///< u-hat = Phi(L) y, t = r+1..T
    std::size_t p_used = 0;
    std::size_t sample_length = 0;  ///< observations in the fitted series
    std::size_t starts_tried = 0;
    bool converged = false;
    std::optional<IdentificationInfo> identification;
};

struct SimulationPath {
    std::vector<double> y;    ///< returned central segment (includes intercept)
    std::vector<double> eps;  ///< innovations aligned with y
    std::vector<double> u;    ///< noncausal component aligned with y
};

/**
 * @brief Simulate a MAR(r,s) path of length n.
 *
 * Draws n + 2*burn innovations, builds u backward from terminal zeros, then
 * y forward from zero initial values, and returns the central n points.
 * Deterministic given (model, n, seed, burn).
 */
[[nodiscard]] SimulationPath simulate_path(const MarModel& model, std::size_t n, std::uint64_t seed,
                                           std::size_t burn = 100);
[[nodiscard]] TimeSeries simulate(const MarModel& model, std::size_t n, std::uint64_t seed, std::size_t burn = 100);

struct PseudoResiduals {
    std::vector<double> eps;  ///< t = r+1..T-s
    std::vector<double> u;    ///< t = r+1..T
};

/// u_t = y_t - sum phi_i y_{t-i}; eps_t = u_t - sum psi_j u_{t+j}.
[[nodiscard]] PseudoResiduals pseudo_residual_path(std::span<const double> series, std::span<const double> phi,
                                                   std::span<const double> psi);

/// Sum of log g(eps-hat_t) at the given parameters, on the series as given (no demeaning).
[[nodiscard]] double mar_loglik(std::span<const double> series, std::span<const double> phi,
                                std::span<const double> psi, const ErrorDist& dist);

struct EstimateOptions {
    std::size_t starts = 8;  ///< lattice starting points; the two-stage least-squares start is added
    double dof_min = 0.3;
    double dof_max = 100.0;
    std::size_t refine = 2;  ///< best coarse starts polished to full tolerance
    bool compute_std_errors = true;
};

/**
 * @brief Maximum likelihood fit of a MAR(r,s) with Student-t or Cauchy errors.
 *
 * The series is demeaned first; the mean is returned as the model intercept.
 * Coefficients outside the stationary region (root moduli <= 1 + 1e-6) are
 * rejected by the objective. Throws NumericalError if no start converges to
 * a finite likelihood.
 */
[[nodiscard]] FittedMar estimate(std::span<const double> series, std::size_t r, std::size_t s, DistKind kind,
                                 const EstimateOptions& options = {});

enum class InfoCriterion { BIC, AIC, HQ };

[[nodiscard]] std::string to_string(InfoCriterion c);
[[nodiscard]] InfoCriterion parse_criterion(const std::string& text);

struct OrderSelection {
    std::size_t p = 0;
    std::vector<double> criterion_values;  ///< index k holds the value for AR(k), k = 0..p_max
    InfoCriterion criterion = InfoCriterion::BIC;
};

/**
 * OLS AR(p) with intercept for p = 0..p_max on the common sample t = p_max+1..T.
 * Returns the argmin, ties toward smaller p. With allow_zero false the search
 * starts at p = 1.
 */
[[nodiscard]] OrderSelection select_pseudo_order(std::span<const double> series, std::size_t p_max,
                                                 InfoCriterion criterion = InfoCriterion::BIC,
                                                 bool allow_zero = true);

struct IdentifyOptions {
    std::size_t p_max = 4;
    InfoCriterion criterion = InfoCriterion::BIC;
    bool allow_zero = true;
    EstimateOptions estimate;
};

/// Pseudo-order selection, then the maximum-likelihood split r + s = p (ties to larger s).
[[nodiscard]] FittedMar identify(std::span<const double> series, DistKind kind, const IdentifyOptions& options = {});

/// OLS AR(p) coefficients (no intercept) fitted on t = p+1..T; used for starting values.
[[nodiscard]] std::vector<double> ols_ar(std::span<const double> series, std::size_t p);

}  // namespace marcast
