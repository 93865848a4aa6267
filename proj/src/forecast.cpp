#include "marcast/forecast.hpp"

#include "marcast/errors.hpp"
#include "marcast/parallel.hpp"
#include "marcast/rng.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace marcast {

namespace {

constexpr std::size_t kChunk = 8192;

double cauchy_one_step_pdf(double u_last, double psi, double v) {
    const double a = u_last - psi * v, b = 1.0 - psi;
    return (1.0 / std::numbers::pi) / (1.0 + a * a) * (1.0 + b * b * u_last * u_last) / (1.0 + b * b * v * v);
}

double integrate(const auto& f, double lo, double hi) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 15, 1e-12);
}

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 64) return std::accumulate(v.begin(), v.end(), 0.0);
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

void check_grid(std::span<const double> grid) {
    if (grid.size() < 2) throw std::invalid_argument("forecast grid needs at least 2 points");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("forecast grid must be strictly increasing");
}

void finish_cdf(std::vector<double>& cdf) {
    double running = 0.0;
    for (double& c : cdf) {
        c = std::clamp(c, 0.0, 1.0);
        running = std::max(running, c);
        c = running;
    }
}

void require_single_lead(const MarModel& model) {
    if (model.s() != 1)
        throw std::invalid_argument("forecast estimators require exactly one lead (s = 1), got s = " +
                                    std::to_string(model.s()));
}

}  // namespace

std::string to_string(ForecastMethod method) {
    switch (method) {
        case ForecastMethod::CauchyClosedForm: return "cauchy_closed_form";
        case ForecastMethod::Simulations: return "simulations";
        case ForecastMethod::Sample: return "sample";
    }
    return "unknown";
}

double PredictiveDensity::cdf_at(double x) const {
    if (grid.empty() || x < grid.front() || x > grid.back())
        throw DataError("value " + format_double(x) + " lies outside the forecast grid; extend the grid");
    auto it = std::upper_bound(grid.begin(), grid.end(), x);
    if (it == grid.end()) return cdf.back();
    const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
    const std::size_t lo = hi - 1;
    const double w = (x - grid[lo]) / (grid[hi] - grid[lo]);
    return cdf[lo] + w * (cdf[hi] - cdf[lo]);
}

void ForecastConfig::validate() const {
    if (M < 10) throw std::invalid_argument("forecast: truncation M must be >= 10");
    if (N < 1000) throw std::invalid_argument("forecast: simulation count N must be >= 1000");
    if (grid_points < 101) throw std::invalid_argument("forecast: grid_points must be >= 101");
    if (!(grid_span >= 0.0)) throw std::invalid_argument("forecast: grid_span must be >= 0");
}

CompanionForm CompanionForm::from_phi(std::span<const double> phi) {
    const auto r = static_cast<Eigen::Index>(phi.size());
    CompanionForm c;
    c.Phi = Eigen::MatrixXd::Zero(r, r);
    c.iota = Eigen::VectorXd::Zero(r);
    if (r == 0) return c;
    for (Eigen::Index j = 0; j < r; ++j) c.Phi(0, j) = phi[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 1; i < r; ++i) c.Phi(i, i - 1) = 1.0;
    c.iota[0] = 1.0;
    return c;
}

double CompanionForm::spectral_radius() const {
    if (Phi.rows() == 0) return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(Phi, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<double> CompanionForm::impulse_responses(std::size_t count) const {
    std::vector<double> out(count, 0.0);
    if (count == 0) return out;
    out[0] = 1.0;  // iota' I iota, also for r = 0
    if (Phi.rows() == 0) return out;
    Eigen::VectorXd v = iota;
    for (std::size_t i = 1; i < count; ++i) {
        v = Phi * v;
        out[i] = v[0];
    }
    return out;
}

double CompanionForm::propagate(std::span<const double> y_vec, std::size_t h) const {
    if (Phi.rows() == 0) return 0.0;
    if (static_cast<Eigen::Index>(y_vec.size()) != Phi.rows())
        throw std::invalid_argument("propagate: state length must equal r");
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(y_vec.data(), Phi.rows());
    for (std::size_t i = 0; i < h; ++i) v = Phi * v;
    return v[0];
}

ForecastState forecast_state(const MarModel& model, std::span<const double> history) {
    const std::size_t r = model.r();
    if (history.size() < r + 1) throw std::invalid_argument("forecast: history shorter than r + 1");
    std::vector<double> y(history.begin(), history.end());
    for (double& v : y) v -= model.intercept;
    ForecastState st;
    st.intercept = model.intercept;
    st.last_y = history.back();
    for (std::size_t i = 0; i < r; ++i) st.recent.push_back(y[y.size() - 1 - i]);
    st.u_path = pseudo_residual_path(y, model.phi, {}).u;
    st.u_last = st.u_path.back();
    return st;
}

std::vector<double> default_grid(std::span<const double> history, const ForecastConfig& config) {
    if (config.grid_points < 2) throw std::invalid_argument("default_grid: need at least 2 points");
    const auto [mn, mx] = std::minmax_element(history.begin(), history.end());
    const double sd = history.size() >= 2 ? empirical_sd(history) : 1.0;
    const double pad = config.grid_span * (sd > 0.0 ? sd : 1.0);
    const double lo = *mn - pad, hi = *mx + pad;
    std::vector<double> g(config.grid_points);
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(g.size() - 1);
    return g;
}

double cauchy_density(double u_last, double psi, std::span<const double> path) {
    if (path.empty()) throw std::invalid_argument("cauchy_density: empty path");
    double dens = 1.0, prev = u_last;
    for (double v : path) {
        const double a = prev - psi * v;
        dens *= (1.0 / std::numbers::pi) / (1.0 + a * a);
        prev = v;
    }
    const double b = 1.0 - psi;
    return dens * (1.0 + b * b * u_last * u_last) / (1.0 + b * b * path.back() * path.back());
}

double cauchy_one_step_probs(double u_last, double psi, double threshold) {
    auto f = [&](double v) { return cauchy_one_step_pdf(u_last, psi, v); };
    std::vector<double> cuts{0.0};
    if (psi != 0.0) cuts.push_back(u_last / psi);
    std::sort(cuts.begin(), cuts.end());
    double lo = -std::numeric_limits<double>::infinity(), acc = 0.0;
    for (double c : cuts) {
        if (c >= threshold) break;
        acc += integrate(f, lo, c);
        lo = c;
    }
    acc += integrate(f, lo, threshold);
    return std::clamp(acc, 0.0, 1.0);
}

std::vector<double> cauchy_one_step_modes(double u_last, double psi) {
    const double reach = std::abs(u_last) / std::max(std::abs(psi), 0.05) + 10.0;
    const double lo = -2.0 * reach, hi = 2.0 * reach;
    const std::size_t n = 40001;
    const double dx = (hi - lo) / static_cast<double>(n - 1);
    auto f = [&](double v) { return cauchy_one_step_pdf(u_last, psi, v); };
    std::vector<double> modes;
    double fm = f(lo), f0 = f(lo + dx);
    for (std::size_t i = 2; i < n; ++i) {
        const double x1 = lo + dx * static_cast<double>(i);
        const double f1 = f(x1);
        if (f0 >= fm && f0 > f1) {
            // Golden-section refinement on [x - dx, x + dx].
            double a = x1 - 2.0 * dx, b = x1;
            const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
            for (int it = 0; it < 100; ++it) {
                double c = b - gr * (b - a), d = a + gr * (b - a);
                if (f(c) > f(d)) b = d; else a = c;
            }
            modes.push_back(0.5 * (a + b));
        }
        fm = f0;
        f0 = f1;
    }
    return modes;
}

PredictiveDensity cauchy_forecast(double u_last, double psi, std::span<const double> grid) {
    check_grid(grid);
    PredictiveDensity out;
    out.grid.assign(grid.begin(), grid.end());
    out.target = ForecastTarget::U;
    out.method = ForecastMethod::CauchyClosedForm;
    out.pdf.resize(grid.size());
    out.cdf.resize(grid.size());
    auto f = [&](double v) { return cauchy_one_step_pdf(u_last, psi, v); };
    for (std::size_t i = 0; i < grid.size(); ++i) out.pdf[i] = f(grid[i]);
    out.cdf[0] = cauchy_one_step_probs(u_last, psi, grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) out.cdf[i] = out.cdf[i - 1] + integrate(f, grid[i - 1], grid[i]);
    finish_cdf(out.cdf);
    return out;
}

PredictiveDensity simulations_forecast(const MarModel& model, const ForecastState& state, std::size_t h,
                                       const ForecastConfig& config, std::span<const double> grid) {
    require_single_lead(model);
    config.validate();
    check_grid(grid);
    if (h == 0) throw std::invalid_argument("simulations_forecast: horizon must be >= 1");
    if (h > config.M) throw std::invalid_argument("simulations_forecast: horizon exceeds truncation M");

    const double psi = model.psi[0];
    const std::size_t M = config.M, N = config.N;
    const CompanionForm comp = CompanionForm::from_phi(model.phi);
    const std::vector<double> irf = comp.impulse_responses(h);
    const double base = comp.propagate(state.recent, h) + model.intercept;

    const DensityEvaluator g(model.dist);
    std::vector<double> values(N), weights(N);
    const std::size_t chunks = (N + kChunk - 1) / kChunk;
    parallel_for(chunks, config.threads, [&](std::size_t c) {
        Rng rng(derive_seed(config.seed, {c}));
        ErrorSampler draw(model.dist);
        std::vector<double> eps(M), u(M);
        const std::size_t first = c * kChunk, last = std::min(N, first + kChunk);
        for (std::size_t j = first; j < last; ++j) {
            for (double& e : eps) e = draw(rng);
            // u*_{T+k} = sum_{i=0}^{M-k} psi^i eps*_{T+k+i}, by backward recursion; u[k-1] holds u*_{T+k}.
            u[M - 1] = eps[M - 1];
            for (std::size_t k = M - 1; k-- > 0;) u[k] = eps[k] + psi * u[k + 1];
            double y = base;
            for (std::size_t i = 0; i < h; ++i) y += irf[i] * u[h - 1 - i];
            values[j] = y;
            weights[j] = g.pdf(state.u_last - psi * u[0]);
        }
    });

    const double total = pairwise_sum(weights);
    std::vector<double> sq(N);
    for (std::size_t j = 0; j < N; ++j) sq[j] = weights[j] * weights[j];
    const double total_sq = pairwise_sum(sq);

    PredictiveDensity out;
    out.grid.assign(grid.begin(), grid.end());
    out.target = ForecastTarget::Y;
    out.horizon = h;
    out.method = ForecastMethod::Simulations;
    out.effective_sample_size = total_sq > 0.0 ? total * total / total_sq : 0.0;
    if (!(total > 0.0)) throw NumericalError("simulations_forecast: all importance weights vanished");
    if (out.effective_sample_size < 50.0)
        out.warnings.push_back("effective sample size " + format_double(out.effective_sample_size) +
                               " below 50; increase N");

    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values[a] < values[b] || (values[a] == values[b] && a < b);
    });
    out.cdf.resize(grid.size());
    std::size_t k = 0;
    double cum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        while (k < N && values[order[k]] <= grid[i]) cum += weights[order[k++]];
        out.cdf[i] = cum / total;
    }
    finish_cdf(out.cdf);
    return out;
}

PredictiveDensity simulations_forecast(const MarModel& model, const TimeSeries& history, std::size_t h,
                                       const ForecastConfig& config) {
    const ForecastState st = forecast_state(model, history.values());
    return simulations_forecast(model, st, h, config, default_grid(history.values(), config));
}

PredictiveDensity sample_forecast(const MarModel& model, const ForecastState& state, std::span<const double> grid) {
    require_single_lead(model);
    check_grid(grid);
    const double psi = model.psi[0];
    const DensityEvaluator g(model.dist);

    double shift = model.intercept;
    for (std::size_t i = 0; i < model.r(); ++i) shift += model.phi[i] * state.recent[i];

    double denom = 0.0;
    for (double ui : state.u_path) denom += g.pdf(state.u_last - psi * ui);
    if (!(denom > 0.0)) throw NumericalError("sample_forecast: vanishing normalizer");

    PredictiveDensity out;
    out.grid.assign(grid.begin(), grid.end());
    out.target = ForecastTarget::Y;
    out.method = ForecastMethod::Sample;
    out.u_to_y_shift = shift;
    out.pdf.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double u = grid[k] - shift;
        double num = 0.0;
        for (double ui : state.u_path) num += g.pdf(u - psi * ui);
        out.pdf[k] = g.pdf(state.u_last - psi * u) * num / denom;
    }
    out.cdf.assign(grid.size(), 0.0);
    for (std::size_t k = 1; k < grid.size(); ++k)
        out.cdf[k] = out.cdf[k - 1] + 0.5 * (out.pdf[k] + out.pdf[k - 1]) * (grid[k] - grid[k - 1]);
    out.raw_mass = out.cdf.back();
    if (!(out.raw_mass > 0.0)) throw NumericalError("sample_forecast: density has no mass on the grid");
    for (double& p : out.pdf) p /= out.raw_mass;
    for (double& c : out.cdf) c /= out.raw_mass;
    if (out.raw_mass < 0.95)
        out.warnings.push_back("grid captures only " + format_double(out.raw_mass) + " of the density mass");
    finish_cdf(out.cdf);
    return out;
}

PredictiveDensity sample_forecast(const MarModel& model, const TimeSeries& history, const ForecastConfig& config) {
    const ForecastState st = forecast_state(model, history.values());
    return sample_forecast(model, st, default_grid(history.values(), config));
}

double sample_joint_density(const MarModel& model, const ForecastState& state, std::span<const double> u_future) {
    require_single_lead(model);
    if (u_future.empty()) throw std::invalid_argument("sample_joint_density: empty path");
    const double psi = model.psi[0];
    const DensityEvaluator g(model.dist);
    double dens = 1.0, prev = state.u_last;
    for (double v : u_future) {
        dens *= g.pdf(prev - psi * v);
        prev = v;
    }
    double num = 0.0, denom = 0.0;
    for (double ui : state.u_path) {
        num += g.pdf(u_future.back() - psi * ui);
        denom += g.pdf(state.u_last - psi * ui);
    }
    return dens * num / denom;
}

EventProbabilities prob_events(const PredictiveDensity& density, double last_y, double sd) {
    if (density.target != ForecastTarget::Y) throw std::invalid_argument("prob_events requires a y-target density");
    if (!(sd >= 0.0)) throw std::invalid_argument("prob_events: sd must be non-negative");
    EventProbabilities out;
    out.p_decrease = density.cdf_at(last_y);
    const double thr = last_y - sd;
    out.p_decrease_1sd = thr < density.grid.front() ? 0.0 : density.cdf_at(thr);
    return out;
}

double sample_quantile(std::span<const double> values, double q) {
    if (values.empty()) throw std::invalid_argument("sample_quantile: empty input");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("sample_quantile: q must lie in [0, 1]");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace marcast
