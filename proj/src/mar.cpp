#include "marcast/mar.hpp"

#include "marcast/errors.hpp"
#include "marcast/optimize.hpp"

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace marcast {

namespace {

constexpr double kStationarityMargin = 1e-6;
constexpr double kInf = std::numeric_limits<double>::infinity();

double log_t_normalizer(double dof, double scale) {
    return boost::math::lgamma(0.5 * (dof + 1.0)) - boost::math::lgamma(0.5 * dof) -
           0.5 * std::log(dof * std::numbers::pi) - std::log(scale);
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> demeaned(std::span<const double> series, double& mu) {
    mu = mean(series);
    std::vector<double> out(series.begin(), series.end());
    for (double& v : out) v -= mu;
    return out;
}

void compute_u(std::span<const double> y, std::span<const double> phi, std::vector<double>& u) {
    const std::size_t r = phi.size(), T = y.size();
    u.resize(T - r);
    for (std::size_t t = r; t < T; ++t) {
        double v = y[t];
        for (std::size_t i = 0; i < r; ++i) v -= phi[i] * y[t - 1 - i];
        u[t - r] = v;
    }
}

/// Negative log-likelihood over the unconstrained vector
/// [phi (r), psi (s), logit-dof (Student-t only), log-scale].
class MarObjective {
public:
    MarObjective(std::span<const double> y, std::size_t r, std::size_t s, DistKind kind, double dof_min,
                 double dof_max)
        : y_(y), r_(r), s_(s), kind_(kind), dof_min_(dof_min), dof_max_(dof_max) {}

    [[nodiscard]] std::size_t dim() const { return r_ + s_ + (kind_ == DistKind::StudentT ? 2 : 1); }

    [[nodiscard]] double dof_of(double g) const { return dof_min_ + (dof_max_ - dof_min_) * logistic(g); }
    [[nodiscard]] double g_of(double dof) const {
        double p = std::clamp((dof - dof_min_) / (dof_max_ - dof_min_), 1e-9, 1.0 - 1e-9);
        return std::log(p / (1.0 - p));
    }

    [[nodiscard]] double dof(std::span<const double> theta) const {
        return kind_ == DistKind::StudentT ? dof_of(theta[r_ + s_]) : 1.0;
    }
    [[nodiscard]] double scale(std::span<const double> theta) const { return std::exp(theta.back()); }

    double operator()(std::span<const double> theta) const {
        return negloglik(theta.subspan(0, r_), theta.subspan(r_, s_), dof(theta), scale(theta));
    }

    /// Natural parameterization [phi, psi, dof (Student-t only), scale].
    double natural(std::span<const double> nat) const {
        const double dof = kind_ == DistKind::StudentT ? nat[r_ + s_] : 1.0;
        const double scale = nat.back();
        if (!(scale > 0.0) || !(dof > 0.0)) return kInf;
        return negloglik(nat.subspan(0, r_), nat.subspan(r_, s_), dof, scale);
    }

    double negloglik(std::span<const double> phi, std::span<const double> psi, double dof, double scale) const {
        if (!std::isfinite(scale) || !(scale > 0.0) || !std::isfinite(dof)) return kInf;
        if (!is_stationary_polynomial(phi, kStationarityMargin) || !is_stationary_polynomial(psi, kStationarityMargin))
            return kInf;
        compute_u(y_, phi, u_);
        const std::size_t n = u_.size() - s_;
        const double inv = 1.0 / (dof * scale * scale);
        double acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            double e = u_[t];
            for (std::size_t j = 0; j < s_; ++j) e -= psi[j] * u_[t + 1 + j];
            acc += std::log1p(e * e * inv);
        }
        const double ll = static_cast<double>(n) * log_t_normalizer(dof, scale) - 0.5 * (dof + 1.0) * acc;
        return std::isfinite(ll) ? -ll : kInf;
    }

private:
    std::span<const double> y_;
    std::size_t r_, s_;
    DistKind kind_;
    double dof_min_, dof_max_;
    mutable std::vector<double> u_;
};

/// Lattice of starting coefficients: first lag and first lead coefficient
/// drawn from {+-0.2, +-0.7}, remaining coefficients zero. The order is
/// closed under exchanging the lag and lead blocks.
std::vector<std::vector<double>> lattice_starts(std::size_t r, std::size_t s, std::size_t count) {
    static constexpr double pairs[][2] = {{0.2, 0.2},  {0.7, 0.7},  {-0.2, -0.2}, {-0.7, -0.7},
                                          {0.2, 0.7},  {0.7, 0.2},  {-0.2, 0.7},  {0.7, -0.2},
                                          {0.2, -0.2}, {-0.2, 0.2}, {0.7, -0.7},  {-0.7, 0.7},
                                          {-0.7, 0.2}, {0.2, -0.7}, {-0.7, -0.2}, {-0.2, -0.7}};
    std::vector<std::vector<double>> out;
    if (r + s == 0) return {std::vector<double>{}};
    for (const auto& pr : pairs) {
        if (out.size() >= count) break;
        std::vector<double> c(r + s, 0.0);
        if (r > 0) c[0] = pr[0];
        if (s > 0) c[r] = pr[1];
        if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(std::move(c));
    }
    return out;
}

std::vector<double> shrink_to_stationary(std::vector<double> a) {
    for (int k = 0; k < 200 && !is_stationary_polynomial(a, 1e-3); ++k)
        for (double& v : a) v *= 0.9;
    return a;
}

double median_abs(std::vector<double> v) {
    if (v.empty()) return 1.0;
    for (double& x : v) x = std::abs(x);
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

}  // namespace

std::string to_string(DistKind kind) { return kind == DistKind::Cauchy ? "cauchy" : "student_t"; }

DistKind parse_dist_kind(const std::string& text) {
    if (text == "cauchy") return DistKind::Cauchy;
    if (text == "student_t" || text == "t" || text == "student") return DistKind::StudentT;
    throw std::invalid_argument("unknown distribution '" + text + "' (expected student_t or cauchy)");
}

ErrorDist ErrorDist::student_t(double dof, double scale) {
    if (!(dof > 0.0) || !(scale > 0.0)) throw std::invalid_argument("Student-t requires dof > 0 and scale > 0");
    return {DistKind::StudentT, dof, scale};
}

ErrorDist ErrorDist::cauchy(double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("Cauchy requires scale > 0");
    return {DistKind::Cauchy, 1.0, scale};
}

double student_t_logpdf(double x, double dof, double scale) {
    const double z = x / scale;
    return log_t_normalizer(dof, scale) - 0.5 * (dof + 1.0) * std::log1p(z * z / dof);
}

double ErrorDist::logpdf(double x) const { return student_t_logpdf(x, dof, scale); }
double ErrorDist::pdf(double x) const { return std::exp(logpdf(x)); }

double ErrorDist::sample(Rng& rng) const { return ErrorSampler(*this)(rng); }

DensityEvaluator::DensityEvaluator(const ErrorDist& dist)
    : log_norm_(log_t_normalizer(dist.dof, dist.scale)),
      half_power_(0.5 * (dist.dof + 1.0)),
      inv_dof_scale2_(1.0 / (dist.dof * dist.scale * dist.scale)) {}

double DensityEvaluator::logpdf(double x) const noexcept {
    return log_norm_ - half_power_ * std::log1p(x * x * inv_dof_scale2_);
}

double DensityEvaluator::pdf(double x) const noexcept { return std::exp(logpdf(x)); }

ErrorSampler::ErrorSampler(const ErrorDist& dist)
    : dist_(dist), student_(dist.kind == DistKind::Cauchy ? 1.0 : dist.dof), cauchy_(0.0, dist.scale) {}

double ErrorSampler::operator()(Rng& rng) {
    if (dist_.kind == DistKind::Cauchy) return cauchy_(rng);
    return dist_.scale * student_(rng);
}

bool is_stationary_polynomial(std::span<const double> coefficients, double margin) {
    // Step-down recursion on partial autocorrelations of Phi(rho z), rho = 1 + margin.
    std::vector<double> a(coefficients.begin(), coefficients.end());
    const double rho = 1.0 + margin;
    double f = 1.0;
    for (double& v : a) {
        f *= rho;
        v *= f;
        if (!std::isfinite(v)) return false;
    }
    for (std::size_t k = a.size(); k > 0; --k) {
        const double kappa = a[k - 1];
        if (!(std::abs(kappa) < 1.0)) return false;
        const double denom = 1.0 - kappa * kappa;
        std::vector<double> next(k - 1);
        for (std::size_t j = 0; j + 1 < k; ++j) next[j] = (a[j] + kappa * a[k - 2 - j]) / denom;
        a = std::move(next);
    }
    return true;
}

std::vector<double> polynomial_root_moduli(std::span<const double> coefficients) {
    // Strip trailing zeros: they do not contribute roots.
    std::size_t p = coefficients.size();
    while (p > 0 && coefficients[p - 1] == 0.0) --p;
    if (p == 0) return {};
    // Reciprocal roots are the eigenvalues of the companion matrix.
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < p; ++j) C(0, static_cast<Eigen::Index>(j)) = coefficients[j];
    for (std::size_t i = 1; i < p; ++i) C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
    std::vector<double> out;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        double m = std::abs(es.eigenvalues()[i]);
        out.push_back(m > 0.0 ? 1.0 / m : kInf);
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool MarModel::is_stationary(double margin) const {
    return is_stationary_polynomial(phi, margin) && is_stationary_polynomial(psi, margin);
}

MarModel swap_time(const MarModel& model) {
    MarModel out = model;
    std::swap(out.phi, out.psi);
    return out;
}

SimulationPath simulate_path(const MarModel& model, std::size_t n, std::uint64_t seed, std::size_t burn) {
    if (n == 0) throw std::invalid_argument("simulate: n must be >= 1");
    if (burn < 50) throw std::invalid_argument("simulate: burn must be >= 50");
    if (!model.is_stationary()) throw std::invalid_argument("simulate: model is not stationary");
    const std::size_t total = n + 2 * burn, r = model.r(), s = model.s();

    Rng rng(seed);
    ErrorSampler draw(model.dist);
    std::vector<double> eps(total);
    for (double& e : eps) e = draw(rng);

    std::vector<double> u(total), y(total);
    for (std::size_t t = total; t-- > 0;) {
        double v = eps[t];
        for (std::size_t j = 1; j <= s && t + j < total; ++j) v += model.psi[j - 1] * u[t + j];
        u[t] = v;
    }
    for (std::size_t t = 0; t < total; ++t) {
        double v = u[t];
        for (std::size_t i = 1; i <= r && i <= t; ++i) v += model.phi[i - 1] * y[t - i];
        y[t] = v;
    }

    SimulationPath out;
    auto first = static_cast<std::ptrdiff_t>(burn), last = static_cast<std::ptrdiff_t>(burn + n);
    out.y.assign(y.begin() + first, y.begin() + last);
    for (double& v : out.y) v += model.intercept;
    out.eps.assign(eps.begin() + first, eps.begin() + last);
    out.u.assign(u.begin() + first, u.begin() + last);
    return out;
}

TimeSeries simulate(const MarModel& model, std::size_t n, std::uint64_t seed, std::size_t burn) {
    return TimeSeries(simulate_path(model, n, seed, burn).y,
                      "MAR(" + std::to_string(model.r()) + "," + std::to_string(model.s()) + ")");
}

PseudoResiduals pseudo_residual_path(std::span<const double> series, std::span<const double> phi,
                                     std::span<const double> psi) {
    const std::size_t r = phi.size(), s = psi.size(), T = series.size();
    if (T <= r + s) throw std::invalid_argument("pseudo_residual_path: series too short for MAR(r,s)");
    PseudoResiduals out;
    compute_u(series, phi, out.u);
    out.eps.resize(T - r - s);
    for (std::size_t t = 0; t < out.eps.size(); ++t) {
        double e = out.u[t];
        for (std::size_t j = 0; j < s; ++j) e -= psi[j] * out.u[t + 1 + j];
        out.eps[t] = e;
    }
    return out;
}

double mar_loglik(std::span<const double> series, std::span<const double> phi, std::span<const double> psi,
                  const ErrorDist& dist) {
    auto pr = pseudo_residual_path(series, phi, psi);
    double ll = 0.0;
    for (double e : pr.eps) ll += dist.logpdf(e);
    return ll;
}

std::vector<double> ols_ar(std::span<const double> series, std::size_t p) {
    if (p == 0) return {};
    const std::size_t T = series.size();
    if (T <= 2 * p) throw std::invalid_argument("ols_ar: series too short");
    const auto n = static_cast<Eigen::Index>(T - p);
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(p));
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t t = p + static_cast<std::size_t>(i);
        y[i] = series[t];
        for (std::size_t j = 0; j < p; ++j) X(i, static_cast<Eigen::Index>(j)) = series[t - 1 - j];
    }
    Eigen::VectorXd b = X.colPivHouseholderQr().solve(y);
    return {b.data(), b.data() + b.size()};
}

FittedMar estimate(std::span<const double> series, std::size_t r, std::size_t s, DistKind kind,
                   const EstimateOptions& options) {
    const std::size_t T = series.size();
    if (T <= r + s + 2) throw std::invalid_argument("estimate: series too short for MAR(r,s)");
    double mu = 0.0;
    const std::vector<double> y = demeaned(series, mu);

    MarObjective obj(y, r, s, kind, options.dof_min, options.dof_max);
    const bool student = kind == DistKind::StudentT;
    const std::size_t dim = obj.dim();
    opt::Objective f = [&obj](std::span<const double> th) { return obj(th); };

    auto make_start = [&](std::vector<double> coeffs) {
        std::vector<double> phi(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(r));
        std::vector<double> psi(coeffs.begin() + static_cast<std::ptrdiff_t>(r), coeffs.end());
        auto pr = pseudo_residual_path(y, phi, psi);
        double sigma = median_abs(pr.eps);
        if (!(sigma > 0.0)) sigma = 1e-8 * (1.0 + median_abs(y));
        if (student) coeffs.push_back(obj.g_of(2.0));
        coeffs.push_back(std::log(sigma));
        return coeffs;
    };

    std::vector<std::vector<double>> starts;
    for (auto& c : lattice_starts(r, s, options.starts)) starts.push_back(make_start(std::move(c)));
    {
        // Two-stage least squares: AR(r) forward on y, AR(s) on the reversed u-hat.
        auto phi0 = shrink_to_stationary(ols_ar(y, r));
        std::vector<double> u;
        compute_u(y, phi0, u);
        std::reverse(u.begin(), u.end());
        std::vector<double> psi0 = s > 0 && u.size() > 2 * s ? shrink_to_stationary(ols_ar(u, s))
                                                             : std::vector<double>(s, 0.0);
        std::vector<double> c = phi0;
        c.insert(c.end(), psi0.begin(), psi0.end());
        starts.push_back(make_start(std::move(c)));
    }

    std::vector<double> steps(dim, 0.1);
    if (student) steps[r + s] = 0.5;
    steps.back() = 0.3;

    opt::NelderMeadOptions coarse{120 * (dim + 1), 1e-7, 1e-4};
    std::vector<opt::Result> coarse_results;
    for (auto& st : starts) {
        if (!std::isfinite(f(st))) continue;
        coarse_results.push_back(opt::nelder_mead(f, st, steps, coarse));
    }
    std::stable_sort(coarse_results.begin(), coarse_results.end(),
                     [](const opt::Result& a, const opt::Result& b) { return a.value < b.value; });

    opt::Result best;
    best.value = kInf;
    opt::NelderMeadOptions fine{4000 * dim, 1e-13, 1e-9};
    std::vector<double> fine_steps(dim, 0.02);
    std::size_t polished = 0;
    for (std::size_t i = 0; i < coarse_results.size() && polished < std::max<std::size_t>(options.refine, 1); ++i) {
        if (!std::isfinite(coarse_results[i].value)) continue;
        // Skip starts that landed in an already polished basin.
        bool duplicate = false;
        for (std::size_t j = 0; j < i; ++j) {
            double d = 0.0;
            for (std::size_t k = 0; k < r + s; ++k)
                d = std::max(d, std::abs(coarse_results[i].x[k] - coarse_results[j].x[k]));
            if (d < 1e-3 && std::isfinite(coarse_results[j].value)) duplicate = true;
        }
        if (duplicate) continue;
        ++polished;
        opt::Result nm = opt::nelder_mead(f, coarse_results[i].x, fine_steps, fine);
        opt::Result qn = opt::bfgs(f, nm.x);
        opt::Result& cand = qn.value <= nm.value ? qn : nm;
        cand.converged = nm.converged || qn.converged;
        if (cand.value < best.value) best = cand;
    }
    if (!std::isfinite(best.value)) throw NumericalError("estimate: optimizer failed from every start");

    FittedMar fit;
    fit.model.phi.assign(best.x.begin(), best.x.begin() + static_cast<std::ptrdiff_t>(r));
    fit.model.psi.assign(best.x.begin() + static_cast<std::ptrdiff_t>(r),
                         best.x.begin() + static_cast<std::ptrdiff_t>(r + s));
    fit.model.dist = student ? ErrorDist::student_t(obj.dof(best.x), obj.scale(best.x))
                             : ErrorDist::cauchy(obj.scale(best.x));
    fit.model.intercept = mu;
    fit.loglik = -best.value;
    fit.converged = best.converged;
    fit.starts_tried = starts.size();
    fit.sample_length = T;
    fit.p_used = r + s;
    auto pr = pseudo_residual_path(y, fit.model.phi, fit.model.psi);
    fit.residuals = std::move(pr.eps);
    fit.u_path = std::move(pr.u);

    if (options.compute_std_errors) {
        std::vector<double> nat(fit.model.phi);
        nat.insert(nat.end(), fit.model.psi.begin(), fit.model.psi.end());
        if (student) nat.push_back(fit.model.dist.dof);
        nat.push_back(fit.model.dist.scale);
        opt::Objective fn = [&obj](std::span<const double> th) { return obj.natural(th); };
        auto H = opt::numerical_hessian(fn, nat);
        const auto d = static_cast<Eigen::Index>(nat.size());
        Eigen::MatrixXd Hm = Eigen::Map<Eigen::MatrixXd>(H.data(), d, d);
        if (Hm.allFinite()) {
            Eigen::LLT<Eigen::MatrixXd> llt(Hm);
            if (llt.info() == Eigen::Success) {
                Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(d, d));
                std::vector<double> se(nat.size());
                bool ok = true;
                for (Eigen::Index i = 0; i < d; ++i) {
                    ok = ok && cov(i, i) > 0.0;
                    se[static_cast<std::size_t>(i)] = std::sqrt(std::max(cov(i, i), 0.0));
                }
                if (ok) fit.std_errors = std::move(se);
            }
        }
    }
    return fit;
}

std::string to_string(InfoCriterion c) {
    switch (c) {
        case InfoCriterion::BIC: return "BIC";
        case InfoCriterion::AIC: return "AIC";
        case InfoCriterion::HQ: return "HQ";
    }
    return "BIC";
}

InfoCriterion parse_criterion(const std::string& text) {
    std::string t;
    for (char c : text) t += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (t == "BIC") return InfoCriterion::BIC;
    if (t == "AIC") return InfoCriterion::AIC;
    if (t == "HQ") return InfoCriterion::HQ;
    throw std::invalid_argument("unknown information criterion '" + text + "'");
}

OrderSelection select_pseudo_order(std::span<const double> series, std::size_t p_max, InfoCriterion criterion,
                                   bool allow_zero) {
    const std::size_t T = series.size();
    if (T <= p_max + 1) throw std::invalid_argument("select_pseudo_order: series too short for p_max");
    const auto n = static_cast<Eigen::Index>(T - p_max);
    const double nd = static_cast<double>(n);

    Eigen::VectorXd y(n);
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(p_max + 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t t = p_max + static_cast<std::size_t>(i);
        y[i] = series[t];
        X(i, 0) = 1.0;
        for (std::size_t j = 1; j <= p_max; ++j) X(i, static_cast<Eigen::Index>(j)) = series[t - j];
    }

    OrderSelection out;
    out.criterion = criterion;
    out.criterion_values.assign(p_max + 1, kInf);
    double best = kInf;
    for (std::size_t p = allow_zero ? 0 : 1; p <= p_max; ++p) {
        Eigen::MatrixXd Xp = X.leftCols(static_cast<Eigen::Index>(p + 1));
        Eigen::VectorXd b = Xp.colPivHouseholderQr().solve(y);
        const double rss = (y - Xp * b).squaredNorm();
        const double k = static_cast<double>(p + 1);
        double penalty = 0.0;
        switch (criterion) {
            case InfoCriterion::BIC: penalty = k * std::log(nd); break;
            case InfoCriterion::AIC: penalty = 2.0 * k; break;
            case InfoCriterion::HQ: penalty = 2.0 * k * std::log(std::log(nd)); break;
        }
        const double value = nd * std::log(std::max(rss, 1e-300) / nd) + penalty;
        out.criterion_values[p] = value;
        if (value < best) {
            best = value;
            out.p = p;
        }
    }
    return out;
}

FittedMar identify(std::span<const double> series, DistKind kind, const IdentifyOptions& options) {
    const OrderSelection sel = select_pseudo_order(series, options.p_max, options.criterion, options.allow_zero);
    const std::size_t p = sel.p;

    IdentificationInfo info;
    info.p = p;
    std::optional<FittedMar> best;
    for (std::size_t r = 0; r <= p; ++r) {
        FittedMar f = estimate(series, r, p - r, kind, options.estimate);
        info.candidates.push_back({r, p - r, f.loglik});
        // Iterating r upward means later candidates have smaller s: replace only on strict improvement.
        const double tol = 1e-8 * (1.0 + std::abs(f.loglik));
        if (!best || f.loglik > best->loglik + tol) {
            best = std::move(f);
        }
    }
    for (const auto& c : info.candidates)
        if (c.r != best->model.r() && std::abs(c.loglik - best->loglik) <= 1e-8 * (1.0 + std::abs(best->loglik)))
            info.tie = true;
    best->p_used = p;
    best->identification = std::move(info);
    return *best;
}

}  // namespace marcast
