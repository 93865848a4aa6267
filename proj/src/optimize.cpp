#include "marcast/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace marcast::opt {

namespace {

double safe(double v) { return std::isnan(v) ? std::numeric_limits<double>::infinity() : v; }

double step_for(double x, double relative) { return relative * std::max(1.0, std::abs(x)); }

}  // namespace

Result nelder_mead(const Objective& f, std::vector<double> start, std::span<const double> steps,
                   const NelderMeadOptions& options) {
    const std::size_t n = start.size();
    if (steps.size() != n) throw std::invalid_argument("nelder_mead: one step per coordinate required");
    Result res;
    if (n == 0) {
        res.x = start;
        res.value = safe(f(start));
        res.evaluations = 1;
        res.converged = true;
        return res;
    }

    std::vector<std::vector<double>> simplex(n + 1, start);
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += steps[i];
    for (std::size_t i = 0; i <= n; ++i) values[i] = safe(f(simplex[i]));
    std::size_t evals = n + 1;

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        return safe(f(x));
    };

    while (evals < options.max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[best][k]));
        const double spread = values[worst] - values[best];
        if (std::isfinite(values[worst]) && spread <= options.f_tolerance * (1.0 + std::abs(values[best])) &&
            diameter <= options.x_tolerance) {
            res.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i)
            if (i != worst)
                for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);

        for (std::size_t k = 0; k < n; ++k) trial[k] = centroid[k] + (centroid[k] - simplex[worst][k]);
        const double fr = eval(trial);
        if (fr < values[best]) {
            for (std::size_t k = 0; k < n; ++k) trial2[k] = centroid[k] + 2.0 * (centroid[k] - simplex[worst][k]);
            const double fe = eval(trial2);
            if (fe < fr) {
                simplex[worst] = trial2;
                values[worst] = fe;
            } else {
                simplex[worst] = trial;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second]) {
            simplex[worst] = trial;
            values[worst] = fr;
            continue;
        }
        const bool outside = fr < values[worst];
        for (std::size_t k = 0; k < n; ++k)
            trial2[k] = outside ? centroid[k] + 0.5 * (trial[k] - centroid[k])
                                : centroid[k] + 0.5 * (simplex[worst][k] - centroid[k]);
        const double fc = eval(trial2);
        if (fc < std::min(fr, values[worst])) {
            simplex[worst] = trial2;
            values[worst] = fc;
            continue;
        }
        // Shrink toward the best vertex.
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t k = 0; k < n; ++k) simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
            values[i] = eval(simplex[i]);
        }
    }

    std::size_t best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    res.x = simplex[best];
    res.value = values[best];
    res.evaluations = evals;
    return res;
}

std::vector<double> numerical_gradient(const Objective& f, std::span<const double> x, double relative_step) {
    const std::size_t n = x.size();
    std::vector<double> g(n), probe(x.begin(), x.end());
    const double f0 = safe(f(probe));
    for (std::size_t i = 0; i < n; ++i) {
        const double h = step_for(x[i], relative_step);
        probe[i] = x[i] + h;
        const double fp = safe(f(probe));
        probe[i] = x[i] - h;
        const double fm = safe(f(probe));
        probe[i] = x[i];
        if (std::isfinite(fp) && std::isfinite(fm))
            g[i] = (fp - fm) / (2.0 * h);
        else if (std::isfinite(fp))
            g[i] = (fp - f0) / h;
        else if (std::isfinite(fm))
            g[i] = (f0 - fm) / h;
        else
            g[i] = 0.0;
    }
    return g;
}

Result bfgs(const Objective& f, std::vector<double> x, const BfgsOptions& options) {
    const std::size_t n = x.size();
    Result res;
    double fx = safe(f(x));
    std::size_t evals = 1;
    if (!std::isfinite(fx)) throw std::invalid_argument("bfgs: infeasible starting point");

    // Inverse Hessian approximation, row-major.
    std::vector<double> H(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;
    std::vector<double> g = numerical_gradient(f, x, options.step);
    evals += 2 * n + 1;
    std::vector<double> dir(n), xn(n), s(n), y(n), Hy(n);

    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        double gnorm = 0.0;
        for (double gi : g) gnorm = std::max(gnorm, std::abs(gi));
        if (gnorm < options.gradient_tolerance) {
            res.converged = true;
            break;
        }
        for (std::size_t i = 0; i < n; ++i) {
            dir[i] = 0.0;
            for (std::size_t j = 0; j < n; ++j) dir[i] -= H[i * n + j] * g[j];
        }
        double slope = std::inner_product(g.begin(), g.end(), dir.begin(), 0.0);
        if (slope >= 0.0) {
            // Lost descent direction: reset to steepest descent.
            std::fill(H.begin(), H.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                H[i * n + i] = 1.0;
                dir[i] = -g[i];
            }
            slope = -std::inner_product(g.begin(), g.end(), g.begin(), 0.0);
        }
        double alpha = 1.0, fn = fx;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
            for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + alpha * dir[i];
            fn = safe(f(xn));
            ++evals;
            if (std::isfinite(fn) && fn <= fx + 1e-4 * alpha * slope) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        std::vector<double> gn = numerical_gradient(f, xn, options.step);
        evals += 2 * n + 1;
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = xn[i] - x[i];
            y[i] = gn[i] - g[i];
        }
        const double sy = std::inner_product(s.begin(), s.end(), y.begin(), 0.0);
        const double improvement = fx - fn;
        x = xn;
        g = std::move(gn);
        fx = fn;
        if (sy > 1e-14) {
            for (std::size_t i = 0; i < n; ++i) {
                Hy[i] = 0.0;
                for (std::size_t j = 0; j < n; ++j) Hy[i] += H[i * n + j] * y[j];
            }
            const double yHy = std::inner_product(y.begin(), y.end(), Hy.begin(), 0.0);
            const double rho = 1.0 / sy;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    H[i * n + j] += (1.0 + yHy * rho) * rho * s[i] * s[j] - rho * (Hy[i] * s[j] + s[i] * Hy[j]);
        }
        if (improvement <= 1e-15 * (1.0 + std::abs(fx))) {
            res.converged = true;
            break;
        }
    }
    res.x = std::move(x);
    res.value = fx;
    res.evaluations = evals;
    return res;
}

std::vector<double> numerical_hessian(const Objective& f, std::span<const double> x, double relative_step) {
    const std::size_t n = x.size();
    std::vector<double> Hm(n * n), p(x.begin(), x.end());
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = step_for(x[i], relative_step);
    const double f0 = safe(f(p));
    auto at = [&](std::size_t i, double di, std::size_t j, double dj) {
        p[i] += di;
        p[j] += dj;
        double v = safe(f(p));
        p[i] = x[i];
        p[j] = x[j];
        return v;
    };
    for (std::size_t i = 0; i < n; ++i) {
        const double fp = at(i, h[i], i, 0.0), fm = at(i, -h[i], i, 0.0);
        Hm[i * n + i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for (std::size_t j = 0; j < i; ++j) {
            const double fpp = at(i, h[i], j, h[j]), fpm = at(i, h[i], j, -h[j]);
            const double fmp = at(i, -h[i], j, h[j]), fmm = at(i, -h[i], j, -h[j]);
            const double v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            Hm[i * n + j] = Hm[j * n + i] = v;
        }
    }
    for (double& v : Hm)
        if (!std::isfinite(v)) v = std::numeric_limits<double>::quiet_NaN();
    return Hm;
}

}  // namespace marcast::opt
