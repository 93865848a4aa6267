#include "marcast/cli.hpp"
#include "marcast/cobubble.hpp"
#include "marcast/detrend.hpp"
#include "marcast/errors.hpp"
#include "marcast/forecast.hpp"
#include "marcast/io.hpp"
#include "marcast/mar.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace marcast;

namespace {

// Results cross the boundary as JSON text; the Python side decodes them.
std::string dumps(const io::json& j) { return j.dump(); }

MarModel make_model(std::vector<double> phi, std::vector<double> psi, const std::string& dist, double dof,
                    double scale) {
    MarModel m;
    m.phi = std::move(phi);
    m.psi = std::move(psi);
    m.dist = parse_dist_kind(dist) == DistKind::Cauchy ? ErrorDist::cauchy(scale) : ErrorDist::student_t(dof, scale);
    return m;
}

TrendSpec make_trend(const std::string& method, int order, double lambda, std::vector<std::size_t> breaks) {
    if (method == "intercept") return TrendSpec::intercept();
    if (method == "poly" || method == "polynomial") return TrendSpec::polynomial(order);
    if (method == "hp") return TrendSpec::hp(lambda);
    if (method == "breaks") return TrendSpec::breaks(std::move(breaks));
    if (method == "step") return TrendSpec::step(std::move(breaks));
    throw std::invalid_argument("unknown trend method: " + method);
}

py::dict density_dict(const PredictiveDensity& d) {
    py::dict out;
    out["grid"] = d.grid;
    out["pdf"] = d.pdf;
    out["cdf"] = d.cdf;
    out["summary"] = dumps(io::to_json(d));
    return out;
}

ForecastConfig make_config(std::size_t N, std::size_t M, std::size_t grid_points, double grid_span,
                           std::uint64_t seed, unsigned threads) {
    ForecastConfig c;
    c.N = N;
    c.M = M;
    c.grid_points = grid_points;
    c.grid_span = grid_span;
    c.seed = seed;
    c.threads = threads;
    c.validate();
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "marcast native core";

    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def(
        "detrend",
        [](const std::vector<double>& y, const std::string& method, int order, double lambda,
           std::vector<std::size_t> breaks) {
            const TrendFit fit = detrend(TimeSeries(y), make_trend(method, order, lambda, std::move(breaks)));
            py::dict out;
            out["trend"] = fit.trend;
            out["cycle"] = fit.cycle;
            out["info"] = dumps(io::to_json(fit));
            return out;
        },
        py::arg("y"), py::arg("method") = "hp", py::arg("order") = 4, py::arg("lam") = 129600.0,
        py::arg("breaks") = std::vector<std::size_t>{});

    m.def(
        "simulate",
        [](std::vector<double> phi, std::vector<double> psi, std::size_t n, std::uint64_t seed, const std::string& dist,
           double dof, double scale, std::size_t burn) {
            const SimulationPath p = simulate_path(make_model(std::move(phi), std::move(psi), dist, dof, scale), n, seed, burn);
            return p.y;
        },
        py::arg("phi"), py::arg("psi"), py::arg("n"), py::arg("seed"), py::arg("dist") = "student_t",
        py::arg("dof") = 2.0, py::arg("scale") = 1.0, py::arg("burn") = 100);

    m.def(
        "loglik",
        [](const std::vector<double>& y, const std::vector<double>& phi, const std::vector<double>& psi,
           const std::string& dist, double dof, double scale) {
            return mar_loglik(y, phi, psi, make_model({}, {}, dist, dof, scale).dist);
        },
        py::arg("y"), py::arg("phi"), py::arg("psi"), py::arg("dist") = "student_t", py::arg("dof") = 2.0,
        py::arg("scale") = 1.0);

    m.def(
        "estimate",
        [](const std::vector<double>& y, std::size_t r, std::size_t s, const std::string& dist, bool std_errors) {
            EstimateOptions o;
            o.compute_std_errors = std_errors;
            py::gil_scoped_release release;
            return dumps(io::to_json(estimate(y, r, s, parse_dist_kind(dist), o)));
        },
        py::arg("y"), py::arg("r"), py::arg("s"), py::arg("dist") = "student_t", py::arg("std_errors") = true);

    m.def(
        "identify",
        [](const std::vector<double>& y, std::size_t p_max, const std::string& criterion, const std::string& dist,
           bool std_errors) {
            IdentifyOptions o;
            o.p_max = p_max;
            o.criterion = parse_criterion(criterion);
            o.estimate.compute_std_errors = std_errors;
            py::gil_scoped_release release;
            return dumps(io::to_json(identify(y, parse_dist_kind(dist), o)));
        },
        py::arg("y"), py::arg("p_max") = 4, py::arg("criterion") = "bic", py::arg("dist") = "student_t",
        py::arg("std_errors") = true);

    m.def(
        "select_pseudo_order",
        [](const std::vector<double>& y, std::size_t p_max, const std::string& criterion) {
            const OrderSelection s = select_pseudo_order(y, p_max, parse_criterion(criterion));
            return py::make_tuple(s.p, s.criterion_values);
        },
        py::arg("y"), py::arg("p_max") = 4, py::arg("criterion") = "bic");

    m.def(
        "cauchy_forecast",
        [](double u_last, double psi, const std::vector<double>& grid) {
            return density_dict(cauchy_forecast(u_last, psi, grid));
        },
        py::arg("u_last"), py::arg("psi"), py::arg("grid"));

    m.def(
        "forecast",
        [](const std::vector<double>& history, std::vector<double> phi, std::vector<double> psi,
           const std::string& dist, double dof, double scale, double intercept, const std::string& method,
           std::size_t h, std::size_t N, std::size_t M, std::size_t grid_points, double grid_span, std::uint64_t seed,
           unsigned threads) {
            MarModel model = make_model(std::move(phi), std::move(psi), dist, dof, scale);
            model.intercept = intercept;
            const ForecastConfig cfg = make_config(N, M, grid_points, grid_span, seed, threads);
            const TimeSeries series(history);
            PredictiveDensity d;
            {
                py::gil_scoped_release release;
                if (method == "simulations")
                    d = simulations_forecast(model, series, h, cfg);
                else if (method == "sample")
                    d = sample_forecast(model, series, cfg);
                else
                    throw std::invalid_argument("method must be simulations or sample");
            }
            return density_dict(d);
        },
        py::arg("history"), py::arg("phi"), py::arg("psi"), py::arg("dist") = "student_t", py::arg("dof") = 2.0,
        py::arg("scale") = 1.0, py::arg("intercept") = 0.0, py::arg("method") = "simulations", py::arg("h") = 1,
        py::arg("N") = 100000, py::arg("M") = 100, py::arg("grid_points") = 1001, py::arg("grid_span") = 3.0,
        py::arg("seed") = 20200101, py::arg("threads") = 0);

    m.def(
        "prob_events",
        [](const std::vector<double>& grid, const std::vector<double>& cdf, double last_y, double sd) {
            PredictiveDensity d;
            d.grid = grid;
            d.cdf = cdf;
            d.target = ForecastTarget::Y;
            const EventProbabilities p = prob_events(d, last_y, sd);
            return py::make_tuple(p.p_decrease, p.p_decrease_1sd);
        },
        py::arg("grid"), py::arg("cdf"), py::arg("last_y"), py::arg("sd"));

    m.def(
        "cobubble",
        [](const std::vector<double>& y, const std::vector<double>& x, double lo, double hi, double step,
           std::size_t p_max, const std::string& criterion, unsigned threads) {
            CoBubbleOptions o;
            o.p_max = p_max;
            o.criterion = parse_criterion(criterion);
            o.threads = threads;
            o.estimate.compute_std_errors = false;
            CoBubbleResult r;
            {
                py::gil_scoped_release release;
                r = grid_search(y, x, DeltaGrid{lo, hi, step}, o);
            }
            std::ostringstream csv;
            io::write_cobubble_csv(csv, r);
            return py::make_tuple(dumps(io::to_json(r)), csv.str());
        },
        py::arg("y"), py::arg("x"), py::arg("lo") = -2.0, py::arg("hi") = 2.0, py::arg("step") = 0.01,
        py::arg("p_max") = 4, py::arg("criterion") = "bic", py::arg("threads") = 0);

    m.def(
        "run_cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "marcast");
            std::vector<const char*> argv;
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
