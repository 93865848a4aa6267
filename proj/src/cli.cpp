#include "marcast/cli.hpp"

#include "marcast/cobubble.hpp"
#include "marcast/detrend.hpp"
#include "marcast/errors.hpp"
#include "marcast/forecast.hpp"
#include "marcast/io.hpp"
#include "marcast/mar.hpp"
#include "marcast/montecarlo.hpp"
#include "marcast/rng.hpp"
#include "marcast/timeseries.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#ifndef MARCAST_DEFAULT_TREND_FILE
#define MARCAST_DEFAULT_TREND_FILE "data/mc_trends_default.json"
#endif

namespace marcast::cli {

namespace {

using io::json;

/// Reads JSON config files into CLI11 items. Objects nest into subcommand sections.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
        nlohmann::ordered_json j = nlohmann::ordered_json::object();
        dump(app, default_also, j);
        return j.dump(2) + "\n";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(input);
        } catch (const nlohmann::json::parse_error& e) {
            throw CLI::ConversionError("config file is not valid JSON: " + std::string(e.what()));
        }
        if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
        std::vector<CLI::ConfigItem> items;
        collect(j, {}, items);
        return items;
    }

private:
    static std::string scalar(const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    }

    static void collect(const nlohmann::json& obj, std::vector<std::string> parents,
                        std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : obj.items()) {
            if (value.is_object()) {
                auto sub = parents;
                sub.push_back(key);
                collect(value, sub, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array())
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            else
                item.inputs.push_back(scalar(value));
            items.push_back(std::move(item));
        }
    }

    static void dump(const CLI::App* app, bool default_also, nlohmann::ordered_json& j) {
        for (const CLI::Option* opt : app->get_options()) {
            if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
            const std::string name = opt->get_lnames().front();
            if (opt->count() > 0) {
                const auto& res = opt->results();
                j[name] = res.size() == 1 ? nlohmann::ordered_json(res.front()) : nlohmann::ordered_json(res);
            } else if (default_also && !opt->get_default_str().empty()) {
                j[name] = opt->get_default_str();
            }
        }
        for (const CLI::App* sub : app->get_subcommands({})) {
            nlohmann::ordered_json s = nlohmann::ordered_json::object();
            dump(sub, default_also, s);
            if (!s.empty()) j[sub->get_name()] = s;
        }
    }
};

struct Globals {
    std::uint64_t seed = 20200101;
    unsigned threads = 0;
};

struct InputArgs {
    std::string path;
    std::string column = "value";
    std::string date_column;
    std::string cpi_path;
    std::string cpi_column = "value";
    std::string base_period;

    void add(CLI::App* app, const std::string& flag = "--input", const std::string& prefix = "") {
        app->add_option(flag, path, "CSV file with a header row")->required();
        app->add_option("--" + prefix + "column", column, "value column name")->capture_default_str();
        app->add_option("--" + prefix + "date-column", date_column,
                        "date column name (default: 'date' when present)");
        if (prefix.empty()) {
            app->add_option("--cpi", cpi_path, "price index CSV used to deflate the series");
            app->add_option("--cpi-column", cpi_column, "value column of the price index")->capture_default_str();
            app->add_option("--base-period", base_period, "deflation base month (default: last month)");
        }
    }
};

struct TrendArgs {
    std::string method = "none";
    int order = 0;
    double lambda = 129600.0;
    std::vector<std::string> breaks;

    void add(CLI::App* app, const std::string& default_method) {
        method = default_method;
        app->add_option("--method", method, "trend: none, intercept, poly, breaks, step, hp")
            ->check(CLI::IsMember({"none", "intercept", "poly", "polynomial", "breaks", "step", "hp"}))
            ->capture_default_str();
        app->add_option("--order", order, "polynomial order")->check(CLI::Range(0, 12));
        app->add_option("--lambda", lambda, "HP penalty")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--breaks", breaks, "break points: months (YYYY-MM) or 1-based observation indices")
            ->delimiter(',');
    }
};

std::string read_header(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::string line;
    std::getline(in, line);
    return line;
}

bool header_has(const std::string& header, const std::string& name) {
    std::stringstream ss(header);
    std::string cellv;
    while (std::getline(ss, cellv, ',')) {
        while (!cellv.empty() && (cellv.back() == '\r' || cellv.back() == ' ')) cellv.pop_back();
        std::size_t start = cellv.find_first_not_of(" \"");
        std::size_t end = cellv.find_last_not_of(" \"");
        if (start != std::string::npos && cellv.substr(start, end - start + 1) == name) return true;
    }
    return false;
}

TimeSeries load_series(const std::string& path, const std::string& column, const std::string& date_column) {
    std::optional<std::string> dates;
    if (!date_column.empty())
        dates = date_column;
    else if (header_has(read_header(path), "date"))
        dates = "date";
    return load_csv(path, column, dates);
}

TimeSeries load_input(const InputArgs& a) {
    TimeSeries s = load_series(a.path, a.column, a.date_column);
    if (a.cpi_path.empty()) return s;
    if (!s.has_timestamps()) throw DataError("deflation needs a dated series");
    TimeSeries cpi = load_series(a.cpi_path, a.cpi_column, "");
    if (!cpi.has_timestamps()) throw DataError("price index file needs a date column");
    const YearMonth base = a.base_period.empty() ? s.timestamps()->back() : YearMonth::parse(a.base_period);
    return deflate(s, DeflationIndex::from_series(cpi), base);
}

std::vector<std::size_t> resolve_breaks(const std::vector<std::string>& tokens, const TimeSeries& s) {
    std::vector<std::size_t> out;
    for (const std::string& tok : tokens) {
        const bool is_index = !tok.empty() && tok.find_first_not_of("0123456789") == std::string::npos;
        if (is_index) {
            out.push_back(static_cast<std::size_t>(std::stoull(tok)));
            continue;
        }
        YearMonth ym;
        try {
            ym = YearMonth::parse(tok);
        } catch (const std::exception&) {
            throw std::invalid_argument("cannot parse break point: " + tok);
        }
        const auto pos = s.find(ym);
        if (!pos) throw std::invalid_argument("break month outside the sample: " + tok);
        out.push_back(*pos + 1);
    }
    return out;
}

/// nullopt for "none".
std::optional<TrendSpec> trend_spec(const TrendArgs& a, const TimeSeries& s) {
    if (a.method == "none") return std::nullopt;
    if (a.method == "intercept") return TrendSpec::intercept();
    if (a.method == "poly" || a.method == "polynomial") {
        if (a.order < 1) throw std::invalid_argument("--method poly needs --order >= 1");
        return TrendSpec::polynomial(a.order);
    }
    if (a.method == "hp") return TrendSpec::hp(a.lambda);
    if (a.breaks.empty()) throw std::invalid_argument("--method " + a.method + " needs --breaks");
    auto times = resolve_breaks(a.breaks, s);
    return a.method == "breaks" ? TrendSpec::breaks(std::move(times)) : TrendSpec::step(std::move(times));
}

/// Cycle used for modeling: detrended values, or the series itself for "none".
std::vector<double> model_input(const std::optional<TrendSpec>& spec, std::span<const double> values,
                                std::optional<TrendFit>* fit_out = nullptr) {
    if (!spec) return {values.begin(), values.end()};
    TrendFit fit = detrend(values, *spec);
    std::vector<double> cycle = fit.cycle;
    if (fit_out) *fit_out = std::move(fit);
    return cycle;
}

json series_info(const TimeSeries& s, const std::string& path) {
    json j;
    j["file"] = std::filesystem::path(path).filename().string();
    j["label"] = s.label();
    j["length"] = s.size();
    if (s.has_timestamps()) {
        j["first"] = s.timestamps()->front().to_string();
        j["last"] = s.timestamps()->back().to_string();
    }
    return j;
}

std::string output_path(const std::string& prefix, const std::string& suffix) {
    const std::filesystem::path p(prefix + suffix);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    return p.string();
}

void emit(std::ostream& out, const std::string& path, const std::string& text) {
    io::write_file(path, text);
    out << "wrote " << path << '\n';
}

struct ModelArgs {
    std::string dist = "student_t";
    std::size_t p_max = 4;
    std::string criterion = "bic";
    std::vector<std::size_t> orders;
    std::size_t starts = 8;

    void add(CLI::App* app) {
        app->add_option("--dist", dist, "error law: student_t or cauchy")
            ->check(CLI::IsMember({"student_t", "t", "student", "cauchy"}))
            ->capture_default_str();
        app->add_option("--pmax", p_max, "largest pseudo lag order")->check(CLI::Range(0, 12))->capture_default_str();
        app->add_option("--criterion", criterion, "bic, aic or hq")
            ->check(CLI::IsMember({"bic", "aic", "hq", "BIC", "AIC", "HQ"}))
            ->capture_default_str();
        app->add_option("--orders", orders, "fixed r,s (skips identification)")->expected(2)->delimiter(',');
        app->add_option("--starts", starts, "lattice starting points")->check(CLI::Range(1, 64))->capture_default_str();
    }

    [[nodiscard]] EstimateOptions estimate_options() const {
        EstimateOptions e;
        e.starts = starts;
        return e;
    }

    [[nodiscard]] FittedMar fit(std::span<const double> cycle) const {
        const DistKind kind = parse_dist_kind(dist);
        if (orders.size() == 2) return estimate(cycle, orders[0], orders[1], kind, estimate_options());
        IdentifyOptions opts;
        opts.p_max = p_max;
        opts.criterion = parse_criterion(criterion);
        opts.estimate = estimate_options();
        return identify(cycle, kind, opts);
    }
};

// ---- detrend ---------------------------------------------------------------

struct DetrendCmd {
    InputArgs input;
    TrendArgs trend;
    std::string output = "detrend";

    void add(CLI::App* app) {
        input.add(app);
        trend.add(app, "hp");
        app->add_option("-o,--output", output, "output prefix")->capture_default_str();
    }

    int run(std::ostream& out) const {
        const TimeSeries s = load_input(input);
        const auto spec = trend_spec(trend, s);
        if (!spec) throw std::invalid_argument("detrend needs a --method other than none");
        const TrendFit fit = detrend(s.values(), *spec);
        std::ostringstream csv;
        io::write_trend_csv(csv, fit, s.timestamps());
        json j;
        j["input"] = series_info(s, input.path);
        j["trend"] = io::to_json(fit);
        emit(out, output_path(output, ".csv"), csv.str());
        emit(out, output_path(output, ".json"), j.dump(2) + "\n");
        return Success;
    }
};

// ---- fit -------------------------------------------------------------------

struct FitCmd {
    InputArgs input;
    TrendArgs trend;
    ModelArgs model;
    bool no_se = false;
    std::string output = "fit";

    void add(CLI::App* app) {
        input.add(app);
        trend.add(app, "none");
        model.add(app);
        app->add_flag("--no-se", no_se, "skip standard errors");
        app->add_option("-o,--output", output, "output prefix")->capture_default_str();
    }

    int run(std::ostream& out) const {
        const TimeSeries s = load_input(input);
        const auto spec = trend_spec(trend, s);
        const std::vector<double> cycle = model_input(spec, s.values());
        ModelArgs m = model;
        FittedMar fit = m.fit(cycle);
        if (no_se) fit.std_errors.reset();
        json j;
        j["input"] = series_info(s, input.path);
        j["trend"] = spec ? io::to_json(*spec) : json("none");
        if (model.orders.size() != 2) {
            const OrderSelection sel = select_pseudo_order(cycle, model.p_max, parse_criterion(model.criterion));
            json crit = json::array();
            for (double v : sel.criterion_values) crit.push_back(io::number(v));
            j["pseudo_order"] = {{"criterion", to_string(sel.criterion)}, {"p", sel.p}, {"values", crit}};
        }
        j["fit"] = io::to_json(fit);
        std::ostringstream csv;
        io::write_residuals_csv(csv, fit);
        emit(out, output_path(output, ".json"), j.dump(2) + "\n");
        emit(out, output_path(output, "_residuals.csv"), csv.str());
        out << "MAR(" << fit.model.r() << "," << fit.model.s() << ") loglik " << format_double(fit.loglik) << '\n';
        return Success;
    }
};

// ---- forecast --------------------------------------------------------------

struct ForecastCmd {
    InputArgs input;
    TrendArgs trend;
    ModelArgs model;
    std::string mode = "expost";
    std::string fit_end;
    std::vector<std::string> periods;
    std::vector<std::string> methods{"simulations", "sample"};
    std::size_t N = 1'000'000;
    std::size_t M = 100;
    std::size_t grid_points = 1001;
    double grid_span = 3.0;
    std::string output = "forecast";

    void add(CLI::App* app) {
        input.add(app);
        trend.add(app, "hp");
        model.add(app);
        app->add_option("--mode", mode, "expost (frozen parameters) or realtime (expanding window)")
            ->check(CLI::IsMember({"expost", "realtime"}))
            ->capture_default_str();
        app->add_option("--fit-end", fit_end, "last month of the estimation sample in expost mode (default: last)");
        app->add_option("--periods", periods, "target months (YYYY-MM), each forecast one step ahead")
            ->required()
            ->delimiter(',');
        app->add_option("--methods", methods, "simulations, sample")
            ->check(CLI::IsMember({"simulations", "sample"}))
            ->delimiter(',')
            ->capture_default_str();
        app->add_option("--N", N, "simulated error paths")->check(CLI::Range(std::size_t{1000}, std::size_t{100'000'000}))
            ->capture_default_str();
        app->add_option("--M", M, "truncation of future errors")->check(CLI::Range(std::size_t{10}, std::size_t{10'000}))
            ->capture_default_str();
        app->add_option("--grid-points", grid_points, "density grid size")
            ->check(CLI::Range(std::size_t{101}, std::size_t{1'000'000}))
            ->capture_default_str();
        app->add_option("--grid-span", grid_span, "grid padding in sample s.d.")->check(CLI::PositiveNumber)
            ->capture_default_str();
        app->add_option("-o,--output", output, "output prefix")->capture_default_str();
    }

    struct Prepared {
        std::vector<double> cycle;  // fitted window
        FittedMar fit;
        double sd = 0.0;
        YearMonth window_end;
    };

    Prepared prepare(const TimeSeries& window, const std::optional<TrendSpec>& spec) const {
        Prepared p;
        p.cycle = model_input(spec, window.values());
        ModelArgs m = model;
        p.fit = m.fit(p.cycle);
        p.fit.std_errors.reset();
        if (p.fit.model.s() != 1)
            throw NumericalError("forecast estimators need exactly one lead; identified MAR(" +
                                 std::to_string(p.fit.model.r()) + "," + std::to_string(p.fit.model.s()) +
                                 "); use --orders to fix the model");
        p.sd = empirical_sd(p.cycle);
        p.window_end = window.timestamps()->back();
        return p;
    }

    int run(std::ostream& out, const Globals& g) const {
        const TimeSeries s = load_input(input);
        if (!s.has_timestamps()) throw DataError("forecast needs a dated series");
        std::vector<YearMonth> targets;
        for (const auto& p : periods) {
            try {
                targets.push_back(YearMonth::parse(p));
            } catch (const std::exception&) {
                throw std::invalid_argument("cannot parse period: " + p);
            }
        }
        std::sort(targets.begin(), targets.end());
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

        const auto spec = trend_spec(trend, s);
        ForecastConfig cfg;
        cfg.N = N;
        cfg.M = M;
        cfg.grid_points = grid_points;
        cfg.grid_span = grid_span;
        cfg.threads = g.threads;
        cfg.validate();

        std::optional<Prepared> frozen;
        if (mode == "expost") {
            const YearMonth end = fit_end.empty() ? s.timestamps()->back() : YearMonth::parse(fit_end);
            if (!s.find(end)) throw std::invalid_argument("--fit-end outside the sample");
            frozen = prepare(s.through(end), spec);
        }

        std::ostringstream longcsv, table, dens;
        longcsv << "period,origin,mode,method,r,s,last_cycle,sd,p_decrease,p_decrease_1sd,effective_sample_size,raw_mass\n";
        table << "period";
        for (const auto& m : methods) table << ',' << m << "_p_decrease," << m << "_p_decrease_1sd";
        table << '\n';
        dens << "period,method,x,pdf,cdf\n";
        json periods_json = json::array();

        for (const YearMonth& target : targets) {
            const YearMonth origin = target.plus(-1);
            const auto pos = s.find(origin);
            if (!pos) throw std::invalid_argument("forecast origin " + origin.to_string() + " is outside the data");
            Prepared local;
            const Prepared* prep = nullptr;
            std::vector<double> history;
            if (frozen) {
                if (origin > frozen->window_end)
                    throw std::invalid_argument("expost origin " + origin.to_string() + " lies after --fit-end");
                prep = &*frozen;
                history.assign(frozen->cycle.begin(), frozen->cycle.begin() + static_cast<std::ptrdiff_t>(*pos + 1));
            } else {
                local = prepare(s.through(origin), spec);
                prep = &local;
                history = local.cycle;
            }
            const MarModel& mdl = prep->fit.model;
            ForecastConfig pc = cfg;
            pc.seed = derive_seed(g.seed, {static_cast<std::uint64_t>(target.index())});
            const ForecastState st = forecast_state(mdl, history);
            const std::vector<double> grid = default_grid(history, pc);

            table << target.to_string();
            json pj;
            pj["period"] = target.to_string();
            pj["origin"] = origin.to_string();
            pj["model"] = io::to_json(mdl);
            pj["loglik"] = io::number(prep->fit.loglik);
            json dj = json::array();
            for (const auto& method : methods) {
                const PredictiveDensity d = method == "simulations" ? simulations_forecast(mdl, st, 1, pc, grid)
                                                                    : sample_forecast(mdl, st, grid);
                const EventProbabilities ev = prob_events(d, history.back(), prep->sd);
                longcsv << target.to_string() << ',' << origin.to_string() << ',' << mode << ',' << method << ','
                        << mdl.r() << ',' << mdl.s() << ',' << io::cell(history.back()) << ',' << io::cell(prep->sd)
                        << ',' << io::cell(ev.p_decrease) << ',' << io::cell(ev.p_decrease_1sd) << ','
                        << (method == "simulations" ? io::cell(d.effective_sample_size) : std::string{}) << ','
                        << (method == "sample" ? io::cell(d.raw_mass) : std::string{}) << '\n';
                table << ',' << io::cell(ev.p_decrease) << ',' << io::cell(ev.p_decrease_1sd);
                for (std::size_t i = 0; i < d.grid.size(); ++i) {
                    dens << target.to_string() << ',' << method << ',' << io::cell(d.grid[i]) << ',';
                    if (!d.pdf.empty()) dens << io::cell(d.pdf[i]);
                    dens << ',' << io::cell(d.cdf[i]) << '\n';
                }
                json one = io::to_json(d);
                one["p_decrease"] = io::number(ev.p_decrease);
                one["p_decrease_1sd"] = io::number(ev.p_decrease_1sd);
                dj.push_back(one);
            }
            table << '\n';
            pj["densities"] = dj;
            periods_json.push_back(pj);
        }

        json j;
        j["input"] = series_info(s, input.path);
        j["trend"] = spec ? io::to_json(*spec) : json("none");
        j["mode"] = mode;
        j["seed"] = g.seed;
        j["N"] = N;
        j["M"] = M;
        j["periods"] = periods_json;
        emit(out, output_path(output, ".csv"), longcsv.str());
        emit(out, output_path(output, "_table.csv"), table.str());
        emit(out, output_path(output, "_density.csv"), dens.str());
        emit(out, output_path(output, ".json"), j.dump(2) + "\n");
        return Success;
    }
};

// ---- mc --------------------------------------------------------------------

struct McCmd {
    std::string trends = MARCAST_DEFAULT_TREND_FILE;
    std::size_t reps = 500;
    std::size_t T = 0;
    std::size_t p_max = 4;
    std::string criterion = "bic";
    std::vector<std::string> dgps;
    std::vector<std::string> detrenders{"t4", "t6", "hp14400", "hp129600"};
    bool no_raw = false;
    std::size_t burn = 100;
    std::string output = "mc";

    void add(CLI::App* app) {
        app->add_option("--trends", trends, "trend coefficient file (JSON)")->capture_default_str();
        app->add_option("--reps", reps, "replications per dgp")->check(CLI::Range(std::size_t{1}, std::size_t{1'000'000}))
            ->capture_default_str();
        app->add_option("--T", T, "sample length (default: from the trend file)");
        app->add_option("--pmax", p_max, "largest pseudo lag order")->check(CLI::Range(0, 12))->capture_default_str();
        app->add_option("--criterion", criterion, "bic, aic or hq")
            ->check(CLI::IsMember({"bic", "aic", "hq", "BIC", "AIC", "HQ"}))
            ->capture_default_str();
        app->add_option("--dgps", dgps, "keep only dgps whose name contains one of these strings (repeatable)");
        app->add_option("--detrenders", detrenders, "t<k>, hp<lambda>")->delimiter(',')->capture_default_str();
        app->add_flag("--no-raw", no_raw, "skip identification on undetrended series");
        app->add_option("--burn", burn, "simulation burn-in")->check(CLI::Range(std::size_t{50}, std::size_t{100'000}))
            ->capture_default_str();
        app->add_option("-o,--output", output, "output prefix")->capture_default_str();
    }

    int run(std::ostream& out, const Globals& g) const {
        McConfig c = default_design_config(trends);
        if (T > 0) c.T = T;
        c.replications = reps;
        c.p_max = p_max;
        c.criterion = parse_criterion(criterion);
        c.include_raw = !no_raw;
        c.burn = burn;
        c.master_seed = g.seed;
        c.threads = g.threads;
        c.detrenders.clear();
        for (const auto& d : detrenders) c.detrenders.push_back(io::parse_trend_name(d));
        if (!dgps.empty()) {
            std::vector<DgpSpec> keep;
            for (const auto& d : c.dgps)
                if (std::any_of(dgps.begin(), dgps.end(), [&](const std::string& f) { return d.name.find(f) != std::string::npos; }))
                    keep.push_back(d);
            if (keep.empty()) throw std::invalid_argument("--dgps matched no dgp");
            c.dgps = std::move(keep);
        }
        const McReport report = run_monte_carlo(c);
        std::ostringstream mse, ident, coeff;
        io::write_mse_csv(mse, report.mse_table);
        io::write_ident_csv(ident, report.ident_table);
        io::write_coeff_csv(coeff, report.coeff_summaries);
        json j = io::to_json(report);
        j["p_max"] = c.p_max;
        j["criterion"] = to_string(c.criterion);
        j["trend_file"] = std::filesystem::path(trends).filename().string();
        emit(out, output_path(output, "_mse.csv"), mse.str());
        emit(out, output_path(output, "_ident.csv"), ident.str());
        emit(out, output_path(output, "_coeff.csv"), coeff.str());
        emit(out, output_path(output, ".json"), j.dump(2) + "\n");
        return Success;
    }
};

// ---- cobubble --------------------------------------------------------------

struct CoBubbleCmd {
    InputArgs y, x;
    TrendArgs trend;
    ModelArgs model;
    double lo = -2.0, hi = 2.0, step = 0.01;
    std::string output = "cobubble";

    void add(CLI::App* app) {
        y.add(app, "--y", "y-");
        x.add(app, "--x", "x-");
        trend.add(app, "none");
        model.add(app);
        app->add_option("--lo", lo, "grid start")->capture_default_str();
        app->add_option("--hi", hi, "grid end")->capture_default_str();
        app->add_option("--step", step, "grid step")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("-o,--output", output, "output prefix")->capture_default_str();
    }

    int run(std::ostream& out, const Globals& g) const {
        const TimeSeries ys = load_input(y), xs = load_input(x);
        if (ys.size() != xs.size()) throw DataError("cobubble: series lengths differ");
        const auto spec_y = trend_spec(trend, ys);
        const auto spec_x = trend_spec(trend, xs);
        const TimeSeries yc = ys.with_values(model_input(spec_y, ys.values()));
        const TimeSeries xc = xs.with_values(model_input(spec_x, xs.values()));
        CoBubbleOptions opt;
        opt.p_max = model.p_max;
        opt.criterion = parse_criterion(model.criterion);
        opt.dist = parse_dist_kind(model.dist);
        opt.threads = g.threads;
        opt.estimate = model.estimate_options();
        const CoBubbleResult res = grid_search(yc, xc, DeltaGrid{lo, hi, step}, opt);
        std::ostringstream csv;
        io::write_cobubble_csv(csv, res);
        json j;
        j["y"] = series_info(ys, y.path);
        j["x"] = series_info(xs, x.path);
        j["trend"] = spec_y ? io::to_json(*spec_y) : json("none");
        j["grid"] = {{"lo", lo}, {"hi", hi}, {"step", step}};
        j["result"] = io::to_json(res);
        emit(out, output_path(output, ".csv"), csv.str());
        emit(out, output_path(output, ".json"), j.dump(2) + "\n");
        out << "best delta " << format_double(res.best_delta) << " (" << to_string(res.null_class) << ")\n";
        return Success;
    }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Mixed causal-noncausal autoregressions: detrending, estimation, forecasting"};
    app.name("marcast");
    app.require_subcommand(1);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON option file; command-line flags take precedence");
    app.allow_config_extras(CLI::config_extras_mode::error);

    Globals g;
    app.add_option("--seed", g.seed, "master random seed")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads (0 = all cores)")->capture_default_str();

    DetrendCmd detrend_cmd;
    FitCmd fit_cmd;
    ForecastCmd forecast_cmd;
    McCmd mc_cmd;
    CoBubbleCmd cobubble_cmd;
    auto* sub_detrend = app.add_subcommand("detrend", "extract a trend and write trend/cycle tables");
    auto* sub_fit = app.add_subcommand("fit", "identify and estimate a MAR(r,s)");
    auto* sub_forecast = app.add_subcommand("forecast", "one-step predictive densities and event probabilities");
    auto* sub_mc = app.add_subcommand("mc", "Monte Carlo study of detrending effects");
    auto* sub_cobubble = app.add_subcommand("cobubble", "grid search for a common bubble");
    detrend_cmd.add(sub_detrend);
    fit_cmd.add(sub_fit);
    forecast_cmd.add(sub_forecast);
    mc_cmd.add(sub_mc);
    cobubble_cmd.add(sub_cobubble);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? Success : Usage;
    }

    try {
        if (sub_detrend->parsed()) return detrend_cmd.run(out);
        if (sub_fit->parsed()) return fit_cmd.run(out);
        if (sub_forecast->parsed()) return forecast_cmd.run(out, g);
        if (sub_mc->parsed()) return mc_cmd.run(out, g);
        if (sub_cobubble->parsed()) return cobubble_cmd.run(out, g);
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << '\n';
        return Usage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return Data;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return Numerical;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "data error: " << e.what() << '\n';
        return Data;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return Numerical;
    }
    return Usage;
}

}  // namespace marcast::cli
