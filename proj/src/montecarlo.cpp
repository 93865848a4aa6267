#include "marcast/montecarlo.hpp"

#include "marcast/errors.hpp"
#include "marcast/forecast.hpp"
#include "marcast/parallel.hpp"
#include "marcast/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace marcast {

namespace {

using json = nlohmann::json;

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

struct Outcome {
    bool ok = false;
    std::size_t p = 0, r = 0, s = 0;
    double phi1 = nan_value, psi1 = nan_value, dof = nan_value;
};

struct RepResult {
    std::vector<double> mse;        // per detrender
    std::vector<Outcome> outcomes;  // raw (if enabled) then detrenders
};

enum class Needs { Mse, All };

Outcome classify(std::span<const double> series, const McConfig& config) {
    IdentifyOptions opts;
    opts.p_max = config.p_max;
    opts.criterion = config.criterion;
    opts.allow_zero = true;
    opts.estimate = config.estimate;
    opts.estimate.compute_std_errors = false;
    Outcome out;
    try {
        FittedMar fit = identify(series, DistKind::StudentT, opts);
        out.ok = true;
        out.p = fit.p_used;
        out.r = fit.model.r();
        out.s = fit.model.s();
        if (out.r > 0) out.phi1 = fit.model.phi[0];
        if (out.s > 0) out.psi1 = fit.model.psi[0];
        out.dof = fit.model.dist.dof;
    } catch (const NumericalError&) {
        out.ok = false;
    }
    return out;
}

RepResult run_replication(const McConfig& config, std::size_t dgp_index, std::size_t rep, Needs needs) {
    const DgpSpec& dgp = config.dgps[dgp_index];
    const std::uint64_t seed = derive_seed(config.master_seed, {dgp_index, rep});
    SimulationPath path = simulate_path(dgp.cycle, config.T, seed, config.burn);
    const std::vector<double> trend = dgp.trend.values(config.T);
    std::vector<double> y(config.T);
    for (std::size_t t = 0; t < config.T; ++t) y[t] = trend[t] + path.y[t];

    RepResult res;
    res.mse.reserve(config.detrenders.size());
    if (needs == Needs::All && config.include_raw) res.outcomes.push_back(classify(y, config));
    for (const TrendSpec& spec : config.detrenders) {
        TrendFit fit = detrend(y, spec);
        double acc = 0.0;
        for (std::size_t t = 0; t < config.T; ++t) {
            const double d = path.y[t] - fit.cycle[t];
            acc += d * d;
        }
        res.mse.push_back(acc / static_cast<double>(config.T));
        if (needs == Needs::All) res.outcomes.push_back(classify(fit.cycle, config));
    }
    return res;
}

std::vector<std::string> column_labels(const McConfig& config) {
    std::vector<std::string> cols;
    if (config.include_raw) cols.emplace_back("raw");
    for (const TrendSpec& spec : config.detrenders) cols.push_back(detrender_label(spec));
    return cols;
}

std::vector<RepResult> run_all_replications(const McConfig& config, Needs needs) {
    config.validate();
    const std::size_t reps = config.replications;
    std::vector<RepResult> results(config.dgps.size() * reps);
    parallel_for(results.size(), config.threads, [&](std::size_t task) {
        results[task] = run_replication(config, task / reps, task % reps, needs);
    });
    return results;
}

std::vector<MseRow> reduce_mse(const McConfig& config, const std::vector<RepResult>& results) {
    std::vector<MseRow> rows;
    const std::size_t reps = config.replications;
    for (std::size_t d = 0; d < config.dgps.size(); ++d) {
        for (std::size_t k = 0; k < config.detrenders.size(); ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < reps; ++i) acc += results[d * reps + i].mse[k];
            rows.push_back({config.dgps[d].name, detrender_label(config.detrenders[k]), acc / static_cast<double>(reps)});
        }
    }
    return rows;
}

std::vector<IdentRow> reduce_ident(const McConfig& config, const std::vector<RepResult>& results) {
    std::vector<IdentRow> rows;
    const std::size_t reps = config.replications;
    const std::vector<std::string> cols = column_labels(config);
    const double scale = 100.0 / static_cast<double>(reps);
    for (std::size_t d = 0; d < config.dgps.size(); ++d) {
        const std::size_t r0 = config.dgps[d].cycle.r(), s0 = config.dgps[d].cycle.s();
        for (std::size_t c = 0; c < cols.size(); ++c) {
            std::size_t p_wrong = 0, p_over = 0, mar_wrong = 0, s_zero = 0, s_pos = 0, failures = 0;
            for (std::size_t i = 0; i < reps; ++i) {
                const Outcome& o = results[d * reps + i].outcomes[c];
                if (!o.ok) {
                    ++failures;
                    ++p_wrong;
                    ++mar_wrong;
                    continue;
                }
                if (o.p != r0 + s0) ++p_wrong;
                if (o.p > r0 + s0) ++p_over;
                if (o.r != r0 || o.s != s0) ++mar_wrong;
                if (o.s == 0) ++s_zero;
                if (o.s > 0) ++s_pos;
            }
            IdentRow row;
            row.dgp = config.dgps[d].name;
            row.column = cols[c];
            row.p_wrong = scale * static_cast<double>(p_wrong);
            row.p_over = scale * static_cast<double>(p_over);
            row.mar_wrong = scale * static_cast<double>(mar_wrong);
            if (s0 >= 1) row.s_zero = scale * static_cast<double>(s_zero);
            if (s0 == 0) row.s_positive = scale * static_cast<double>(s_pos);
            row.failures = failures;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<CoeffRow> reduce_coeff(const McConfig& config, const std::vector<RepResult>& results) {
    std::vector<CoeffRow> rows;
    const std::size_t reps = config.replications;
    const std::vector<std::string> cols = column_labels(config);
    for (std::size_t d = 0; d < config.dgps.size(); ++d) {
        const MarModel& truth = config.dgps[d].cycle;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            std::vector<double> phi, psi, dof;
            for (std::size_t i = 0; i < reps; ++i) {
                const Outcome& o = results[d * reps + i].outcomes[c];
                if (!o.ok || o.r != truth.r() || o.s != truth.s()) continue;
                if (o.r > 0) phi.push_back(o.phi1);
                if (o.s > 0) psi.push_back(o.psi1);
                dof.push_back(o.dof);
            }
            const std::string& name = config.dgps[d].name;
            if (truth.r() > 0) rows.push_back({name, cols[c], "phi1", five_number_summary(std::move(phi))});
            if (truth.s() > 0) rows.push_back({name, cols[c], "psi1", five_number_summary(std::move(psi))});
            rows.push_back({name, cols[c], "gamma", five_number_summary(std::move(dof))});
        }
    }
    return rows;
}

std::vector<double> read_vector(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array()) throw DataError(std::string("trend file: missing array '") + key + "'");
    std::vector<double> out;
    for (const auto& v : j.at(key)) {
        if (!v.is_number()) throw DataError(std::string("trend file: non-numeric entry in '") + key + "'");
        out.push_back(v.get<double>());
    }
    return out;
}

double read_number(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) throw DataError(std::string("trend file: missing number '") + key + "'");
    return j.at(key).get<double>();
}

}  // namespace

DgpTrend DgpTrend::none() { return {}; }

DgpTrend DgpTrend::polynomial(std::string label, std::vector<double> coefficients) {
    DgpTrend t;
    t.kind = Kind::Polynomial;
    t.label = std::move(label);
    t.coefficients = std::move(coefficients);
    return t;
}

DgpTrend DgpTrend::breaks(std::string label, double level, double slope, std::vector<std::size_t> break_times,
                          std::vector<double> kinks, std::vector<double> jumps) {
    DgpTrend t;
    t.kind = Kind::Breaks;
    t.label = std::move(label);
    t.level = level;
    t.slope = slope;
    t.break_times = std::move(break_times);
    t.kinks = std::move(kinks);
    t.jumps = std::move(jumps);
    return t;
}

void DgpTrend::validate(std::size_t length) const {
    switch (kind) {
        case Kind::None:
            return;
        case Kind::Polynomial:
            if (coefficients.empty()) throw std::invalid_argument("polynomial trend needs coefficients");
            for (double c : coefficients)
                if (!std::isfinite(c)) throw std::invalid_argument("polynomial trend coefficients must be finite");
            return;
        case Kind::Breaks:
            if (break_times.size() != kinks.size()) throw std::invalid_argument("one kink per break time required");
            if (!jumps.empty() && jumps.size() != break_times.size())
                throw std::invalid_argument("jumps must be empty or one per break time");
            for (std::size_t b = 0; b < break_times.size(); ++b) {
                if (break_times[b] < 2 || break_times[b] > length)
                    throw std::invalid_argument("break time outside the sample");
                if (b > 0 && break_times[b] <= break_times[b - 1])
                    throw std::invalid_argument("break times must be strictly increasing");
            }
            return;
    }
}

std::vector<double> DgpTrend::values(std::size_t length) const {
    switch (kind) {
        case Kind::None:
            return std::vector<double>(length, 0.0);
        case Kind::Polynomial: {
            std::vector<double> out(length);
            for (std::size_t t = 1; t <= length; ++t)
                out[t - 1] = eval_scaled_polynomial(coefficients, static_cast<double>(t), length);
            return out;
        }
        case Kind::Breaks:
            return piecewise_linear_trend(level, slope, break_times, kinks, length, jumps);
    }
    return {};
}

void McConfig::validate() const {
    if (replications < 1) throw std::invalid_argument("replications must be at least 1");
    if (detrenders.empty()) throw std::invalid_argument("at least one detrender is required");
    if (dgps.empty()) throw std::invalid_argument("at least one dgp is required");
    if (T < p_max + 10) throw std::invalid_argument("sample length too short for p_max");
    if (burn < 50) throw std::invalid_argument("burn must be at least 50");
    for (const DgpSpec& d : dgps) {
        if (!d.cycle.is_stationary()) throw std::invalid_argument("dgp cycle is not stationary: " + d.name);
        d.trend.validate(T);
    }
}

std::string detrender_label(const TrendSpec& spec) {
    if (spec.method == TrendMethod::HP) {
        if (spec.lambda == 14400.0) return "HP1";
        if (spec.lambda == 129600.0) return "HP2";
    }
    return spec.name();
}

FiveNumber five_number_summary(std::vector<double> values) {
    FiveNumber f;
    f.count = values.size();
    if (values.empty()) {
        f.min = f.q1 = f.median = f.q3 = f.max = nan_value;
        return f;
    }
    std::sort(values.begin(), values.end());
    f.min = values.front();
    f.max = values.back();
    f.q1 = sample_quantile(values, 0.25);
    f.median = sample_quantile(values, 0.5);
    f.q3 = sample_quantile(values, 0.75);
    return f;
}

std::vector<MseRow> run_mse(const McConfig& config) {
    return reduce_mse(config, run_all_replications(config, Needs::Mse));
}

std::vector<IdentRow> run_identification(const McConfig& config) {
    return reduce_ident(config, run_all_replications(config, Needs::All));
}

std::vector<CoeffRow> run_coefficients(const McConfig& config) {
    return reduce_coeff(config, run_all_replications(config, Needs::All));
}

McReport run_monte_carlo(const McConfig& config) {
    const std::vector<RepResult> results = run_all_replications(config, Needs::All);
    McReport report;
    report.replications = config.replications;
    report.T = config.T;
    report.master_seed = config.master_seed;
    for (const DgpSpec& d : config.dgps) report.trend_labels.push_back(d.trend.label);
    report.mse_table = reduce_mse(config, results);
    report.ident_table = reduce_ident(config, results);
    report.coeff_summaries = reduce_coeff(config, results);
    return report;
}

McTrendFile parse_trend_file(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("trend file: ") + e.what());
    }
    if (!j.is_object()) throw DataError("trend file: top level must be an object");
    McTrendFile f;
    if (j.contains("T")) {
        if (!j.at("T").is_number_integer() || j.at("T").get<long long>() < 20) throw DataError("trend file: bad 'T'");
        f.T = j.at("T").get<std::size_t>();
    }
    if (j.contains("description") && j.at("description").is_string()) f.description = j.at("description");
    f.tau4 = DgpTrend::polynomial("tau4", read_vector(j, "tau4"));
    f.tau6 = DgpTrend::polynomial("tau6", read_vector(j, "tau6"));
    if (f.tau4.coefficients.size() != 5) throw DataError("trend file: 'tau4' needs 5 coefficients");
    if (f.tau6.coefficients.size() != 7) throw DataError("trend file: 'tau6' needs 7 coefficients");
    if (!j.contains("breaks") || !j.at("breaks").is_object()) throw DataError("trend file: missing object 'breaks'");
    const json& b = j.at("breaks");
    std::vector<std::size_t> times;
    for (double v : read_vector(b, "break_times")) {
        if (v < 2 || v != std::floor(v)) throw DataError("trend file: break times must be integers >= 2");
        times.push_back(static_cast<std::size_t>(v));
    }
    std::vector<double> jumps = b.contains("jumps") ? read_vector(b, "jumps") : std::vector<double>{};
    f.breaks = DgpTrend::breaks("breaks", read_number(b, "level"), read_number(b, "slope"), std::move(times),
                                read_vector(b, "kinks"), std::move(jumps));
    try {
        f.breaks.validate(f.T);
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("trend file: ") + e.what());
    }
    return f;
}

McTrendFile load_trend_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open trend file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_trend_file(ss.str());
}

McConfig default_design_config(const McTrendFile& trends) {
    McConfig config;
    config.T = trends.T;
    const ErrorDist t2 = ErrorDist::student_t(2.0);
    const std::vector<std::pair<std::string, MarModel>> cycles = {
        {"MAR(0,1)", MarModel{{}, {0.8}, t2, 0.0}},
        {"MAR(1,1)", MarModel{{0.6}, {0.8}, t2, 0.0}},
        {"MAR(1,0)", MarModel{{0.6}, {}, t2, 0.0}},
    };
    const std::vector<DgpTrend> trend_list = {DgpTrend::none(), trends.tau4, trends.tau6, trends.breaks};
    for (const auto& [cname, model] : cycles)
        for (const DgpTrend& tr : trend_list) config.dgps.push_back({cname + " + " + tr.label, model, tr});
    config.detrenders = {TrendSpec::polynomial(4), TrendSpec::polynomial(6), TrendSpec::hp(14400.0),
                         TrendSpec::hp(129600.0)};
    return config;
}

McConfig default_design_config(const std::string& trend_file) { return default_design_config(load_trend_file(trend_file)); }

}  // namespace marcast
