#include "marcast/io.hpp"

#include "marcast/errors.hpp"

#include <cmath>
#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

namespace marcast::io {

namespace {

std::string method_name(TrendMethod m) {
    switch (m) {
        case TrendMethod::Intercept: return "intercept";
        case TrendMethod::Polynomial: return "polynomial";
        case TrendMethod::Breaks: return "breaks";
        case TrendMethod::Step: return "step";
        case TrendMethod::HP: return "hp";
    }
    return "unknown";
}

/// Quote a CSV text field when it holds a separator or quote.
std::string text_field(const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) return v;
    std::string q = "\"";
    for (char c : v) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

json numbers(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

}  // namespace

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string cell(double v) { return std::isfinite(v) ? format_double(v) : std::string{}; }

json to_json(const TrendSpec& spec) {
    json j;
    j["name"] = spec.name();
    j["method"] = method_name(spec.method);
    if (spec.method == TrendMethod::Polynomial) j["order"] = spec.order;
    if (spec.method == TrendMethod::HP) j["lambda"] = spec.lambda;
    if (!spec.break_times.empty()) j["break_times"] = spec.break_times;
    return j;
}

json to_json(const TrendFit& fit) {
    json j;
    j["spec"] = to_json(fit.spec);
    j["length"] = fit.observed.size();
    if (!fit.coefficients.empty()) {
        j["coefficients"] = numbers(fit.coefficients);
        j["basis"] = {{"time_origin", fit.time_origin}, {"time_span", fit.time_span}};
    }
    double ss = 0.0;
    for (double c : fit.cycle) ss += c * c;
    j["cycle_mean_square"] = number(fit.cycle.empty() ? 0.0 : ss / static_cast<double>(fit.cycle.size()));
    return j;
}

json to_json(const ErrorDist& dist) {
    json j;
    j["kind"] = to_string(dist.kind);
    if (dist.kind == DistKind::StudentT) j["dof"] = number(dist.dof);
    j["scale"] = number(dist.scale);
    return j;
}

json to_json(const MarModel& model) {
    json j;
    j["r"] = model.r();
    j["s"] = model.s();
    j["phi"] = numbers(model.phi);
    j["psi"] = numbers(model.psi);
    j["dist"] = to_json(model.dist);
    j["intercept"] = number(model.intercept);
    return j;
}

json to_json(const FittedMar& fit) {
    json j;
    j["model"] = to_json(fit.model);
    j["loglik"] = number(fit.loglik);
    if (fit.std_errors) {
        const auto& se = *fit.std_errors;
        json s;
        std::size_t k = 0;
        json phi = json::array(), psi = json::array();
        for (std::size_t i = 0; i < fit.model.r(); ++i) phi.push_back(number(se.at(k++)));
        for (std::size_t i = 0; i < fit.model.s(); ++i) psi.push_back(number(se.at(k++)));
        s["phi"] = phi;
        s["psi"] = psi;
        if (fit.model.dist.kind == DistKind::StudentT) s["dof"] = number(se.at(k++));
        s["scale"] = number(se.at(k++));
        j["std_errors"] = s;
    } else {
        j["std_errors"] = nullptr;
    }
    j["p_used"] = fit.p_used;
    j["sample_length"] = fit.sample_length;
    j["starts_tried"] = fit.starts_tried;
    j["converged"] = fit.converged;
    if (fit.identification) {
        json id;
        id["p"] = fit.identification->p;
        id["tie"] = fit.identification->tie;
        json c = json::array();
        for (const auto& cand : fit.identification->candidates)
            c.push_back({{"r", cand.r}, {"s", cand.s}, {"loglik", number(cand.loglik)}});
        id["candidates"] = c;
        j["identification"] = id;
    }
    return j;
}

json to_json(const PredictiveDensity& d) {
    json j;
    j["method"] = to_string(d.method);
    j["target"] = d.target == ForecastTarget::U ? "u" : "y";
    j["horizon"] = d.horizon;
    j["grid_points"] = d.grid.size();
    if (!d.grid.empty()) j["grid_range"] = {d.grid.front(), d.grid.back()};
    j["u_to_y_shift"] = number(d.u_to_y_shift);
    if (d.method == ForecastMethod::Simulations) j["effective_sample_size"] = number(d.effective_sample_size);
    if (d.method == ForecastMethod::Sample) j["raw_mass"] = number(d.raw_mass);
    j["warnings"] = d.warnings;
    return j;
}

json to_json(const McReport& report) {
    json j;
    j["replications"] = report.replications;
    j["T"] = report.T;
    j["master_seed"] = report.master_seed;
    json mse = json::array();
    for (const auto& r : report.mse_table) mse.push_back({{"dgp", r.dgp}, {"detrender", r.detrender}, {"mse", number(r.mse)}});
    j["mse_table"] = mse;
    json id = json::array();
    for (const auto& r : report.ident_table)
        id.push_back({{"dgp", r.dgp},
                      {"column", r.column},
                      {"p_wrong", number(r.p_wrong)},
                      {"p_over", number(r.p_over)},
                      {"mar_wrong", number(r.mar_wrong)},
                      {"s_zero", number(r.s_zero)},
                      {"s_positive", number(r.s_positive)},
                      {"failures", r.failures}});
    j["ident_table"] = id;
    json co = json::array();
    for (const auto& r : report.coeff_summaries)
        co.push_back({{"dgp", r.dgp},
                      {"column", r.column},
                      {"coefficient", r.coefficient},
                      {"count", r.summary.count},
                      {"min", number(r.summary.min)},
                      {"q1", number(r.summary.q1)},
                      {"median", number(r.summary.median)},
                      {"q3", number(r.summary.q3)},
                      {"max", number(r.summary.max)}});
    j["coeff_summaries"] = co;
    return j;
}

json to_json(const CoBubbleResult& result) {
    json j;
    j["best_delta"] = result.best_delta;
    j["null_class"] = to_string(result.null_class);
    std::size_t annihilating = 0;
    for (const auto& p : result.points) annihilating += (p.ok && p.s == 0) ? 1 : 0;
    j["grid_points"] = result.points.size();
    j["points_with_s_zero"] = annihilating;
    j["best_fit"] = to_json(result.best_fit);
    return j;
}

TrendSpec parse_trend_name(const std::string& name) {
    if (name == "intercept") return TrendSpec::intercept();
    auto integer_suffix = [&](std::size_t skip) -> long long {
        const std::string tail = name.substr(skip);
        if (tail.empty() || tail.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("unknown trend name: " + name);
        return std::stoll(tail);
    };
    if (name.size() > 1 && name[0] == 't') return TrendSpec::polynomial(static_cast<int>(integer_suffix(1)));
    if (name.rfind("hp", 0) == 0) {
        const std::string tail = name.substr(2);
        std::size_t used = 0;
        double lambda = 0.0;
        try {
            lambda = std::stod(tail, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("unknown trend name: " + name);
        }
        if (used != tail.size()) throw std::invalid_argument("unknown trend name: " + name);
        return TrendSpec::hp(lambda);
    }
    if (name == "HP1") return TrendSpec::hp(14400.0);
    if (name == "HP2") return TrendSpec::hp(129600.0);
    throw std::invalid_argument("unknown trend name: " + name);
}

void write_trend_csv(std::ostream& out, const TrendFit& fit, const std::optional<std::vector<YearMonth>>& dates) {
    out << (dates ? "date" : "t") << ",observed,trend,cycle\n";
    for (std::size_t i = 0; i < fit.observed.size(); ++i) {
        if (dates)
            out << (*dates)[i].to_string();
        else
            out << (i + 1);
        out << ',' << cell(fit.observed[i]) << ',' << cell(fit.trend[i]) << ',' << cell(fit.cycle[i]) << '\n';
    }
}

void write_residuals_csv(std::ostream& out, const FittedMar& fit) {
    const std::size_t r = fit.model.r();
    out << "t,residual,u\n";
    for (std::size_t i = 0; i < fit.u_path.size(); ++i) {
        out << (r + 1 + i) << ',';
        if (i < fit.residuals.size()) out << cell(fit.residuals[i]);
        out << ',' << cell(fit.u_path[i]) << '\n';
    }
}

void write_density_csv(std::ostream& out, const PredictiveDensity& d) {
    out << "x,pdf,cdf\n";
    for (std::size_t i = 0; i < d.grid.size(); ++i) {
        out << cell(d.grid[i]) << ',';
        if (!d.pdf.empty()) out << cell(d.pdf[i]);
        out << ',' << cell(d.cdf[i]) << '\n';
    }
}

void write_mse_csv(std::ostream& out, const std::vector<MseRow>& rows) {
    std::vector<std::string> dgps, cols;
    std::map<std::pair<std::string, std::string>, double> table;
    for (const auto& r : rows) {
        if (std::find(dgps.begin(), dgps.end(), r.dgp) == dgps.end()) dgps.push_back(r.dgp);
        if (std::find(cols.begin(), cols.end(), r.detrender) == cols.end()) cols.push_back(r.detrender);
        table[{r.dgp, r.detrender}] = r.mse;
    }
    out << "dgp";
    for (const auto& c : cols) out << ',' << text_field(c);
    out << '\n';
    for (const auto& d : dgps) {
        out << text_field(d);
        for (const auto& c : cols) {
            out << ',';
            auto it = table.find({d, c});
            if (it != table.end()) out << cell(it->second);
        }
        out << '\n';
    }
}

void write_ident_csv(std::ostream& out, const std::vector<IdentRow>& rows) {
    out << "dgp,column,p_wrong,p_over,mar_wrong,s_zero,s_positive,failures\n";
    for (const auto& r : rows)
        out << text_field(r.dgp) << ',' << text_field(r.column) << ',' << cell(r.p_wrong) << ',' << cell(r.p_over) << ',' << cell(r.mar_wrong)
            << ',' << cell(r.s_zero) << ',' << cell(r.s_positive) << ',' << r.failures << '\n';
}

void write_coeff_csv(std::ostream& out, const std::vector<CoeffRow>& rows) {
    out << "dgp,column,coefficient,count,min,q1,median,q3,max\n";
    for (const auto& r : rows)
        out << text_field(r.dgp) << ',' << text_field(r.column) << ',' << r.coefficient << ',' << r.summary.count << ',' << cell(r.summary.min)
            << ',' << cell(r.summary.q1) << ',' << cell(r.summary.median) << ',' << cell(r.summary.q3) << ','
            << cell(r.summary.max) << '\n';
}

void write_cobubble_csv(std::ostream& out, const CoBubbleResult& result) {
    out << "delta,p,r,s,loglik,selection_loglik\n";
    for (const auto& p : result.points) {
        out << cell(p.delta) << ',';
        if (p.ok) out << p.p << ',' << p.r << ',' << p.s;
        else out << ",,";
        out << ',' << cell(p.loglik) << ',' << cell(p.selection_loglik) << '\n';
    }
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write file: " + path);
    f << text;
    if (!f) throw DataError("write failed: " + path);
}

}  // namespace marcast::io
