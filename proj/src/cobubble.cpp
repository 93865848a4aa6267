#include "marcast/cobubble.hpp"

#include "marcast/errors.hpp"
#include "marcast/parallel.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace marcast {

std::vector<double> DeltaGrid::points() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("delta grid step must be positive");
    if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo) throw std::invalid_argument("delta grid needs lo <= hi");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
    if (count > 1'000'000) throw std::invalid_argument("delta grid too fine");
    std::vector<double> out(count);
    // Index-based values avoid accumulated drift; rounding keeps printed deltas short.
    for (std::size_t i = 0; i < count; ++i)
        out[i] = std::round((lo + static_cast<double>(i) * step) * 1e10) / 1e10;
    return out;
}

std::string to_string(NullClass c) {
    switch (c) {
        case NullClass::WhiteNoise: return "white_noise";
        case NullClass::PurelyCausal: return "purely_causal";
        case NullClass::Rejected: return "rejected";
    }
    return "rejected";
}

CoBubbleResult grid_search(std::span<const double> y, std::span<const double> x, const DeltaGrid& grid,
                           const CoBubbleOptions& options) {
    if (y.size() != x.size()) throw DataError("cobubble: series lengths differ");
    const std::vector<double> deltas = grid.points();

    IdentifyOptions id;
    id.p_max = options.p_max;
    id.criterion = options.criterion;
    id.estimate = options.estimate;
    id.estimate.compute_std_errors = false;

    std::vector<DeltaPoint> points(deltas.size());
    parallel_for(deltas.size(), options.threads, [&](std::size_t i) {
        std::vector<double> z(y.size());
        for (std::size_t t = 0; t < y.size(); ++t) z[t] = y[t] - deltas[i] * x[t];
        DeltaPoint& pt = points[i];
        pt.delta = deltas[i];
        try {
            const FittedMar fit = identify(z, options.dist, id);
            pt.p = fit.p_used;
            pt.r = fit.model.r();
            pt.s = fit.model.s();
            pt.loglik = fit.loglik;
            pt.selection_loglik = -std::numeric_limits<double>::infinity();
            if (pt.p == 0)
                pt.selection_loglik = fit.loglik;
            else if (pt.s == 0)
                pt.selection_loglik =
                    (pt.r == 1) ? fit.loglik : estimate(z, 1, 0, options.dist, id.estimate).loglik;
        } catch (const NumericalError&) {
            pt.ok = false;
            pt.loglik = pt.selection_loglik = -std::numeric_limits<double>::infinity();
        }
    });

    auto best_where = [&](auto&& pred, auto&& score) -> std::optional<std::size_t> {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (!points[i].ok || !pred(points[i])) continue;
            const double v = score(points[i]);
            if (!best || v > score(points[*best])) best = i;
        }
        return best;
    };

    CoBubbleResult res;
    auto selection = [](const DeltaPoint& p) { return p.selection_loglik; };
    std::optional<std::size_t> pick = best_where([](const DeltaPoint& p) { return p.p == 0; }, selection);
    if (pick) {
        res.null_class = NullClass::WhiteNoise;
    } else if ((pick = best_where([](const DeltaPoint& p) { return p.s == 0; }, selection))) {
        res.null_class = NullClass::PurelyCausal;
    } else {
        res.null_class = NullClass::Rejected;
        pick = best_where([](const DeltaPoint&) { return true; }, [](const DeltaPoint& p) { return p.loglik; });
        if (!pick) throw NumericalError("cobubble: estimation failed at every grid point");
    }

    res.best_delta = points[*pick].delta;
    std::vector<double> z(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) z[t] = y[t] - res.best_delta * x[t];
    IdentifyOptions refit = id;
    refit.estimate.compute_std_errors = options.estimate.compute_std_errors;
    res.best_fit = identify(z, options.dist, refit);
    res.points = std::move(points);
    return res;
}

CoBubbleResult grid_search(const TimeSeries& y, const TimeSeries& x, const DeltaGrid& grid,
                           const CoBubbleOptions& options) {
    if (y.size() != x.size()) throw DataError("cobubble: series lengths differ");
    if (y.has_timestamps() && x.has_timestamps() &&
        y.timestamps()->front().index() != x.timestamps()->front().index())
        throw DataError("cobubble: series are not aligned in time");
    return grid_search(y.values(), x.values(), grid, options);
}

}  // namespace marcast
