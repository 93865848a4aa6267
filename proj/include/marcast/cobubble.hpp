#pragma once

#include "marcast/mar.hpp"
#include "marcast/timeseries.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace marcast {

struct DeltaGrid {
    double lo = -2.0;
    double hi = 2.0;
    double step = 0.01;

    /// lo, lo + step, ..., up to hi (inclusive within half a step). Throws on step <= 0 or hi < lo.
    [[nodiscard]] std::vector<double> points() const;
};

enum class NullClass { WhiteNoise, PurelyCausal, Rejected };

[[nodiscard]] std::string to_string(NullClass c);

struct DeltaPoint {
    double delta = 0.0;
    std::size_t p = 0;
    std::size_t r = 0;
    std::size_t s = 0;
    double loglik = 0.0;            ///< identified model
    double selection_loglik = 0.0;  ///< MAR(1,0) fit, or MAR(0,0) when p = 0; -inf when s > 0
    bool ok = true;  ///< false when estimation failed at this delta
};

struct CoBubbleResult {
    std::vector<DeltaPoint> points;
    double best_delta = 0.0;
    FittedMar best_fit;
    NullClass null_class = NullClass::Rejected;
};

struct CoBubbleOptions {
    std::size_t p_max = 4;
    InfoCriterion criterion = InfoCriterion::BIC;
    DistKind dist = DistKind::StudentT;
    unsigned threads = 0;
    EstimateOptions estimate;
};

/**
 * @brief Grid search for delta such that z_t = y_t - delta x_t has no lead dynamics.
 *
 * Each delta is identified independently. Among deltas with identified s = 0,
 * a white-noise combination (p = 0) is preferred; otherwise the delta whose
 * MAR(1,0) fit has the largest log-likelihood wins. When no delta removes the leads, the
 * class is Rejected and best_delta is the overall likelihood maximizer.
 */
[[nodiscard]] CoBubbleResult grid_search(std::span<const double> y, std::span<const double> x, const DeltaGrid& grid,
                                         const CoBubbleOptions& options = {});
[[nodiscard]] CoBubbleResult grid_search(const TimeSeries& y, const TimeSeries& x, const DeltaGrid& grid,
                                         const CoBubbleOptions& options = {});

}  // namespace marcast
