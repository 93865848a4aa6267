#pragma once

#include "marcast/cobubble.hpp"
#include "marcast/detrend.hpp"
#include "marcast/forecast.hpp"
#include "marcast/mar.hpp"
#include "marcast/montecarlo.hpp"
#include "marcast/timeseries.hpp"

#include "json.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace marcast::io {

using json = nlohmann::ordered_json;

/// Finite doubles as numbers, NaN and infinities as null.
[[nodiscard]] json number(double v);

[[nodiscard]] json to_json(const TrendSpec& spec);
[[nodiscard]] json to_json(const TrendFit& fit);
[[nodiscard]] json to_json(const ErrorDist& dist);
[[nodiscard]] json to_json(const MarModel& model);
[[nodiscard]] json to_json(const FittedMar& fit);
[[nodiscard]] json to_json(const PredictiveDensity& density);  ///< summary only, no grid
[[nodiscard]] json to_json(const McReport& report);
[[nodiscard]] json to_json(const CoBubbleResult& result);

/// Parse a trend spec name as produced by TrendSpec::name() ("t4", "hp129600", "intercept").
/// Breaks and step specs need break times and are not accepted here.
[[nodiscard]] TrendSpec parse_trend_name(const std::string& name);

/// `t` or `date`, observed, trend, cycle.
void write_trend_csv(std::ostream& out, const TrendFit& fit, const std::optional<std::vector<YearMonth>>& dates);
/// t, residual (eps-hat aligned to t = r+1..T-s) and u (t = r+1..T).
void write_residuals_csv(std::ostream& out, const FittedMar& fit);
/// x, pdf, cdf; pdf column left empty for cdf-only estimators.
void write_density_csv(std::ostream& out, const PredictiveDensity& density);

/// Wide table: dgp, then one column per detrender.
void write_mse_csv(std::ostream& out, const std::vector<MseRow>& rows);
/// Long table: dgp, column, p_wrong, p_over, mar_wrong, s_zero, s_positive, failures.
void write_ident_csv(std::ostream& out, const std::vector<IdentRow>& rows);
/// Long table: dgp, column, coefficient, count, min, q1, median, q3, max.
void write_coeff_csv(std::ostream& out, const std::vector<CoeffRow>& rows);
/// delta, p, r, s, loglik, selection_loglik.
void write_cobubble_csv(std::ostream& out, const CoBubbleResult& result);

/// Write text to a file, throwing DataError when it cannot be opened.
void write_file(const std::string& path, const std::string& text);

/// Number formatting used by all CSV writers: round-trip, NaN as empty cell.
[[nodiscard]] std::string cell(double v);

}  // namespace marcast::io
