#pragma once

#include "marcast/detrend.hpp"
#include "marcast/mar.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace marcast {

/// Deterministic trend added to a simulated cycle.
struct DgpTrend {
    enum class Kind { None, Polynomial, Breaks };

    Kind kind = Kind::None;
    std::string label = "no trend";
    /// Polynomial coefficients in the scaled basis x = (t - 1) / (T - 1).
    std::vector<double> coefficients;
    double level = 0.0;
    double slope = 0.0;
    std::vector<std::size_t> break_times;
    std::vector<double> kinks;
    std::vector<double> jumps;

    [[nodiscard]] static DgpTrend none();
    [[nodiscard]] static DgpTrend polynomial(std::string label, std::vector<double> coefficients);
    [[nodiscard]] static DgpTrend breaks(std::string label, double level, double slope,
                                         std::vector<std::size_t> break_times, std::vector<double> kinks,
                                         std::vector<double> jumps = {});

    [[nodiscard]] std::vector<double> values(std::size_t length) const;
    void validate(std::size_t length) const;
};

struct DgpSpec {
    std::string name;  ///< e.g. "MAR(0,1) + no trend"
    MarModel cycle;
    DgpTrend trend;
};

struct McConfig {
    std::size_t replications = 500;
    std::size_t T = 400;
    std::vector<DgpSpec> dgps;
    std::vector<TrendSpec> detrenders;
    std::size_t p_max = 4;
    InfoCriterion criterion = InfoCriterion::BIC;
    /// Also identify on the undetrended series (the "raw" column).
    bool include_raw = true;
    std::size_t burn = 100;
    std::uint64_t master_seed = 20200101;
    unsigned threads = 0;
    EstimateOptions estimate;

    void validate() const;
};

/// Column label for a detrender in report tables: "t4", "t6", "HP1", "HP2", or the spec name.
[[nodiscard]] std::string detrender_label(const TrendSpec& spec);

struct MseRow {
    std::string dgp;
    std::string detrender;
    double mse = 0.0;
};

/// Percentages over replications; NaN where a column does not apply to the dgp.
struct IdentRow {
    std::string dgp;
    std::string column;  ///< "raw" or a detrender label
    double p_wrong = 0.0;
    double p_over = 0.0;  ///< pseudo order above the truth (sub-count of p_wrong)
    double mar_wrong = 0.0;
    double s_zero = std::numeric_limits<double>::quiet_NaN();      ///< truth has s >= 1
    double s_positive = std::numeric_limits<double>::quiet_NaN();  ///< truth has s = 0
    std::size_t failures = 0;  ///< estimation failures, counted as mis-identified
};

struct FiveNumber {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
    std::size_t count = 0;
};

[[nodiscard]] FiveNumber five_number_summary(std::vector<double> values);

struct CoeffRow {
    std::string dgp;
    std::string column;
    std::string coefficient;  ///< "phi1", "psi1", "gamma"
    FiveNumber summary;
};

struct McReport {
    std::size_t replications = 0;
    std::size_t T = 0;
    std::uint64_t master_seed = 0;
    std::vector<std::string> trend_labels;
    std::vector<MseRow> mse_table;
    std::vector<IdentRow> ident_table;
    std::vector<CoeffRow> coeff_summaries;
};

/// Averages over replications of mean_t (c_t - c-hat_t)^2, detrended vs true cycle.
[[nodiscard]] std::vector<MseRow> run_mse(const McConfig& config);
[[nodiscard]] std::vector<IdentRow> run_identification(const McConfig& config);
/// Five-number summaries of the first lag, first lead and degrees of freedom over correctly identified fits.
[[nodiscard]] std::vector<CoeffRow> run_coefficients(const McConfig& config);
/// All three tables from one pass over the replications.
[[nodiscard]] McReport run_monte_carlo(const McConfig& config);

/// Trend coefficients for the default design, read from a JSON file.
struct McTrendFile {
    std::size_t T = 400;
    std::string description;
    DgpTrend tau4;
    DgpTrend tau6;
    DgpTrend breaks;
};

/// Throws DataError on a missing or malformed file.
[[nodiscard]] McTrendFile load_trend_file(const std::string& path);
[[nodiscard]] McTrendFile parse_trend_file(const std::string& json_text);

/// Three cycles x four trends, t(2) errors, detrenders t4, t6, HP(14400), HP(129600).
[[nodiscard]] McConfig default_design_config(const McTrendFile& trends);
[[nodiscard]] McConfig default_design_config(const std::string& trend_file);

}  // namespace marcast
