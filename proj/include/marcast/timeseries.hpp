#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace marcast {

/// Calendar month label. Ordering and differences are in whole months.
struct YearMonth {
    int year = 1970;
    int month = 1;  ///< 1..12

    [[nodiscard]] int index() const noexcept { return year * 12 + (month - 1); }
    [[nodiscard]] static YearMonth from_index(int idx) noexcept;
    [[nodiscard]] YearMonth plus(int months) const noexcept { return from_index(index() + months); }
    [[nodiscard]] std::string to_string() const;  ///< "YYYY-MM"

    /// Accepts "YYYY-MM", "YYYY/MM", "YYYY-MM-DD" and "YYYYMmm" (e.g. 2020M01).
    [[nodiscard]] static YearMonth parse(std::string_view text);

    friend auto operator<=>(const YearMonth&, const YearMonth&) = default;
};

/// Number of months in the inclusive range [first, last].
[[nodiscard]] int months_inclusive(YearMonth first, YearMonth last) noexcept;

/**
 * @brief Ordered observations with optional monthly labels.
 *
 * Values are finite and non-empty. When timestamps are present they are
 * strictly increasing and contiguous at monthly frequency.
 */
class TimeSeries {
public:
    TimeSeries() = default;
    explicit TimeSeries(std::vector<double> values, std::string label = {});
    TimeSeries(std::vector<double> values, std::vector<YearMonth> timestamps, std::string label = {});

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] bool empty() const noexcept { return values_.empty(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] const std::optional<std::vector<YearMonth>>& timestamps() const noexcept {
        return timestamps_;
    }
    [[nodiscard]] bool has_timestamps() const noexcept { return timestamps_.has_value(); }
    [[nodiscard]] const std::string& label() const noexcept { return label_; }
    void set_label(std::string label) { label_ = std::move(label); }

    /// Position of a month label, if the series is timestamped and covers it.
    [[nodiscard]] std::optional<std::size_t> find(YearMonth period) const;

    /// Observations [0, count). Keeps timestamps.
    [[nodiscard]] TimeSeries head(std::size_t count) const;

    /// Observations up to and including `period`.
    [[nodiscard]] TimeSeries through(YearMonth period) const;

    /// Same timestamps and label with new values of equal length.
    [[nodiscard]] TimeSeries with_values(std::vector<double> values) const;

private:
    void validate() const;

    std::vector<double> values_;
    std::optional<std::vector<YearMonth>> timestamps_;
    std::string label_;
};

/// Positive monthly index (e.g. CPI) used to convert nominal to real prices.
struct DeflationIndex {
    std::vector<double> values;
    std::vector<YearMonth> timestamps;

    [[nodiscard]] static DeflationIndex from_series(const TimeSeries& series);
    [[nodiscard]] double at(YearMonth period) const;
};

/**
 * @brief Read one numeric column of a CSV file with a header row.
 *
 * Rows are returned in file order. When `date_column` is given, its cells are
 * parsed as monthly labels and must be strictly increasing without gaps.
 * Blank or non-numeric value cells are rejected with the 1-based data row.
 */
[[nodiscard]] TimeSeries load_csv(const std::string& path, const std::string& value_column,
                                  const std::optional<std::string>& date_column = std::nullopt);

/// Parse CSV text in the same format as load_csv.
[[nodiscard]] TimeSeries parse_csv(std::string_view text, const std::string& value_column,
                                   const std::optional<std::string>& date_column = std::nullopt);

/// Write a series as CSV (`date,value` or `t,value`) using round-trip precision.
void write_csv(const TimeSeries& series, const std::string& path,
               const std::string& value_column = "value", const std::string& date_column = "date");
[[nodiscard]] std::string to_csv(const TimeSeries& series, const std::string& value_column = "value",
                                 const std::string& date_column = "date");

/// out_t = series_t * index(base) / index(t). Label gets a "real" suffix.
[[nodiscard]] TimeSeries deflate(const TimeSeries& series, const DeflationIndex& index,
                                 YearMonth base_period);

/// Values in reverse order; timestamps are dropped.
[[nodiscard]] TimeSeries reverse(const TimeSeries& series);

/// Sample standard deviation (divisor n - 1).
[[nodiscard]] double empirical_sd(std::span<const double> values);
[[nodiscard]] inline double empirical_sd(const TimeSeries& series) { return empirical_sd(series.values()); }

[[nodiscard]] double mean(std::span<const double> values);

/// Shortest round-trip decimal form of a double.
[[nodiscard]] std::string format_double(double value);

}  // namespace marcast
