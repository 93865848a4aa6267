#include "marcast/timeseries.hpp"

#include "marcast/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace marcast {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == ',' && !quoted) {
            out.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    out.push_back(trim(line.substr(start)));
    return out;
}

int parse_int(std::string_view s, std::string_view whole) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw DataError("unparseable date '" + std::string(whole) + "'");
    return v;
}

std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace

YearMonth YearMonth::from_index(int idx) noexcept {
    int year = idx >= 0 ? idx / 12 : -((-idx + 11) / 12);
    return YearMonth{year, idx - year * 12 + 1};
}

std::string YearMonth::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    return buf;
}

YearMonth YearMonth::parse(std::string_view text) {
    std::string_view t = trim(text);
    if (t.size() < 6) throw DataError("unparseable date '" + std::string(text) + "'");
    YearMonth ym;
    ym.year = parse_int(t.substr(0, 4), text);
    char sep = t[4];
    std::string_view rest = t.substr(5);
    if (sep == 'M' || sep == 'm') {
        ym.month = parse_int(rest, text);
    } else if (sep == '-' || sep == '/') {
        auto end = rest.find_first_of("-/");
        ym.month = parse_int(rest.substr(0, end), text);
        if (end != std::string_view::npos) {
            // Day component is validated but discarded: one observation per month.
            int day = parse_int(rest.substr(end + 1), text);
            if (day < 1 || day > 31) throw DataError("unparseable date '" + std::string(text) + "'");
        }
    } else {
        throw DataError("unparseable date '" + std::string(text) + "'");
    }
    if (ym.month < 1 || ym.month > 12) throw DataError("month out of range in '" + std::string(text) + "'");
    return ym;
}

int months_inclusive(YearMonth first, YearMonth last) noexcept { return last.index() - first.index() + 1; }

TimeSeries::TimeSeries(std::vector<double> values, std::string label)
    : values_(std::move(values)), label_(std::move(label)) {
    validate();
}

TimeSeries::TimeSeries(std::vector<double> values, std::vector<YearMonth> timestamps, std::string label)
    : values_(std::move(values)), timestamps_(std::move(timestamps)), label_(std::move(label)) {
    validate();
}

void TimeSeries::validate() const {
    if (values_.empty()) throw DataError("time series is empty");
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!std::isfinite(values_[i])) throw DataError("non-finite value at position " + std::to_string(i));
    if (timestamps_) {
        const auto& ts = *timestamps_;
        if (ts.size() != values_.size()) throw DataError("timestamp count does not match value count");
        for (std::size_t i = 1; i < ts.size(); ++i) {
            if (ts[i] <= ts[i - 1])
                throw DataError("duplicate or non-monotone date " + ts[i].to_string());
            if (ts[i].index() != ts[i - 1].index() + 1)
                throw DataError("gap in monthly dates before " + ts[i].to_string());
        }
    }
}

std::optional<std::size_t> TimeSeries::find(YearMonth period) const {
    if (!timestamps_) return std::nullopt;
    int offset = period.index() - timestamps_->front().index();
    if (offset < 0 || offset >= static_cast<int>(values_.size())) return std::nullopt;
    return static_cast<std::size_t>(offset);
}

TimeSeries TimeSeries::head(std::size_t count) const {
    if (count == 0 || count > values_.size()) throw std::invalid_argument("head: count out of range");
    std::vector<double> v(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(count));
    if (!timestamps_) return TimeSeries(std::move(v), label_);
    std::vector<YearMonth> t(timestamps_->begin(), timestamps_->begin() + static_cast<std::ptrdiff_t>(count));
    return TimeSeries(std::move(v), std::move(t), label_);
}

TimeSeries TimeSeries::through(YearMonth period) const {
    auto pos = find(period);
    if (!pos) throw DataError("period " + period.to_string() + " not covered by series '" + label_ + "'");
    return head(*pos + 1);
}

TimeSeries TimeSeries::with_values(std::vector<double> values) const {
    if (values.size() != values_.size()) throw std::invalid_argument("with_values: length mismatch");
    if (timestamps_) return TimeSeries(std::move(values), *timestamps_, label_);
    return TimeSeries(std::move(values), label_);
}

DeflationIndex DeflationIndex::from_series(const TimeSeries& series) {
    if (!series.has_timestamps()) throw DataError("deflation index requires dates");
    DeflationIndex idx{{series.values().begin(), series.values().end()}, *series.timestamps()};
    for (std::size_t i = 0; i < idx.values.size(); ++i)
        if (!(idx.values[i] > 0.0))
            throw DataError("non-positive deflation index at " + idx.timestamps[i].to_string());
    return idx;
}

double DeflationIndex::at(YearMonth period) const {
    // Timestamps are not required to be contiguous here; binary search.
    auto it = std::lower_bound(timestamps.begin(), timestamps.end(), period);
    if (it == timestamps.end() || *it != period)
        throw DataError("deflation index does not cover " + period.to_string());
    double v = values[static_cast<std::size_t>(it - timestamps.begin())];
    if (!(v > 0.0)) throw DataError("non-positive deflation index at " + period.to_string());
    return v;
}

TimeSeries parse_csv(std::string_view text, const std::string& value_column,
                     const std::optional<std::string>& date_column) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw DataError("CSV input has no header row");

    auto header = split_fields(lines[0]);
    auto column_of = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw DataError("column '" + name + "' not found in header");
    };
    std::size_t vcol = column_of(value_column);
    std::optional<std::size_t> dcol;
    if (date_column) dcol = column_of(*date_column);

    std::vector<double> values;
    std::vector<YearMonth> dates;
    for (std::size_t row = 1; row < lines.size(); ++row) {
        auto fields = split_fields(lines[row]);
        auto v = vcol < fields.size() ? parse_double(fields[vcol]) : std::nullopt;
        if (!v) throw DataError("unparseable value at row " + std::to_string(row));
        values.push_back(*v);
        if (dcol) {
            if (*dcol >= fields.size()) throw DataError("missing date at row " + std::to_string(row));
            dates.push_back(YearMonth::parse(fields[*dcol]));
        }
    }
    if (values.empty()) throw DataError("CSV input has no data rows");
    if (dcol) return TimeSeries(std::move(values), std::move(dates), value_column);
    return TimeSeries(std::move(values), value_column);
}

TimeSeries load_csv(const std::string& path, const std::string& value_column,
                    const std::optional<std::string>& date_column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), value_column, date_column);
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

std::string to_csv(const TimeSeries& series, const std::string& value_column, const std::string& date_column) {
    std::string out;
    const bool dated = series.has_timestamps();
    out += (dated ? date_column : std::string("t")) + "," + value_column + "\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out += dated ? (*series.timestamps())[i].to_string() : std::to_string(i + 1);
        out += ',';
        out += format_double(series[i]);
        out += '\n';
    }
    return out;
}

void write_csv(const TimeSeries& series, const std::string& path, const std::string& value_column,
               const std::string& date_column) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file '" + path + "'");
    out << to_csv(series, value_column, date_column);
}

TimeSeries deflate(const TimeSeries& series, const DeflationIndex& index, YearMonth base_period) {
    if (!series.has_timestamps()) throw DataError("deflate requires a dated series");
    const double base = index.at(base_period);
    const auto& ts = *series.timestamps();
    std::vector<double> out(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) out[i] = series[i] * base / index.at(ts[i]);
    std::string label = series.label().empty() ? "real" : series.label() + "_real";
    return TimeSeries(std::move(out), ts, std::move(label));
}

TimeSeries reverse(const TimeSeries& series) {
    std::vector<double> v(series.values().rbegin(), series.values().rend());
    return TimeSeries(std::move(v), series.label());
}

double mean(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mean of empty range");
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double empirical_sd(std::span<const double> values) {
    if (values.size() < 2) throw std::invalid_argument("empirical_sd requires at least 2 observations");
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace marcast
