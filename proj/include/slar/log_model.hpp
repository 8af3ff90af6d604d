#pragma once

// Concrete multi-sensor system logs: schema, ingestion, downsampling, splitting.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <ctime>
#include <iomanip>
#include <istream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "slar/detail/text.hpp"
#include "slar/error.hpp"

namespace slar {

enum class VariableKind { numeric, discrete };

struct Variable {
    std::string name;
    VariableKind kind = VariableKind::numeric;

    bool operator==(const Variable&) const = default;
};

/// Ordered variables of a log plus its sampling convention.
class ObservationSchema {
public:
    ObservationSchema() = default;

    ObservationSchema(std::vector<Variable> variables, std::optional<std::string> timestamp_column,
                      double sample_period)
        : variables_(std::move(variables)),
          timestamp_column_(std::move(timestamp_column)),
          sample_period_(sample_period) {
        validate();
    }

    const std::vector<Variable>& variables() const noexcept { return variables_; }
    const std::optional<std::string>& timestamp_column() const noexcept { return timestamp_column_; }
    double sample_period() const noexcept { return sample_period_; }
    std::size_t arity() const noexcept { return variables_.size(); }

    std::optional<std::size_t> index_of(std::string_view name) const {
        for (std::size_t i = 0; i < variables_.size(); ++i)
            if (variables_[i].name == name) return i;
        return std::nullopt;
    }

    ObservationSchema with_sample_period(double period) const {
        return ObservationSchema(variables_, timestamp_column_, period);
    }

    bool operator==(const ObservationSchema&) const = default;

private:
    void validate() const {
        if (!(sample_period_ > 0.0) || !std::isfinite(sample_period_))
            throw InvalidSchema("sample period must be positive");
        std::unordered_set<std::string> seen;
        bool has_numeric = false;
        for (const auto& v : variables_) {
            if (v.name.empty()) throw InvalidSchema("empty variable name");
            if (!seen.insert(v.name).second) throw InvalidSchema("duplicate variable '" + v.name + "'");
            has_numeric = has_numeric || v.kind == VariableKind::numeric;
        }
        if (!has_numeric) throw InvalidSchema("schema needs at least one numeric variable");
    }

    std::vector<Variable> variables_;
    std::optional<std::string> timestamp_column_;
    double sample_period_ = 1.0;
};

struct Observation {
    double timestamp = 0.0;  // seconds since log start
    std::vector<double> values;

    bool operator==(const Observation&) const = default;
};

/// Non-empty, strictly time-ordered sequence of observations.
class SystemLog {
public:
    SystemLog(ObservationSchema schema, std::vector<Observation> observations)
        : schema_(std::move(schema)), observations_(std::move(observations)) {
        if (observations_.empty()) throw EmptyLog();
        for (std::size_t i = 0; i < observations_.size(); ++i) {
            const auto& o = observations_[i];
            if (o.values.size() != schema_.arity())
                throw MalformedRow(i + 1, "observation arity does not match schema");
            for (double v : o.values)
                if (!std::isfinite(v)) throw MalformedRow(i + 1, "non-finite value");
            if (i > 0 && !(o.timestamp > observations_[i - 1].timestamp))
                throw MalformedRow(i + 1, "timestamps must be strictly increasing");
        }
    }

    const ObservationSchema& schema() const noexcept { return schema_; }
    const std::vector<Observation>& observations() const noexcept { return observations_; }
    std::size_t size() const noexcept { return observations_.size(); }
    const Observation& operator[](std::size_t i) const { return observations_[i]; }
    double duration() const { return observations_.back().timestamp - observations_.front().timestamp; }

    /// Values of one variable across the log.
    std::vector<double> column(std::string_view name) const {
        const auto idx = schema_.index_of(name);
        if (!idx) throw UnknownVariable(std::string(name));
        std::vector<double> out;
        out.reserve(observations_.size());
        for (const auto& o : observations_) out.push_back(o.values[*idx]);
        return out;
    }

    bool operator==(const SystemLog&) const = default;

private:
    ObservationSchema schema_;
    std::vector<Observation> observations_;
};

namespace detail {

inline char detect_delimiter(std::string_view header) {
    return header.find('\t') != std::string_view::npos ? '\t' : ',';
}

// Seconds since the civil epoch for the wall-clock layouts found in plant historians.
inline std::optional<double> parse_wall_clock(std::string_view text) {
    static constexpr const char* formats[] = {
        "%d/%m/%Y %I:%M:%S %p", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%d/%m/%Y %H:%M:%S"};
    const std::string s(trim(text));
    for (const char* fmt : formats) {
        std::tm tm{};
        std::istringstream in(s);
        in >> std::get_time(&tm, fmt);
        if (in.fail()) continue;
        in >> std::ws;
        if (!in.eof()) continue;
        using namespace std::chrono;
        const year_month_day ymd{year{tm.tm_year + 1900}, month{static_cast<unsigned>(tm.tm_mon + 1)},
                                 day{static_cast<unsigned>(tm.tm_mday)}};
        if (!ymd.ok()) continue;
        const auto days = sys_days{ymd}.time_since_epoch().count();
        return static_cast<double>(days) * 86400.0 + tm.tm_hour * 3600.0 + tm.tm_min * 60.0 + tm.tm_sec;
    }
    return std::nullopt;
}

inline std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) pos = text.size();
        lines.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    return lines;
}

inline bool blank(std::string_view line) { return trim(line).empty(); }

}  // namespace detail

/// Parses a delimited table (comma or tab, detected from the header line).
inline SystemLog parse_log(std::string_view text, const ObservationSchema& schema) {
    const auto lines = detail::lines_of(text);
    std::size_t header_line = 0;
    while (header_line < lines.size() && detail::blank(lines[header_line])) ++header_line;
    if (header_line == lines.size()) throw EmptyLog();

    const char delim = detail::detect_delimiter(lines[header_line]);
    const auto header = detail::split(lines[header_line], delim);
    const auto column_of = [&](const std::string& name) -> std::size_t {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return c;
        throw MissingColumn(name);
    };

    std::vector<std::size_t> var_cols;
    for (const auto& v : schema.variables()) var_cols.push_back(column_of(v.name));
    std::optional<std::size_t> ts_col;
    if (schema.timestamp_column()) ts_col = column_of(*schema.timestamp_column());

    std::vector<Observation> rows;
    std::optional<double> origin;
    for (std::size_t li = header_line + 1; li < lines.size(); ++li) {
        if (detail::blank(lines[li])) continue;
        const std::size_t line_no = li + 1;
        const auto cells = detail::split(lines[li], delim);
        if (cells.size() != header.size())
            throw MalformedRow(line_no, "expected " + std::to_string(header.size()) + " cells, got " +
                                            std::to_string(cells.size()));
        Observation obs;
        obs.values.reserve(var_cols.size());
        for (std::size_t k = 0; k < var_cols.size(); ++k) {
            const auto value = detail::parse_double(cells[var_cols[k]]);
            if (!value)
                throw MalformedRow(line_no, "non-numeric value '" + std::string(cells[var_cols[k]]) +
                                                "' in column " + schema.variables()[k].name);
            obs.values.push_back(*value);
        }
        if (ts_col) {
            auto t = detail::parse_double(cells[*ts_col]);
            if (!t) t = detail::parse_wall_clock(cells[*ts_col]);
            if (!t) throw MalformedRow(line_no, "unparseable timestamp '" + std::string(cells[*ts_col]) + "'");
            if (!origin) origin = *t;
            obs.timestamp = *t - *origin;
        } else {
            obs.timestamp = static_cast<double>(rows.size()) * schema.sample_period();
        }
        if (!rows.empty() && !(obs.timestamp > rows.back().timestamp))
            throw MalformedRow(line_no, "timestamps must be strictly increasing");
        rows.push_back(std::move(obs));
    }
    if (rows.empty()) throw EmptyLog();
    return SystemLog(schema, std::move(rows));
}

inline SystemLog parse_log(std::istream& in, const ObservationSchema& schema) {
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return parse_log(text, schema);
}

/// Schema made of every column (other than the timestamp) whose first data row is numeric.
inline ObservationSchema infer_schema(std::string_view text, std::optional<std::string> timestamp_column,
                                      double sample_period) {
    const auto lines = detail::lines_of(text);
    std::size_t h = 0;
    while (h < lines.size() && detail::blank(lines[h])) ++h;
    if (h == lines.size()) throw EmptyLog();
    std::size_t first = h + 1;
    while (first < lines.size() && detail::blank(lines[first])) ++first;
    if (first == lines.size()) throw EmptyLog();
    const char delim = detail::detect_delimiter(lines[h]);
    const auto header = detail::split(lines[h], delim);
    const auto row = detail::split(lines[first], delim);
    std::vector<Variable> vars;
    for (std::size_t c = 0; c < header.size() && c < row.size(); ++c) {
        if (timestamp_column && header[c] == *timestamp_column) continue;
        if (detail::parse_double(row[c])) vars.push_back({std::string(header[c]), VariableKind::numeric});
    }
    return ObservationSchema(std::move(vars), std::move(timestamp_column), sample_period);
}

/// Keeps observations 0, stride, 2*stride, ...
inline SystemLog downsample(const SystemLog& log, std::size_t stride) {
    if (stride == 0) throw Error("downsample stride must be at least 1");
    std::vector<Observation> kept;
    kept.reserve(log.size() / stride + 1);
    for (std::size_t i = 0; i < log.size(); i += stride) kept.push_back(log[i]);
    return SystemLog(log.schema().with_sample_period(log.schema().sample_period() * static_cast<double>(stride)),
                     std::move(kept));
}

/// Prefix of ceil(boundary * N) observations and the remaining suffix.
inline std::pair<SystemLog, SystemLog> split(const SystemLog& log, double boundary) {
    if (!(boundary > 0.0 && boundary < 1.0)) throw DegenerateSplit("split boundary must lie in (0,1)");
    const auto n = static_cast<double>(log.size());
    const double exact = boundary * n;
    const double nearest = std::round(exact);
    // 4/7 * 7 must give 4, not 5 after rounding noise.
    const double cut_d = std::abs(exact - nearest) <= 1e-9 * std::max(1.0, n) ? nearest : std::ceil(exact);
    const auto cut = static_cast<std::size_t>(cut_d);
    if (cut == 0 || cut >= log.size())
        throw DegenerateSplit("split at " + std::to_string(cut) + " of " + std::to_string(log.size()) +
                              " leaves an empty side");
    const auto& obs = log.observations();
    return {SystemLog(log.schema(), {obs.begin(), obs.begin() + static_cast<std::ptrdiff_t>(cut)}),
            SystemLog(log.schema(), {obs.begin() + static_cast<std::ptrdiff_t>(cut), obs.end()})};
}

}  // namespace slar
