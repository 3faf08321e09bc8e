#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lru::data {

enum class ColumnRole { Numeric, Categorical, Target };

/// A named column. Numeric and target columns use `values` with NaN marking a
/// missing cell; categorical columns use `labels` with the empty string.
struct Column {
    std::string name;
    ColumnRole role = ColumnRole::Numeric;
    std::vector<double> values;
    std::vector<std::string> labels;

    bool categorical() const { return role == ColumnRole::Categorical; }
    bool missing(std::size_t row) const;
    std::size_t size() const { return categorical() ? labels.size() : values.size(); }
};

struct SessionRange {
    int id = 0;
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
};

/// Timestamped multivariate frame. Rows are grouped by session (contiguous)
/// and ordered by time within a session.
struct SeriesTable {
    std::vector<double> timestamps;  // seconds since epoch
    std::vector<int> session;
    std::vector<Column> columns;

    std::size_t rows() const { return timestamps.size(); }

    const Column* find(std::string_view name) const;
    Column* find(std::string_view name);
    const Column& column(std::string_view name) const;
    Column& column(std::string_view name);

    std::vector<SessionRange> sessions() const;
    std::vector<std::string> names(ColumnRole role) const;
    std::size_t missing_cells() const;

    /// Copies the column layout with zero rows.
    SeriesTable empty_like() const;
    void append_row(const SeriesTable& source, std::size_t row);
    void append_missing_row(double timestamp, int session_id);

    /// Throws a Contract error if column lengths disagree or sessions are not
    /// contiguous with strictly increasing timestamps.
    void validate() const;
};

SeriesTable select_sessions(const SeriesTable& table, const std::vector<int>& ids);

inline constexpr std::array<std::string_view, 11> kEmissionHeader = {
    "timestamp", "engine_rpm", "fuel_lph", "coolant_c", "speed_kmh", "fuel_econ_kmpl",
    "no_ppm",    "no2_ppm",    "nox_ppm",  "co2_pct",   "co_ppm",
};
inline constexpr std::array<std::string_view, 5> kEmissionFeatures = {"engine_rpm", "fuel_lph", "coolant_c",
                                                                      "speed_kmh", "fuel_econ_kmpl"};
inline constexpr std::array<std::string_view, 5> kEmissionTargets = {"no_ppm", "no2_ppm", "nox_ppm", "co2_pct",
                                                                     "co_ppm"};
inline constexpr std::array<std::string_view, 4> kWeatherHeader = {"timestamp_hour", "temp_c", "precip_mm",
                                                                   "conditions"};

}  // namespace lru::data
