#pragma once

#include "lru/data/table.hpp"

namespace lru::data {

/// Appends temp_c, precip_mm and conditions from the latest weather hour at or
/// before each row. Rows before the first hour, or more than an hour past the
/// last one, raise a Coverage error.
SeriesTable join_weather(const SeriesTable& table, const SeriesTable& weather);

/// Expands every session onto a regular grid between its first and last
/// timestamp. Grid points without a source row become all-missing rows.
SeriesTable resample_to_grid(const SeriesTable& table, double step = 1.0);

/// Per session and numeric column: centred rolling median of observed cells
/// fills the gaps, then remaining gaps take the next observed value, then the
/// previous one. `window` must be odd and at least 3.
SeriesTable impute_rolling_median(const SeriesTable& table, int window = 5);

/// Fills each missing numeric cell with the mean of that column over the k
/// nearest rows that observe it. Distance is Euclidean over the numeric
/// columns observed in both rows, scaled by sqrt(total / observed).
SeriesTable impute_knn(const SeriesTable& table, int k = 20);

struct SplitTables {
    SeriesTable train;
    SeriesTable val;
};

/// Whole sessions, earliest first, go to train until the cumulative row count
/// reaches train_fraction of the total; at least one session is kept for
/// validation.
SplitTables split_sessions(const SeriesTable& table, double train_fraction = 0.8);

}  // namespace lru::data
