#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lru/data/table.hpp"

namespace lru::data {

/// Reads an emission CSV. Rows are sorted by timestamp and all placed in
/// session 1; call assign_sessions_* afterwards. Empty cells are missing.
SeriesTable load_emission_csv(const std::filesystem::path& path);

/// Reads an hourly weather CSV into a single-session table with columns
/// temp_c, precip_mm and the categorical `conditions`.
SeriesTable load_weather_csv(const std::filesystem::path& path);

void write_emission_csv(const std::filesystem::path& path, const SeriesTable& table);
void write_weather_csv(const std::filesystem::path& path, const SeriesTable& weather);

/// Shortest decimal text that parses back to the same double ("" for NaN).
std::string format_number(double value);

struct ManifestEntry {
    int id = 0;
    std::size_t first_row = 0;  // data-row range in the emission CSV, half open
    std::size_t end_row = 0;
    double start = 0.0;  // first and last timestamp
    double end = 0.0;
    bool shifted = false;
};

struct SessionManifest {
    std::vector<ManifestEntry> sessions;
    double emission_gain = 1.0;
    double temp_offset_c = 0.0;
    std::uint64_t seed = 0;
};

SessionManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const SessionManifest& manifest);

/// Splits rows into sessions wherever consecutive timestamps are more than
/// `max_gap` seconds apart. Sessions are numbered from 1.
void assign_sessions_by_gap(SeriesTable& table, double max_gap = 600.0);

/// Assigns each row the manifest session whose [start, end] contains it.
/// Rows outside every session are a Parse error.
void assign_sessions(SeriesTable& table, const SessionManifest& manifest);

}  // namespace lru::data
