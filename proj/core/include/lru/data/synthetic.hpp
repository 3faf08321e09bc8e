#pragma once

#include <cstdint>
#include <filesystem>

#include "lru/data/io.hpp"
#include "lru/data/table.hpp"

namespace lru::data {

/// Distribution shift applied to the last `sessions` recordings.
struct ShiftSpec {
    int sessions = 1;
    double emission_gain = 1.3;
    double temp_offset_c = 10.0;
};

struct GeneratorConfig {
    int sessions = 5;
    double duration_s = 7200.0;
    /// Probability that a one-second sample is dropped; mean spacing becomes
    /// 1 / (1 - missing_rate) seconds.
    double missing_rate = 0.211;
    ShiftSpec shift;
    double noise_scale = 1.0;
    double start_epoch = 1672560000.0;  // first session starts 2023-01-01 08:00 UTC
    std::uint64_t seed = 7;
};

struct SyntheticData {
    SeriesTable emission;  // session ids assigned, dropped rows absent
    SeriesTable weather;   // hourly
    SessionManifest manifest;
};

/// Deterministic per seed. Sessions are one day apart.
SyntheticData generate_synthetic(const GeneratorConfig& config);

/// Writes emission.csv, weather.csv and sessions.json into `dir`.
void write_synthetic(const std::filesystem::path& dir, const SyntheticData& data);

}  // namespace lru::data
