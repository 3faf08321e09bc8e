#pragma once

#include <cstdint>

#include "lru/data/table.hpp"

namespace lru::harness {

struct ImputeBenchConfig {
    double mask_rate = 0.2;
    int window = 5;
    int k = 20;
    std::uint64_t seed = 0;
};

struct ImputeBenchResult {
    std::size_t rows = 0;
    std::size_t masked_cells = 0;
    double rolling_mse = 0.0;
    double knn_mse = 0.0;
};

/// Standardizes every numeric column of a complete table, hides a random
/// `mask_rate` share of its cells, and scores both imputers on the hidden
/// cells. Categorical columns are ignored.
ImputeBenchResult impute_bench(const data::SeriesTable& complete, const ImputeBenchConfig& cfg = {});

}  // namespace lru::harness
