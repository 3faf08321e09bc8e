#pragma once

#include <filesystem>

#include "lru/data/pipeline.hpp"
#include "lru/data/table.hpp"
#include "lru/dataset.hpp"

namespace lru::harness {

struct DataOptions {
    double train_fraction = 0.8;
    int impute_window = 5;
    bool strict_vocabulary = false;
    double max_gap = 600.0;  // session split when no manifest is present
};

struct RawData {
    data::SeriesTable emission;  // sessions assigned
    data::SeriesTable weather;
};

/// Reads emission.csv and weather.csv from `dir`; sessions come from
/// sessions.json when present, otherwise from timestamp gaps.
RawData load_raw(const std::filesystem::path& dir, const DataOptions& options = {});

/// Resample to the 1 s grid, rolling-median imputation, weather join.
data::SeriesTable clean(const RawData& raw, int impute_window);

struct PreparedData {
    data::FittedPipeline pipeline;
    Dataset train;
    Dataset val;
};

PreparedData prepare(const RawData& raw, const DataOptions& options = {});

/// Validation split of `raw` transformed with an existing pipeline (the
/// stream a checkpoint is fine-tuned or evaluated on).
Dataset prepare_validation(const RawData& raw, const data::FittedPipeline& pipeline,
                           const DataOptions& options = {});

}  // namespace lru::harness
