#pragma once

#include <string>
#include <vector>

#include "lru/data/table.hpp"
#include "lru/dataset.hpp"

namespace lru::data {

struct ColumnStats {
    std::string name;
    double mean = 0.0;
    double scale = 1.0;
};

struct Vocabulary {
    std::string name;
    std::vector<std::string> values;  // first-appearance order; one-hot slot order
};

/// Frozen preprocessing state. Features are the standardized numeric columns
/// followed by one one-hot block per categorical column.
struct FittedPipeline {
    bool fitted = false;
    std::vector<ColumnStats> numeric;
    std::vector<Vocabulary> categorical;
    std::vector<ColumnStats> targets;
    int impute_window = 5;
    bool strict_vocabulary = false;

    std::vector<std::string> feature_names() const;
    std::vector<std::string> target_names() const;
    Index input_size() const;

    double restore_target(std::size_t k, double standardized) const {
        return standardized * targets[k].scale + targets[k].mean;
    }
};

struct PipelineOptions {
    int impute_window = 5;
    /// Fit category vocabularies on the training table only.
    bool strict_vocabulary = false;
};

/// Numeric and target statistics come from `train`; vocabularies from the
/// union of `train` and `val` unless strict_vocabulary is set. Constant
/// columns are a Config error.
FittedPipeline fit_pipeline(const SeriesTable& train, const SeriesTable& val, const PipelineOptions& options = {});

/// Standardizes and one-hot encodes `table` into model-ready sessions.
/// Unknown categories encode as all zeros (with a warning on stderr); any
/// remaining missing numeric cell is an Imputation error.
Dataset apply_pipeline(const FittedPipeline& pipeline, const SeriesTable& table);

}  // namespace lru::data
