#include "lru/data/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>

#include "lru/error.hpp"

namespace lru::data {
namespace {

ColumnStats fit_stats(const Column& c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (double v : c.values) {
        if (std::isnan(v)) continue;
        sum += v;
        ++n;
    }
    if (n == 0) fail(ErrorKind::Config, "column '" + c.name + "' has no observed values to fit");
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (double v : c.values) {
        if (!std::isnan(v)) sq += (v - mean) * (v - mean);
    }
    const double scale = std::sqrt(sq / static_cast<double>(n));
    if (!(scale > 1e-12 * std::max(1.0, std::abs(mean)))) {
        fail(ErrorKind::Config, "column '" + c.name + "' is constant on the training set");
    }
    return {c.name, mean, scale};
}

}  // namespace

std::vector<std::string> FittedPipeline::feature_names() const {
    std::vector<std::string> out;
    for (const auto& s : numeric) out.push_back(s.name);
    for (const auto& v : categorical) {
        for (const auto& value : v.values) out.push_back(v.name + "=" + value);
    }
    return out;
}

std::vector<std::string> FittedPipeline::target_names() const {
    std::vector<std::string> out;
    for (const auto& s : targets) out.push_back(s.name);
    return out;
}

Index FittedPipeline::input_size() const { return static_cast<Index>(feature_names().size()); }

FittedPipeline fit_pipeline(const SeriesTable& train, const SeriesTable& val, const PipelineOptions& options) {
    if (train.rows() == 0) fail(ErrorKind::Config, "cannot fit a pipeline on an empty table");
    FittedPipeline p;
    p.impute_window = options.impute_window;
    p.strict_vocabulary = options.strict_vocabulary;
    for (const auto& c : train.columns) {
        switch (c.role) {
            case ColumnRole::Numeric:
                p.numeric.push_back(fit_stats(c));
                break;
            case ColumnRole::Target:
                p.targets.push_back(fit_stats(c));
                break;
            case ColumnRole::Categorical: {
                Vocabulary vocab{c.name, {}};
                auto add = [&](const std::vector<std::string>& labels) {
                    for (const auto& l : labels) {
                        if (!l.empty() && std::find(vocab.values.begin(), vocab.values.end(), l) == vocab.values.end()) {
                            vocab.values.push_back(l);
                        }
                    }
                };
                add(c.labels);
                if (!options.strict_vocabulary) {
                    if (const Column* vc = val.find(c.name)) add(vc->labels);
                }
                p.categorical.push_back(std::move(vocab));
                break;
            }
        }
    }
    if (p.targets.empty()) fail(ErrorKind::Config, "table has no target columns");
    p.fitted = true;
    return p;
}

Dataset apply_pipeline(const FittedPipeline& pipeline, const SeriesTable& table) {
    if (!pipeline.fitted) fail(ErrorKind::Usage, "apply_pipeline called before fit_pipeline");
    Dataset out;
    out.feature_names = pipeline.feature_names();
    out.target_names = pipeline.target_names();
    const auto m = static_cast<Index>(out.feature_names.size());
    const auto p = static_cast<Index>(out.target_names.size());

    std::vector<const Column*> numeric;
    for (const auto& s : pipeline.numeric) numeric.push_back(&table.column(s.name));
    std::vector<const Column*> categorical;
    for (const auto& v : pipeline.categorical) categorical.push_back(&table.column(v.name));
    std::vector<const Column*> targets;
    for (const auto& s : pipeline.targets) targets.push_back(&table.column(s.name));

    std::set<std::string> warned;
    for (const auto& range : table.sessions()) {
        SessionData s;
        s.id = range.id;
        const auto T = static_cast<Index>(range.size());
        s.inputs = SeqMatrix::Zero(T, m);
        s.targets = SeqMatrix::Zero(T, p);
        for (Index t = 0; t < T; ++t) {
            const std::size_t r = range.begin + static_cast<std::size_t>(t);
            s.timestamps.push_back(table.timestamps[r]);
            Index col = 0;
            for (std::size_t i = 0; i < numeric.size(); ++i, ++col) {
                const double v = numeric[i]->values[r];
                if (std::isnan(v)) {
                    fail(ErrorKind::Imputation, "missing value in '" + numeric[i]->name + "' at row " +
                                                    std::to_string(r) + " after imputation");
                }
                s.inputs(t, col) = (v - pipeline.numeric[i].mean) / pipeline.numeric[i].scale;
            }
            for (std::size_t i = 0; i < categorical.size(); ++i) {
                const auto& vocab = pipeline.categorical[i].values;
                const std::string& label = categorical[i]->labels[r];
                const auto it = std::find(vocab.begin(), vocab.end(), label);
                if (it != vocab.end()) {
                    s.inputs(t, col + static_cast<Index>(it - vocab.begin())) = 1.0;
                } else if (!label.empty() && warned.insert(categorical[i]->name + "=" + label).second) {
                    std::cerr << "warning: category '" << label << "' of column '" << categorical[i]->name
                              << "' is not in the fitted vocabulary; encoding as zeros\n";
                }
                col += static_cast<Index>(vocab.size());
            }
            for (std::size_t k = 0; k < targets.size(); ++k) {
                const double v = targets[k]->values[r];
                if (std::isnan(v)) {
                    fail(ErrorKind::Imputation, "missing value in '" + targets[k]->name + "' at row " +
                                                    std::to_string(r) + " after imputation");
                }
                s.targets(t, static_cast<Index>(k)) = (v - pipeline.targets[k].mean) / pipeline.targets[k].scale;
            }
        }
        out.sessions.push_back(std::move(s));
    }
    return out;
}

}  // namespace lru::data
