#include "lru/harness/prepare.hpp"

#include "lru/data/io.hpp"
#include "lru/data/transform.hpp"
#include "lru/error.hpp"

namespace lru::harness {

RawData load_raw(const std::filesystem::path& dir, const DataOptions& options) {
    RawData raw;
    raw.emission = data::load_emission_csv(dir / "emission.csv");
    raw.weather = data::load_weather_csv(dir / "weather.csv");
    if (std::filesystem::exists(dir / "sessions.json")) {
        data::assign_sessions(raw.emission, data::read_manifest(dir / "sessions.json"));
    } else {
        data::assign_sessions_by_gap(raw.emission, options.max_gap);
    }
    return raw;
}

data::SeriesTable clean(const RawData& raw, int impute_window) {
    const data::SeriesTable grid = data::resample_to_grid(raw.emission);
    return data::join_weather(data::impute_rolling_median(grid, impute_window), raw.weather);
}

PreparedData prepare(const RawData& raw, const DataOptions& options) {
    const data::SplitTables split = data::split_sessions(clean(raw, options.impute_window), options.train_fraction);
    PreparedData out;
    out.pipeline = data::fit_pipeline(split.train, split.val, {options.impute_window, options.strict_vocabulary});
    out.train = data::apply_pipeline(out.pipeline, split.train);
    out.val = data::apply_pipeline(out.pipeline, split.val);
    return out;
}

Dataset prepare_validation(const RawData& raw, const data::FittedPipeline& pipeline, const DataOptions& options) {
    if (!pipeline.fitted) fail(ErrorKind::Usage, "checkpoint carries no fitted pipeline");
    const data::SplitTables split = data::split_sessions(clean(raw, pipeline.impute_window), options.train_fraction);
    for (const auto& s : pipeline.numeric) {
        if (split.val.find(s.name) == nullptr) {
            fail(ErrorKind::Compatibility, "data lacks column '" + s.name + "' required by the checkpoint pipeline");
        }
    }
    return data::apply_pipeline(pipeline, split.val);
}

}  // namespace lru::harness
