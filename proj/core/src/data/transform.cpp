#include "lru/data/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "lru/error.hpp"

namespace lru::data {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median_of(std::vector<double>& v) {
    const std::size_t n = v.size();
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

std::vector<std::size_t> numeric_columns(const SeriesTable& t) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (!t.columns[i].categorical()) out.push_back(i);
    }
    return out;
}

}  // namespace

SeriesTable join_weather(const SeriesTable& table, const SeriesTable& weather) {
    const Column& temp = weather.column("temp_c");
    const Column& precip = weather.column("precip_mm");
    const Column& cond = weather.column("conditions");
    if (weather.rows() == 0) fail(ErrorKind::Coverage, "weather table is empty");

    SeriesTable out = table;
    Column t_col{"temp_c", ColumnRole::Numeric, {}, {}};
    Column p_col{"precip_mm", ColumnRole::Numeric, {}, {}};
    Column c_col{"conditions", ColumnRole::Categorical, {}, {}};
    for (std::size_t r = 0; r < table.rows(); ++r) {
        const double ts = table.timestamps[r];
        const auto it = std::upper_bound(weather.timestamps.begin(), weather.timestamps.end(), ts);
        if (it == weather.timestamps.begin()) {
            fail(ErrorKind::Coverage, "row at t=" + std::to_string(static_cast<long long>(ts)) +
                                          " precedes the first weather hour");
        }
        const auto w = static_cast<std::size_t>(it - weather.timestamps.begin()) - 1;
        if (ts - weather.timestamps[w] >= 3600.0) {
            fail(ErrorKind::Coverage, "no weather hour covers t=" + std::to_string(static_cast<long long>(ts)));
        }
        t_col.values.push_back(temp.values[w]);
        p_col.values.push_back(precip.values[w]);
        c_col.labels.push_back(cond.labels[w]);
    }
    out.columns.push_back(std::move(t_col));
    out.columns.push_back(std::move(p_col));
    out.columns.push_back(std::move(c_col));
    return out;
}

SeriesTable resample_to_grid(const SeriesTable& table, double step) {
    if (!(step > 0.0)) fail(ErrorKind::Config, "grid step must be positive");
    SeriesTable out = table.empty_like();
    for (const auto& s : table.sessions()) {
        const double t0 = table.timestamps[s.begin];
        const auto last = static_cast<long long>(std::llround((table.timestamps[s.end - 1] - t0) / step));
        std::vector<long long> source(static_cast<std::size_t>(last + 1), -1);
        for (std::size_t r = s.begin; r < s.end; ++r) {
            const auto k = static_cast<std::size_t>(std::llround((table.timestamps[r] - t0) / step));
            if (source[k] < 0) source[k] = static_cast<long long>(r);
        }
        for (long long k = 0; k <= last; ++k) {
            const long long src = source[static_cast<std::size_t>(k)];
            if (src >= 0) {
                out.append_row(table, static_cast<std::size_t>(src));
                out.timestamps.back() = t0 + static_cast<double>(k) * step;
            } else {
                out.append_missing_row(t0 + static_cast<double>(k) * step, s.id);
            }
        }
    }
    return out;
}

SeriesTable impute_rolling_median(const SeriesTable& table, int window) {
    if (window < 3 || window % 2 == 0) fail(ErrorKind::Config, "rolling window must be odd and at least 3");
    const auto half = static_cast<std::size_t>(window / 2);
    SeriesTable out = table;
    std::vector<double> buf;
    for (std::size_t c : numeric_columns(table)) {
        const auto& src = table.columns[c].values;
        auto& dst = out.columns[c].values;
        for (const auto& s : table.sessions()) {
            bool any = false;
            for (std::size_t r = s.begin; r < s.end; ++r) any = any || !std::isnan(src[r]);
            if (!any) {
                fail(ErrorKind::Imputation, "column '" + table.columns[c].name + "' is entirely missing in session " +
                                                std::to_string(s.id));
            }
            for (std::size_t r = s.begin; r < s.end; ++r) {
                if (!std::isnan(src[r])) continue;
                buf.clear();
                const std::size_t lo = r - std::min(half, r - s.begin);
                const std::size_t hi = std::min(r + half + 1, s.end);
                for (std::size_t q = lo; q < hi; ++q) {
                    if (!std::isnan(src[q])) buf.push_back(src[q]);
                }
                if (!buf.empty()) dst[r] = median_of(buf);
            }
            double next = kNaN;
            for (std::size_t r = s.end; r-- > s.begin;) {
                if (std::isnan(dst[r])) {
                    dst[r] = next;
                } else {
                    next = dst[r];
                }
            }
            double prev = kNaN;
            for (std::size_t r = s.begin; r < s.end; ++r) {
                if (std::isnan(dst[r])) {
                    dst[r] = prev;
                } else {
                    prev = dst[r];
                }
            }
        }
    }
    return out;
}

SeriesTable impute_knn(const SeriesTable& table, int k) {
    if (k < 1) fail(ErrorKind::Config, "KNN imputer needs k >= 1");
    const auto cols = numeric_columns(table);
    const std::size_t n = table.rows();
    const std::size_t width = cols.size();

    // row-major copy of the numeric block for cache-friendly distance loops
    std::vector<double> x(n * width);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < width; ++i) x[r * width + i] = table.columns[cols[i]].values[r];
    }
    std::vector<std::size_t> observed_count(width, 0);
    std::vector<double> column_mean(width, 0.0);
    for (std::size_t i = 0; i < width; ++i) {
        for (std::size_t r = 0; r < n; ++r) {
            const double v = x[r * width + i];
            if (!std::isnan(v)) {
                ++observed_count[i];
                column_mean[i] += v;
            }
        }
        if (observed_count[i] > 0) column_mean[i] /= static_cast<double>(observed_count[i]);
    }

    SeriesTable out = table;
    std::vector<double> dist(n);
    std::vector<std::pair<double, std::size_t>> donors;
    for (std::size_t r = 0; r < n; ++r) {
        const double* xr = &x[r * width];
        bool any_missing = false;
        for (std::size_t i = 0; i < width; ++i) any_missing = any_missing || std::isnan(xr[i]);
        if (!any_missing) continue;

        for (std::size_t q = 0; q < n; ++q) {
            const double* xq = &x[q * width];
            double sq = 0.0;
            std::size_t shared = 0;
            for (std::size_t i = 0; i < width; ++i) {
                if (std::isnan(xr[i]) || std::isnan(xq[i])) continue;
                const double d = xr[i] - xq[i];
                sq += d * d;
                ++shared;
            }
            dist[q] = (q == r || shared == 0)
                          ? kNaN
                          : std::sqrt(sq * static_cast<double>(width) / static_cast<double>(shared));
        }

        for (std::size_t i = 0; i < width; ++i) {
            if (!std::isnan(xr[i])) continue;
            if (observed_count[i] == 0) {
                fail(ErrorKind::Imputation, "column '" + table.columns[cols[i]].name + "' has no observed values");
            }
            donors.clear();
            for (std::size_t q = 0; q < n; ++q) {
                if (!std::isnan(dist[q]) && !std::isnan(x[q * width + i])) donors.emplace_back(dist[q], q);
            }
            double fill = column_mean[i];
            if (!donors.empty()) {
                const std::size_t take = std::min(donors.size(), static_cast<std::size_t>(k));
                std::partial_sort(donors.begin(), donors.begin() + static_cast<std::ptrdiff_t>(take), donors.end());
                double sum = 0.0;
                for (std::size_t d = 0; d < take; ++d) sum += x[donors[d].second * width + i];
                fill = sum / static_cast<double>(take);
            }
            out.columns[cols[i]].values[r] = fill;
        }
    }
    return out;
}

SplitTables split_sessions(const SeriesTable& table, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        fail(ErrorKind::Config, "train fraction must lie in (0, 1)");
    }
    auto sessions = table.sessions();
    if (sessions.size() < 2) fail(ErrorKind::Config, "splitting needs at least two sessions");
    std::stable_sort(sessions.begin(), sessions.end(), [&](const SessionRange& a, const SessionRange& b) {
        return table.timestamps[a.begin] < table.timestamps[b.begin];
    });
    const double total = static_cast<double>(table.rows());
    std::vector<int> train_ids;
    std::vector<int> val_ids;
    std::size_t cumulative = 0;
    for (const auto& s : sessions) {
        const bool reached = static_cast<double>(cumulative) >= train_fraction * total - 1e-9;
        if (!reached && train_ids.size() + 1 < sessions.size()) {
            train_ids.push_back(s.id);
            cumulative += s.size();
        } else {
            val_ids.push_back(s.id);
        }
    }
    return {select_sessions(table, train_ids), select_sessions(table, val_ids)};
}

}  // namespace lru::data
