#pragma once

// Straightforward second implementations of the imputers, written from the
// definitions rather than from the library code.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>
#include <vector>

#include "lru/data/table.hpp"

namespace lru::oracle {

inline double sorted_median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Rolling median over observed values, fill, then bfill, then ffill.
inline std::vector<double> reference_rolling_impute(const std::vector<double>& x, int w) {
    const long n = static_cast<long>(x.size());
    const long h = w / 2;
    std::vector<double> med(x.size(), std::numeric_limits<double>::quiet_NaN());
    for (long i = 0; i < n; ++i) {
        std::vector<double> obs;
        for (long q = std::max(0L, i - h); q <= std::min(n - 1, i + h); ++q) {
            if (!std::isnan(x[static_cast<std::size_t>(q)])) obs.push_back(x[static_cast<std::size_t>(q)]);
        }
        if (!obs.empty()) med[static_cast<std::size_t>(i)] = sorted_median(obs);
    }
    std::vector<double> y = x;
    for (long i = 0; i < n; ++i) {
        if (std::isnan(y[static_cast<std::size_t>(i)])) y[static_cast<std::size_t>(i)] = med[static_cast<std::size_t>(i)];
    }
    for (long i = n - 2; i >= 0; --i) {
        if (std::isnan(y[static_cast<std::size_t>(i)])) y[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i + 1)];
    }
    for (long i = 1; i < n; ++i) {
        if (std::isnan(y[static_cast<std::size_t>(i)])) y[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i - 1)];
    }
    return y;
}

/// Exhaustive nearest-neighbour fill of a dense matrix (rows x cols, NaN = missing).
inline std::vector<std::vector<double>> reference_knn(const std::vector<std::vector<double>>& x, int k) {
    auto out = x;
    const std::size_t cols = x.empty() ? 0 : x[0].size();
    for (std::size_t r = 0; r < x.size(); ++r) {
        for (std::size_t j = 0; j < cols; ++j) {
            if (!std::isnan(x[r][j])) continue;
            std::vector<std::tuple<double, std::size_t>> cand;
            for (std::size_t q = 0; q < x.size(); ++q) {
                if (q == r || std::isnan(x[q][j])) continue;
                double s = 0.0;
                int shared = 0;
                for (std::size_t i = 0; i < cols; ++i) {
                    if (!std::isnan(x[r][i]) && !std::isnan(x[q][i])) {
                        s += std::pow(x[r][i] - x[q][i], 2);
                        ++shared;
                    }
                }
                if (shared > 0) cand.emplace_back(std::sqrt(s * static_cast<double>(cols) / shared), q);
            }
            std::sort(cand.begin(), cand.end());
            const std::size_t take = std::min<std::size_t>(cand.size(), static_cast<std::size_t>(k));
            double sum = 0.0;
            for (std::size_t d = 0; d < take; ++d) sum += x[std::get<1>(cand[d])][j];
            out[r][j] = sum / static_cast<double>(take);
        }
    }
    return out;
}

}  // namespace lru::oracle
