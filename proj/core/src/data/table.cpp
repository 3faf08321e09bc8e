#include "lru/data/table.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lru/error.hpp"

namespace lru::data {

bool Column::missing(std::size_t row) const {
    return categorical() ? labels[row].empty() : std::isnan(values[row]);
}

const Column* SeriesTable::find(std::string_view name) const {
    for (const auto& c : columns) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

Column* SeriesTable::find(std::string_view name) {
    for (auto& c : columns) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

const Column& SeriesTable::column(std::string_view name) const {
    const Column* c = find(name);
    if (c == nullptr) fail(ErrorKind::Contract, "no column named '" + std::string(name) + "'");
    return *c;
}

Column& SeriesTable::column(std::string_view name) {
    Column* c = find(name);
    if (c == nullptr) fail(ErrorKind::Contract, "no column named '" + std::string(name) + "'");
    return *c;
}

std::vector<SessionRange> SeriesTable::sessions() const {
    std::vector<SessionRange> out;
    for (std::size_t r = 0; r < rows(); ++r) {
        if (out.empty() || out.back().id != session[r]) {
            out.push_back({session[r], r, r + 1});
        } else {
            out.back().end = r + 1;
        }
    }
    return out;
}

std::vector<std::string> SeriesTable::names(ColumnRole role) const {
    std::vector<std::string> out;
    for (const auto& c : columns) {
        if (c.role == role) out.push_back(c.name);
    }
    return out;
}

std::size_t SeriesTable::missing_cells() const {
    std::size_t n = 0;
    for (const auto& c : columns) {
        for (std::size_t r = 0; r < c.size(); ++r) n += c.missing(r) ? 1 : 0;
    }
    return n;
}

SeriesTable SeriesTable::empty_like() const {
    SeriesTable out;
    for (const auto& c : columns) out.columns.push_back(Column{c.name, c.role, {}, {}});
    return out;
}

void SeriesTable::append_row(const SeriesTable& source, std::size_t row) {
    timestamps.push_back(source.timestamps[row]);
    session.push_back(source.session[row]);
    for (std::size_t i = 0; i < columns.size(); ++i) {
        const Column& src = source.columns[i];
        if (src.categorical()) {
            columns[i].labels.push_back(src.labels[row]);
        } else {
            columns[i].values.push_back(src.values[row]);
        }
    }
}

void SeriesTable::append_missing_row(double timestamp, int session_id) {
    timestamps.push_back(timestamp);
    session.push_back(session_id);
    for (auto& c : columns) {
        if (c.categorical()) {
            c.labels.emplace_back();
        } else {
            c.values.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
}

void SeriesTable::validate() const {
    if (session.size() != rows()) fail(ErrorKind::Contract, "session ids do not cover every row");
    for (const auto& c : columns) {
        if (c.size() != rows()) fail(ErrorKind::Contract, "column '" + c.name + "' has the wrong length");
    }
    std::vector<int> seen;
    for (const auto& s : sessions()) {
        if (std::find(seen.begin(), seen.end(), s.id) != seen.end()) {
            fail(ErrorKind::Contract, "session " + std::to_string(s.id) + " is not contiguous");
        }
        seen.push_back(s.id);
        for (std::size_t r = s.begin + 1; r < s.end; ++r) {
            if (!(timestamps[r] > timestamps[r - 1])) {
                fail(ErrorKind::Contract, "timestamps in session " + std::to_string(s.id) + " do not increase at row " +
                                              std::to_string(r));
            }
        }
    }
}

SeriesTable select_sessions(const SeriesTable& table, const std::vector<int>& ids) {
    SeriesTable out = table.empty_like();
    for (const auto& s : table.sessions()) {
        if (std::find(ids.begin(), ids.end(), s.id) == ids.end()) continue;
        for (std::size_t r = s.begin; r < s.end; ++r) out.append_row(table, r);
    }
    return out;
}

}  // namespace lru::data
