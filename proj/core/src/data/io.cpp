#include "lru/data/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lru/error.hpp"

namespace lru::data {
namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

struct Line {
    std::string_view text;
    long offset;  // byte offset of the line start
    long number;  // 1-based line number
};

std::vector<Line> split_lines(const std::string& text) {
    std::vector<Line> lines;
    std::size_t pos = 0;
    long number = 1;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string_view line(text.data() + pos, nl - pos);
        if (!trim(line).empty()) lines.push_back({line, static_cast<long>(pos), number});
        pos = nl + 1;
        ++number;
    }
    return lines;
}

/// Comma split with double-quoted fields.
std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.emplace_back(trim(cur));
    return out;
}

template <std::size_t N>
std::vector<std::size_t> match_header(const std::vector<std::string>& header,
                                      const std::array<std::string_view, N>& schema, const std::string& what) {
    std::vector<std::string> unknown;
    std::vector<std::string> absent;
    std::vector<std::size_t> position(N, 0);
    for (const auto& h : header) {
        if (std::find(schema.begin(), schema.end(), h) == schema.end()) unknown.push_back(h);
    }
    for (std::size_t i = 0; i < N; ++i) {
        auto it = std::find(header.begin(), header.end(), schema[i]);
        if (it == header.end()) {
            absent.emplace_back(schema[i]);
        } else {
            position[i] = static_cast<std::size_t>(it - header.begin());
        }
    }
    if (!unknown.empty() || !absent.empty() || header.size() != N) {
        std::string msg = what + " header does not match the schema;";
        auto list = [&](const char* label, const std::vector<std::string>& names) {
            if (names.empty()) return;
            msg += std::string(" ") + label + ":";
            for (const auto& n : names) msg += " " + n;
            msg += ";";
        };
        list("unknown", unknown);
        list("missing", absent);
        if (unknown.empty() && absent.empty()) msg += " duplicated column names";
        fail(ErrorKind::Schema, msg);
    }
    return position;
}

double parse_cell(const std::string& cell, const Line& line, std::string_view column) {
    if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ParseError("line " + std::to_string(line.number) + ", column " + std::string(column) +
                             ": cannot parse '" + cell + "' as a number",
                         line.offset);
    }
    return v;
}

struct RawRow {
    double timestamp;
    long line;
    std::size_t index;
};

/// Sorts rows by timestamp and rejects duplicates.
std::vector<std::size_t> sorted_order(const std::vector<RawRow>& rows, const std::string& what) {
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rows[a].timestamp < rows[b].timestamp; });
    for (std::size_t i = 1; i < order.size(); ++i) {
        const RawRow& a = rows[order[i - 1]];
        const RawRow& b = rows[order[i]];
        if (a.timestamp == b.timestamp) {
            throw ParseError(what + ": duplicate timestamp " + format_number(a.timestamp) + " on lines " +
                                 std::to_string(a.line) + " and " + std::to_string(b.line),
                             -1);
        }
    }
    return order;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) return "";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

SeriesTable load_emission_csv(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    const auto lines = split_lines(text);
    if (lines.empty()) fail(ErrorKind::Schema, path.string() + " is empty");
    const auto pos = match_header(split_fields(lines[0].text), kEmissionHeader, "emission CSV");

    std::vector<RawRow> raw;
    std::vector<std::vector<double>> cells(kEmissionHeader.size());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_fields(lines[i].text);
        if (fields.size() != kEmissionHeader.size()) {
            throw ParseError("line " + std::to_string(lines[i].number) + ": expected " +
                                 std::to_string(kEmissionHeader.size()) + " fields, found " +
                                 std::to_string(fields.size()),
                             lines[i].offset);
        }
        for (std::size_t c = 0; c < kEmissionHeader.size(); ++c) {
            cells[c].push_back(parse_cell(fields[pos[c]], lines[i], kEmissionHeader[c]));
        }
        if (std::isnan(cells[0].back())) {
            throw ParseError("line " + std::to_string(lines[i].number) + ": missing timestamp", lines[i].offset);
        }
        raw.push_back({cells[0].back(), lines[i].number, i - 1});
    }
    const auto order = sorted_order(raw, path.filename().string());

    SeriesTable table;
    for (std::size_t c = 1; c < kEmissionHeader.size(); ++c) {
        const bool target = std::find(kEmissionTargets.begin(), kEmissionTargets.end(), kEmissionHeader[c]) !=
                            kEmissionTargets.end();
        table.columns.push_back(Column{std::string(kEmissionHeader[c]),
                                       target ? ColumnRole::Target : ColumnRole::Numeric, {}, {}});
    }
    for (std::size_t r : order) {
        table.timestamps.push_back(cells[0][r]);
        table.session.push_back(1);
        for (std::size_t c = 1; c < kEmissionHeader.size(); ++c) table.columns[c - 1].values.push_back(cells[c][r]);
    }
    return table;
}

SeriesTable load_weather_csv(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    const auto lines = split_lines(text);
    if (lines.empty()) fail(ErrorKind::Schema, path.string() + " is empty");
    const auto pos = match_header(split_fields(lines[0].text), kWeatherHeader, "weather CSV");

    std::vector<RawRow> raw;
    std::vector<double> hours, temp, precip;
    std::vector<std::string> conditions;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_fields(lines[i].text);
        if (fields.size() != kWeatherHeader.size()) {
            throw ParseError("line " + std::to_string(lines[i].number) + ": expected 4 fields", lines[i].offset);
        }
        hours.push_back(parse_cell(fields[pos[0]], lines[i], kWeatherHeader[0]));
        temp.push_back(parse_cell(fields[pos[1]], lines[i], kWeatherHeader[1]));
        precip.push_back(parse_cell(fields[pos[2]], lines[i], kWeatherHeader[2]));
        conditions.push_back(fields[pos[3]]);
        if (std::isnan(hours.back())) {
            throw ParseError("line " + std::to_string(lines[i].number) + ": missing timestamp_hour",
                             lines[i].offset);
        }
        raw.push_back({hours.back(), lines[i].number, i - 1});
    }
    const auto order = sorted_order(raw, path.filename().string());

    SeriesTable w;
    w.columns = {Column{"temp_c", ColumnRole::Numeric, {}, {}}, Column{"precip_mm", ColumnRole::Numeric, {}, {}},
                 Column{"conditions", ColumnRole::Categorical, {}, {}}};
    for (std::size_t r : order) {
        w.timestamps.push_back(hours[r]);
        w.session.push_back(0);
        w.columns[0].values.push_back(temp[r]);
        w.columns[1].values.push_back(precip[r]);
        w.columns[2].labels.push_back(conditions[r]);
    }
    return w;
}

void write_emission_csv(const std::filesystem::path& path, const SeriesTable& table) {
    std::vector<const Column*> cols;
    for (std::size_t c = 1; c < kEmissionHeader.size(); ++c) cols.push_back(&table.column(kEmissionHeader[c]));
    std::string out;
    for (std::size_t c = 0; c < kEmissionHeader.size(); ++c) {
        if (c > 0) out += ',';
        out += kEmissionHeader[c];
    }
    out += '\n';
    for (std::size_t r = 0; r < table.rows(); ++r) {
        out += format_number(table.timestamps[r]);
        for (const Column* c : cols) {
            out += ',';
            out += format_number(c->values[r]);
        }
        out += '\n';
    }
    write_file(path, out);
}

void write_weather_csv(const std::filesystem::path& path, const SeriesTable& weather) {
    const Column& temp = weather.column("temp_c");
    const Column& precip = weather.column("precip_mm");
    const Column& cond = weather.column("conditions");
    std::string out = "timestamp_hour,temp_c,precip_mm,conditions\n";
    for (std::size_t r = 0; r < weather.rows(); ++r) {
        out += format_number(weather.timestamps[r]) + ',' + format_number(temp.values[r]) + ',' +
               format_number(precip.values[r]) + ',' + cond.labels[r] + '\n';
    }
    write_file(path, out);
}

SessionManifest read_manifest(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what(), static_cast<long>(e.byte));
    }
    try {
        SessionManifest m;
        m.emission_gain = j.at("shift").at("emission_gain").get<double>();
        m.temp_offset_c = j.at("shift").at("temp_offset_c").get<double>();
        m.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& s : j.at("sessions")) {
            ManifestEntry e;
            e.id = s.at("id").get<int>();
            e.first_row = s.at("first_row").get<std::size_t>();
            e.end_row = s.at("end_row").get<std::size_t>();
            e.start = s.at("start").get<double>();
            e.end = s.at("end").get<double>();
            e.shifted = s.at("shifted").get<bool>();
            m.sessions.push_back(e);
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": malformed session manifest: " + e.what(), -1);
    }
}

void write_manifest(const std::filesystem::path& path, const SessionManifest& manifest) {
    nlohmann::json j;
    j["seed"] = manifest.seed;
    j["shift"] = {{"emission_gain", manifest.emission_gain}, {"temp_offset_c", manifest.temp_offset_c}};
    j["sessions"] = nlohmann::json::array();
    for (const auto& s : manifest.sessions) {
        j["sessions"].push_back({{"id", s.id},
                                 {"first_row", s.first_row},
                                 {"end_row", s.end_row},
                                 {"start", s.start},
                                 {"end", s.end},
                                 {"shifted", s.shifted}});
    }
    write_file(path, j.dump(2) + "\n");
}

void assign_sessions_by_gap(SeriesTable& table, double max_gap) {
    int id = 1;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        if (r > 0 && table.timestamps[r] - table.timestamps[r - 1] > max_gap) ++id;
        table.session[r] = id;
    }
}

void assign_sessions(SeriesTable& table, const SessionManifest& manifest) {
    for (std::size_t r = 0; r < table.rows(); ++r) {
        const double t = table.timestamps[r];
        const auto it = std::find_if(manifest.sessions.begin(), manifest.sessions.end(),
                                     [&](const ManifestEntry& e) { return t >= e.start && t <= e.end; });
        if (it == manifest.sessions.end()) {
            throw ParseError("timestamp " + format_number(t) + " lies outside every manifest session", -1);
        }
        table.session[r] = it->id;
    }
    table.validate();
}

}  // namespace lru::data
