#include "lru/harness/run_dir.hpp"

#include <chrono>
#include <ctime>

#include "lru/data/io.hpp"
#include "lru/error.hpp"
#include "lru/version.hpp"

namespace lru::harness {
namespace {

std::string utc_stamp(const char* format) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), format, &tm);
    return buf;
}

}  // namespace

std::filesystem::path make_run_dir(const std::filesystem::path& root, const std::string& command,
                                   const std::string& hash) {
    const std::string base = utc_stamp("%Y%m%dT%H%M%SZ") + "-" + command + "-" + hash.substr(0, 8);
    std::error_code ec;
    std::filesystem::create_directories(root, ec);
    if (ec) fail(ErrorKind::Io, "cannot create " + root.string() + ": " + ec.message());
    for (int n = 1;; ++n) {
        const auto dir = root / (n == 1 ? base : base + "-" + std::to_string(n));
        if (std::filesystem::create_directory(dir, ec)) return dir;
        if (ec) fail(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
    }
}

nlohmann::json provenance(const std::vector<std::string>& argv) {
    return {{"command_line", argv}, {"timestamp_utc", utc_stamp("%Y-%m-%dT%H:%M:%SZ")}, {"version", kVersion}};
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << value.dump(2) << '\n';
    if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), path_(path) {
    if (!out_) fail(ErrorKind::Io, "cannot write " + path.string());
    for (const auto& h : header) *this << h;
    end_row();
}

void CsvWriter::separator() {
    if (!first_) out_ << ',';
    first_ = false;
}

CsvWriter& CsvWriter::operator<<(double value) {
    separator();
    out_ << data::format_number(value);
    return *this;
}

CsvWriter& CsvWriter::operator<<(long value) {
    separator();
    out_ << value;
    return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& value) {
    separator();
    if (value.find_first_of(",\"\n") != std::string::npos) {
        out_ << '"';
        for (char c : value) {
            if (c == '"') out_ << '"';
            out_ << c;
        }
        out_ << '"';
    } else {
        out_ << value;
    }
    return *this;
}

void CsvWriter::end_row() {
    out_ << '\n';
    first_ = true;
    if (!out_) fail(ErrorKind::Io, "failed writing " + path_.string());
}

}  // namespace lru::harness
