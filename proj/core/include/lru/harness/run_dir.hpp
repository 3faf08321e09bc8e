#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace lru::harness {

/// Creates <root>/<UTC timestamp>-<command>-<hash> (suffixing -2, -3, ... on
/// collision) and returns its path.
std::filesystem::path make_run_dir(const std::filesystem::path& root, const std::string& command,
                                   const std::string& hash);

/// Command line, UTC wall-clock time and library version.
nlohmann::json provenance(const std::vector<std::string>& argv);

void write_json(const std::filesystem::path& path, const nlohmann::json& value);

/// Streaming CSV writer; rows go straight to disk.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    CsvWriter& operator<<(double value);
    CsvWriter& operator<<(long value);
    CsvWriter& operator<<(int value) { return *this << static_cast<long>(value); }
    CsvWriter& operator<<(const std::string& value);
    void end_row();

private:
    void separator();

    std::ofstream out_;
    std::filesystem::path path_;
    bool first_ = true;
};

}  // namespace lru::harness
