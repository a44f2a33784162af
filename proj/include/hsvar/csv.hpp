#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace hsvar {

/// Shortest round-trip-stable text for a double ("%.10g").
std::string format_number(double x);

/// Minimal CSV writer; cells are written verbatim, rows joined with ','.
class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path);
    void row(const std::vector<std::string>& cells);

private:
    std::ofstream out_;
    std::filesystem::path path_;
};

} // namespace hsvar
