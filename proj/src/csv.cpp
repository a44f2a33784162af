#include "hsvar/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace hsvar {

std::string format_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::trunc), path_(path) {
    if (!out_) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (c > 0) {
            out_ << ',';
        }
        out_ << cells[c];
    }
    out_ << '\n';
    if (!out_) {
        throw std::runtime_error("write failed for " + path_.string());
    }
}

} // namespace hsvar
