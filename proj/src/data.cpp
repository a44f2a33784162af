#include "hsvar/data.hpp"

#include "hsvar/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hsvar {

namespace {

const double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return "";
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool parse_double(const std::string& text, double& out) {
    if (text.empty()) {
        return false;
    }
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool is_quarter_start(const Date& d) { return d.day == 1 && (d.month - 1) % 3 == 0; }

} // namespace

Date Date::parse(const std::string& text) {
    Date d;
    char tail = 0;
    if (text.size() != 10 || std::sscanf(text.c_str(), "%4d-%2d-%2d%c", &d.year, &d.month, &d.day, &tail) != 3 ||
        text[4] != '-' || text[7] != '-') {
        throw std::invalid_argument("invalid date '" + text + "' (expected YYYY-MM-DD)");
    }
    static const int days[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days[d.month - 1]) {
        throw std::invalid_argument("invalid date '" + text + "'");
    }
    return d;
}

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

Transform parse_transform(const std::string& code) {
    if (code == "level") return Transform::level;
    if (code == "diff") return Transform::diff;
    if (code == "log") return Transform::log;
    if (code == "log_diff") return Transform::log_diff;
    throw std::invalid_argument("unknown transform code '" + code + "'");
}

std::string to_string(Transform t) {
    switch (t) {
    case Transform::level: return "level";
    case Transform::diff: return "diff";
    case Transform::log: return "log";
    case Transform::log_diff: return "log_diff";
    }
    throw std::invalid_argument("unknown transform");
}

Aggregation parse_aggregation(const std::string& name) {
    if (name == "mean") return Aggregation::mean;
    if (name == "last") return Aggregation::last;
    throw std::invalid_argument("unknown aggregation '" + name + "' (expected mean or last)");
}

std::string to_string(Aggregation a) { return a == Aggregation::mean ? "mean" : "last"; }

TimeSeriesPanel TimeSeriesPanel::head(int count) const {
    if (count < 0 || count > rows()) {
        throw std::out_of_range("TimeSeriesPanel::head: bad row count");
    }
    TimeSeriesPanel out = *this;
    out.dates.resize(static_cast<std::size_t>(count));
    out.values = values.topRows(count);
    return out;
}

RawSeries load_csv(const std::filesystem::path& path, const std::string& series_id) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    RawSeries s;
    s.id = series_id;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (!header) {
            std::string h = line;
            h.erase(std::remove(h.begin(), h.end(), ' '), h.end());
            std::transform(h.begin(), h.end(), h.begin(), [](unsigned char c) { return std::toupper(c); });
            if (h != "DATE,VALUE" && h.rfind("DATE,", 0) != 0) {
                throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected header DATE,VALUE", lineno);
            }
            header = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected two fields", lineno);
        }
        const std::string date_text = trim(line.substr(0, comma));
        const std::string value_text = trim(line.substr(comma + 1));
        Date d;
        try {
            d = Date::parse(date_text);
        } catch (const std::invalid_argument& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what(), lineno);
        }
        if (!s.dates.empty() && !(s.dates.back() < d)) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": dates not strictly increasing", lineno);
        }
        double v = kMissing;
        if (!value_text.empty() && value_text != ".") {
            if (!parse_double(value_text, v)) {
                throw ParseError(path.string() + ":" + std::to_string(lineno) + ": invalid number '" + value_text + "'",
                                 lineno);
            }
        }
        s.dates.push_back(d);
        s.values.push_back(v);
    }
    if (!header) {
        throw ParseError(path.string() + ": empty file", 0);
    }
    return s;
}

RawSeries to_quarterly(const RawSeries& series, Aggregation method) {
    if (series.size() == 0) {
        return series;
    }
    const bool quarterly = std::all_of(series.dates.begin(), series.dates.end(), is_quarter_start) &&
                           std::adjacent_find(series.dates.begin(), series.dates.end(), [](const Date& a, const Date& b) {
                               return b.month_index() - a.month_index() != 3;
                           }) == series.dates.end();
    if (quarterly) {
        return series;
    }

    RawSeries out;
    out.id = series.id;
    std::size_t i = 0;
    while (i < series.size()) {
        const Date q = series.dates[i].quarter_start();
        std::vector<double> months;
        std::size_t j = i;
        while (j < series.size() && series.dates[j].quarter_start() == q) {
            months.push_back(series.values[j]);
            ++j;
        }
        if (months.size() != 3) {
            if (j == series.size() || i == 0) {
                std::cerr << "warning: " << series.id << ": incomplete " << (i == 0 ? "first" : "final")
                          << " quarter " << q.iso() << " dropped\n";
                i = j;
                continue;
            }
            throw std::invalid_argument(series.id + ": quarter " + q.iso() + " has " + std::to_string(months.size()) +
                                        " monthly observations");
        }
        double v;
        if (method == Aggregation::last) {
            v = months.back();
        } else {
            v = (months[0] + months[1] + months[2]) / 3.0;  // NaN propagates
        }
        out.dates.push_back(q);
        out.values.push_back(v);
        i = j;
    }
    return out;
}

RawSeries apply_transform(const RawSeries& series, Transform code) {
    const bool uses_log = code == Transform::log || code == Transform::log_diff;
    if (uses_log) {
        for (std::size_t t = 0; t < series.size(); ++t) {
            if (!std::isnan(series.values[t]) && series.values[t] <= 0.0) {
                throw std::domain_error(series.id + ": non-positive value " + std::to_string(series.values[t]) +
                                        " at " + series.dates[t].iso() + " under " + to_string(code) + " transform");
            }
        }
    }
    RawSeries out;
    out.id = series.id;
    switch (code) {
    case Transform::level:
        return series;
    case Transform::log:
        out.dates = series.dates;
        for (double v : series.values) {
            out.values.push_back(std::log(v));
        }
        return out;
    case Transform::diff:
    case Transform::log_diff:
        for (std::size_t t = 1; t < series.size(); ++t) {
            const double a = series.values[t - 1];
            const double b = series.values[t];
            out.dates.push_back(series.dates[t]);
            out.values.push_back(code == Transform::diff ? b - a : std::log(b / a));
        }
        return out;
    }
    throw std::invalid_argument("unknown transform");
}

TimeSeriesPanel align(const std::vector<RawSeries>& series, const std::vector<Transform>& transforms) {
    if (series.empty()) {
        throw std::invalid_argument("align: no series");
    }
    if (transforms.size() != series.size()) {
        throw std::invalid_argument("align: one transform code per series required");
    }
    Date start{0, 1, 1};
    Date end{9999, 12, 31};
    for (const auto& s : series) {
        std::size_t a = 0;
        std::size_t b = s.size();
        while (a < b && std::isnan(s.values[a])) ++a;
        while (b > a && std::isnan(s.values[b - 1])) --b;
        if (a == b) {
            throw std::invalid_argument("align: series " + s.id + " has no observations");
        }
        start = std::max(start, s.dates[a]);
        end = std::min(end, s.dates[b - 1]);
    }
    if (end < start) {
        throw std::invalid_argument("align: series have no common support");
    }

    TimeSeriesPanel panel;
    panel.transforms = transforms;
    for (const auto& s : series) {
        panel.series_ids.push_back(s.id);
    }
    const auto& first = series.front();
    for (std::size_t t = 0; t < first.size(); ++t) {
        if (!(first.dates[t] < start) && !(end < first.dates[t])) {
            panel.dates.push_back(first.dates[t]);
        }
    }
    const auto T = static_cast<Eigen::Index>(panel.dates.size());
    panel.values.resize(T, static_cast<Eigen::Index>(series.size()));
    for (std::size_t j = 0; j < series.size(); ++j) {
        const auto& s = series[j];
        auto it = std::lower_bound(s.dates.begin(), s.dates.end(), start);
        auto idx = static_cast<std::size_t>(it - s.dates.begin());
        for (Eigen::Index t = 0; t < T; ++t, ++idx) {
            if (idx >= s.size() || !(s.dates[idx] == panel.dates[static_cast<std::size_t>(t)])) {
                throw std::invalid_argument("align: series " + s.id + " does not cover " +
                                            panel.dates[static_cast<std::size_t>(t)].iso());
            }
            if (std::isnan(s.values[idx])) {
                throw std::invalid_argument("align: series " + s.id + " is missing " + s.dates[idx].iso());
            }
            panel.values(t, static_cast<Eigen::Index>(j)) = s.values[idx];
        }
    }
    for (Eigen::Index t = 1; t < T; ++t) {
        const auto& a = panel.dates[static_cast<std::size_t>(t - 1)];
        const auto& b = panel.dates[static_cast<std::size_t>(t)];
        if (b.month_index() - a.month_index() != 3) {
            throw std::invalid_argument("align: dates " + a.iso() + " and " + b.iso() + " are not one quarter apart");
        }
    }
    return panel;
}

std::vector<Standardization> standardization_constants(const Eigen::MatrixXd& values) {
    if (values.rows() < 2) {
        throw std::invalid_argument("standardize: need at least two rows");
    }
    std::vector<Standardization> out;
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        const double mean = values.col(j).mean();
        const double ss = (values.col(j).array() - mean).square().sum();
        const double sd = std::sqrt(ss / static_cast<double>(values.rows() - 1));
        if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
            throw std::invalid_argument("standardize: column " + std::to_string(j) + " has zero variance");
        }
        out.push_back({mean, sd});
    }
    return out;
}

TimeSeriesPanel standardize(const TimeSeriesPanel& panel, const std::vector<Standardization>& constants) {
    if (constants.size() != static_cast<std::size_t>(panel.series_count())) {
        throw std::invalid_argument("standardize: one constant pair per series required");
    }
    if (panel.standardized()) {
        throw std::invalid_argument("standardize: panel is already standardized");
    }
    TimeSeriesPanel out = panel;
    for (std::size_t j = 0; j < constants.size(); ++j) {
        const auto c = static_cast<Eigen::Index>(j);
        out.values.col(c) = (panel.values.col(c).array() - constants[j].mean) / constants[j].sd;
    }
    out.standardization = constants;
    return out;
}

TimeSeriesPanel standardize(const TimeSeriesPanel& panel) {
    if (panel.standardized()) {
        // Re-standardizing composes the constants so the panel still inverts to raw data.
        const auto extra = standardization_constants(panel.values);
        TimeSeriesPanel out = panel;
        for (std::size_t j = 0; j < extra.size(); ++j) {
            const auto c = static_cast<Eigen::Index>(j);
            out.values.col(c) = (panel.values.col(c).array() - extra[j].mean) / extra[j].sd;
            out.standardization[j].mean += panel.standardization[j].sd * extra[j].mean;
            out.standardization[j].sd *= extra[j].sd;
        }
        return out;
    }
    return standardize(panel, standardization_constants(panel.values));
}

TimeSeriesPanel inverse_standardize(const TimeSeriesPanel& panel) {
    if (!panel.standardized()) {
        throw std::invalid_argument("inverse_standardize: panel carries no standardization constants");
    }
    TimeSeriesPanel out = panel;
    for (std::size_t j = 0; j < panel.standardization.size(); ++j) {
        const auto c = static_cast<Eigen::Index>(j);
        out.values.col(c) = panel.values.col(c).array() * panel.standardization[j].sd + panel.standardization[j].mean;
    }
    out.standardization.clear();
    return out;
}

void write_panel(const TimeSeriesPanel& panel, const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << "date";
    for (const auto& id : panel.series_ids) {
        out << ',' << id;
    }
    out << '\n';
    char buf[32];
    for (int t = 0; t < panel.rows(); ++t) {
        out << panel.dates[static_cast<std::size_t>(t)].iso();
        for (int j = 0; j < panel.series_count(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", panel.values(t, j));
            out << ',' << buf;
        }
        out << '\n';
    }

    nlohmann::ordered_json meta;
    meta["series_ids"] = panel.series_ids;
    std::vector<std::string> codes;
    for (auto t : panel.transforms) {
        codes.push_back(to_string(t));
    }
    meta["transforms"] = codes;
    meta["rows"] = panel.rows();
    meta["first_date"] = panel.dates.empty() ? "" : panel.dates.front().iso();
    meta["last_date"] = panel.dates.empty() ? "" : panel.dates.back().iso();
    auto& st = meta["standardization"] = nlohmann::ordered_json::array();
    for (const auto& s : panel.standardization) {
        st.push_back({{"mean", s.mean}, {"sd", s.sd}});
    }
    std::ofstream side(path.string() + ".json", std::ios::trunc);
    side << meta.dump(2) << '\n';
}

std::optional<Transform> default_transform(const std::string& id) {
    static const std::map<std::string, Transform> table = {
        {"GS1", Transform::diff},          {"UNRATE", Transform::diff},      {"GDPC96", Transform::log_diff},
        {"GDPDEF", Transform::log_diff},   {"PAYEMS", Transform::log_diff},  {"M1SL", Transform::log_diff},
        {"M2SL", Transform::log_diff},     {"M1V", Transform::log_diff},
    };
    auto it = table.find(id);
    if (it == table.end()) {
        return std::nullopt;
    }
    return it->second;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    auto base = path.parent_path();
    return parse(buf.str(), base.empty() ? std::filesystem::path(".") : base);
}

Config Config::parse(const std::string& text, const std::filesystem::path& base_dir) {
    Config c;
    c.base_dir_ = base_dir;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("config line " + std::to_string(lineno) + ": expected key = value", lineno);
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw ParseError("config line " + std::to_string(lineno) + ": empty key", lineno);
        }
        c.values_[key] = trim(line.substr(eq + 1));
    }
    return c;
}

std::string Config::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
        throw std::invalid_argument("config: missing key '" + key + "'");
    }
    return it->second;
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

int Config::get_int(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get(key);
    int out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw std::invalid_argument("config: '" + key + "' is not an integer: " + v);
    }
    return out;
}

double Config::get_double(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    double out = 0.0;
    if (!parse_double(get(key), out)) {
        throw std::invalid_argument("config: '" + key + "' is not a number: " + get(key));
    }
    return out;
}

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get(key);
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw std::invalid_argument("config: '" + key + "' is not a non-negative integer: " + v);
    }
    return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config: '" + key + "' is not a boolean: " + v);
}

std::vector<std::string> Config::get_list(const std::string& key) const {
    std::vector<std::string> out;
    std::stringstream ss(get(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

std::filesystem::path Config::get_path(const std::string& key) const {
    std::filesystem::path p = get(key);
    return p.is_absolute() ? p : base_dir_ / p;
}

TimeSeriesPanel load_panel(const Config& config) {
    const auto ids = config.get_list("series");
    if (ids.empty()) {
        throw std::invalid_argument("config: 'series' lists no series");
    }
    std::vector<RawSeries> series;
    std::vector<Transform> transforms;
    for (const auto& id : ids) {
        Transform code;
        if (config.has(id + ".transform")) {
            code = parse_transform(config.get(id + ".transform"));
        } else if (auto d = default_transform(id)) {
            code = *d;
        } else {
            throw std::invalid_argument("config: no transform given for series '" + id + "'");
        }
        const auto method = parse_aggregation(config.get(id + ".aggregation", "mean"));
        auto raw = load_csv(config.get_path(id + ".file"), id);
        series.push_back(apply_transform(to_quarterly(raw, method), code));
        transforms.push_back(code);
    }
    return align(series, transforms);
}

} // namespace hsvar
