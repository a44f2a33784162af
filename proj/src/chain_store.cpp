#include "hsvar/chain_store.hpp"

#include "hsvar/errors.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace hsvar {

namespace {

static_assert(std::endian::native == std::endian::little,
              "frame files are written in native order and must be little-endian");

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

} // namespace

void FrameLayout::add(const std::string& name, std::size_t length) {
    sections.push_back(FrameSection{name, frame_length(), length});
}

std::size_t FrameLayout::frame_length() const {
    return sections.empty() ? 0 : sections.back().offset + sections.back().length;
}

const FrameSection& FrameLayout::section(const std::string& name) const {
    for (const auto& s : sections) {
        if (s.name == name) {
            return s;
        }
    }
    throw std::out_of_range("frame layout has no section '" + name + "'");
}

bool FrameLayout::has(const std::string& name) const {
    for (const auto& s : sections) {
        if (s.name == name) {
            return true;
        }
    }
    return false;
}

std::uint64_t fnv1a(std::span<const double> values) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto* bytes = reinterpret_cast<const unsigned char*>(values.data());
    for (std::size_t i = 0; i < values.size_bytes(); ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

ChainStore::ChainStore(ChainManifest manifest, FrameLayout layout)
    : manifest_(std::move(manifest)), layout_(std::move(layout)) {}

std::size_t ChainStore::frame_count() const {
    const std::size_t len = layout_.frame_length();
    return len == 0 ? 0 : data_.size() / len;
}

std::span<const double> ChainStore::frame(std::size_t k) const {
    if (k >= frame_count()) {
        throw std::out_of_range("ChainStore: frame index out of range");
    }
    const std::size_t len = layout_.frame_length();
    return std::span<const double>(data_).subspan(k * len, len);
}

std::span<const double> ChainStore::section(std::size_t k, const std::string& name) const {
    const auto& s = layout_.section(name);
    return frame(k).subspan(s.offset, s.length);
}

Eigen::MatrixXd ChainStore::section_matrix(const std::string& name) const {
    const auto& s = layout_.section(name);
    const std::size_t frames = frame_count();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(s.length));
    for (std::size_t k = 0; k < frames; ++k) {
        const auto sec = section(k, name);
        for (std::size_t c = 0; c < s.length; ++c) {
            m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = sec[c];
        }
    }
    return m;
}

void ChainStore::append(std::span<const double> frame) {
    if (frame.size() != layout_.frame_length()) {
        throw std::invalid_argument("ChainStore: frame has wrong length");
    }
    data_.insert(data_.end(), frame.begin(), frame.end());
    if (frames_out_.is_open()) {
        frames_out_.write(reinterpret_cast<const char*>(frame.data()),
                          static_cast<std::streamsize>(frame.size_bytes()));
        if (!frames_out_) {
            throw std::runtime_error("ChainStore: write to frames.bin failed");
        }
    }
}

void ChainStore::attach(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    dir_ = dir;
    frames_out_.open(dir / "frames.bin", std::ios::binary | std::ios::trunc);
    if (!frames_out_) {
        throw std::runtime_error("ChainStore: cannot open " + (dir / "frames.bin").string());
    }
    if (!data_.empty()) {
        frames_out_.write(reinterpret_cast<const char*>(data_.data()),
                          static_cast<std::streamsize>(data_.size() * sizeof(double)));
    }
}

void ChainStore::finalize(bool complete, const std::string& error) {
    manifest_.complete = complete;
    manifest_.error = error;
    if (!dir_) {
        return;
    }
    frames_out_.flush();
    frames_out_.close();
    std::ofstream out(*dir_ / "manifest.json", std::ios::trunc);
    if (!out) {
        throw std::runtime_error("ChainStore: cannot write manifest");
    }
    out << manifest_json() << '\n';
}

std::uint64_t ChainStore::checksum() const { return fnv1a(data_); }

std::string ChainStore::manifest_json() const {
    nlohmann::ordered_json j;
    j["format"] = "hsvar-chain";
    j["format_version"] = 1;
    j["byte_order"] = "little";
    j["value_type"] = "float64";
    j["scheme"] = manifest_.scheme;
    j["n"] = manifest_.n;
    j["lags"] = manifest_.lags;
    j["T"] = manifest_.T;
    j["iterations"] = manifest_.iterations;
    j["burn_in"] = manifest_.burn_in;
    j["thin"] = manifest_.thin;
    j["particles"] = manifest_.particles;
    j["seed"] = manifest_.seed;
    j["series_ids"] = manifest_.series_ids;
    j["frame_count"] = frame_count();
    j["frame_length"] = layout_.frame_length();
    auto& sections = j["sections"] = nlohmann::ordered_json::array();
    for (const auto& s : layout_.sections) {
        sections.push_back({{"name", s.name}, {"offset", s.offset}, {"length", s.length}});
    }
    j["tuning"] = {{"psi_step", manifest_.psi_step}, {"tau_steps", manifest_.tau_steps}};
    j["checksum_fnv1a"] = hex64(checksum());
    j["complete"] = manifest_.complete;
    j["error"] = manifest_.error;
    return j.dump(2);
}

ChainStore ChainStore::read(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) {
        throw std::runtime_error("ChainStore: no manifest.json in " + dir.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("ChainStore: malformed manifest: ") + e.what(), 0);
    }
    if (j.value("format", "") != "hsvar-chain") {
        throw ParseError("ChainStore: not an hsvar chain manifest", 0);
    }
    ChainManifest m;
    m.scheme = j.at("scheme").get<std::string>();
    m.n = j.at("n").get<int>();
    m.lags = j.at("lags").get<int>();
    m.T = j.at("T").get<int>();
    m.iterations = j.at("iterations").get<int>();
    m.burn_in = j.at("burn_in").get<int>();
    m.thin = j.at("thin").get<int>();
    m.particles = j.at("particles").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.series_ids = j.at("series_ids").get<std::vector<std::string>>();
    m.complete = j.at("complete").get<bool>();
    m.error = j.at("error").get<std::string>();
    m.psi_step = j.at("tuning").at("psi_step").get<double>();
    m.tau_steps = j.at("tuning").at("tau_steps").get<std::vector<double>>();
    FrameLayout layout;
    for (const auto& s : j.at("sections")) {
        layout.add(s.at("name").get<std::string>(), s.at("length").get<std::size_t>());
    }
    ChainStore store(std::move(m), std::move(layout));

    const auto count = j.at("frame_count").get<std::size_t>();
    const std::size_t values = count * store.layout_.frame_length();
    std::ifstream frames(dir / "frames.bin", std::ios::binary);
    if (!frames) {
        throw std::runtime_error("ChainStore: no frames.bin in " + dir.string());
    }
    store.data_.resize(values);
    frames.read(reinterpret_cast<char*>(store.data_.data()),
                static_cast<std::streamsize>(values * sizeof(double)));
    if (static_cast<std::size_t>(frames.gcount()) != values * sizeof(double)) {
        throw ParseError("ChainStore: frames.bin shorter than the manifest frame count", 0);
    }
    if (hex64(store.checksum()) != j.at("checksum_fnv1a").get<std::string>()) {
        throw ParseError("ChainStore: checksum mismatch", 0);
    }
    return store;
}

} // namespace hsvar
