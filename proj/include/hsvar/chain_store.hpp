#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hsvar {

/// Named contiguous block inside a frame.
struct FrameSection {
    std::string name;
    std::size_t offset = 0;
    std::size_t length = 0;
};

struct FrameLayout {
    std::vector<FrameSection> sections;

    void add(const std::string& name, std::size_t length);
    std::size_t frame_length() const;
    const FrameSection& section(const std::string& name) const;
    bool has(const std::string& name) const;
};

/// Run metadata written to manifest.json next to frames.bin.
struct ChainManifest {
    std::string scheme;
    int n = 0;
    int lags = 0;
    int T = 0;
    int iterations = 0;
    int burn_in = 0;
    int thin = 1;
    int particles = 0;
    std::uint64_t seed = 0;
    bool complete = false;
    std::string error;
    std::vector<std::string> series_ids;
    double psi_step = 0.0;
    std::vector<double> tau_steps;
};

/// Post-burn-in draws. Each frame is a fixed-length record of float64
/// values laid out by FrameLayout. On disk: frames.bin holds the frames
/// back to back in little-endian order, manifest.json the metadata,
/// layout, frame count and an FNV-1a checksum of frames.bin.
class ChainStore {
public:
    ChainStore() = default;
    ChainStore(ChainManifest manifest, FrameLayout layout);

    const ChainManifest& manifest() const { return manifest_; }
    ChainManifest& manifest() { return manifest_; }
    const FrameLayout& layout() const { return layout_; }

    std::size_t frame_count() const;
    std::span<const double> frame(std::size_t k) const;
    std::span<const double> section(std::size_t k, const std::string& name) const;
    /// All draws of one section as a (frames x length) matrix.
    Eigen::MatrixXd section_matrix(const std::string& name) const;

    void append(std::span<const double> frame);

    /// Starts writing to `dir` (created if needed); later appends go to disk
    /// as well. finalize() writes the manifest.
    void attach(const std::filesystem::path& dir);
    void finalize(bool complete, const std::string& error = {});

    std::uint64_t checksum() const;
    std::string manifest_json() const;

    static ChainStore read(const std::filesystem::path& dir);

private:
    ChainManifest manifest_;
    FrameLayout layout_;
    std::vector<double> data_;
    std::optional<std::filesystem::path> dir_;
    std::ofstream frames_out_;
};

/// FNV-1a over the little-endian bytes of the values.
std::uint64_t fnv1a(std::span<const double> values);

} // namespace hsvar
