#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "topomap/learner.hpp"

namespace topomap::streams {

struct Frame {
    std::vector<InputPoint> points;
    std::uint64_t frame_index = 0;
    Eigen::Vector2d window_origin = Eigen::Vector2d::Zero();  // synthetic frames only
};

/// Square window of uniform points sliding along a fixed direction.
struct SyntheticStreamConfig {
    double square_size = 20.0;            // meters
    double translation_per_frame = 10.0;  // meters
    std::size_t points_per_frame = 4000;
    Eigen::Vector2d direction = Eigen::Vector2d::UnitX();
    double z_value = 0.0;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Points uniform over [o, o + s]^2 at z = z_value with
/// o = frame_index * translation * direction. Depends only on
/// (seed, frame_index).
Frame synthetic_frame(const SyntheticStreamConfig& config, std::uint64_t frame_index);

class FrameFormatError : public std::runtime_error {
public:
    FrameFormatError(const std::string& path, std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct LoadReport {
    std::size_t renormalized_normals = 0;  // normals off unit length by > 1e-3
};

/// Reads a registered point cloud. Two formats:
///   - whitespace-delimited text: "x y z [nx ny nz [trav]]" per line; blank
///     lines and lines starting with '#' are skipped
///   - ASCII PLY with at least x/y/z vertex properties, plus nx/ny/nz when
///     present
/// Coordinates are meters.
Frame load_frame_file(const std::filesystem::path& path, LoadReport* report = nullptr);

/// Writes the whitespace-delimited text format with round-trip precision.
void save_frame_text(const Frame& frame, const std::filesystem::path& path);

/// Regular files in `dir` sorted by name.
std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir);

/// Exactly `count` uniform draws with replacement, in draw order.
std::vector<InputPoint> sample_training_points(std::span<const InputPoint> frame,
                                               std::size_t count, std::mt19937_64& rng);

/// Index sequence behind sample_training_points.
std::vector<std::size_t> sample_indices(std::size_t frame_size, std::size_t count,
                                        std::mt19937_64& rng);

}  // namespace topomap::streams
