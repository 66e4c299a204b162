/**
 * @file bench.hpp
 * @brief Benchmark harness: runs, regressions, alpha sweeps, oracle checks.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topomap/complexity.hpp"
#include "topomap/learner.hpp"
#include "topomap/streams.hpp"

namespace topomap::bench {

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

enum class Model { Linear, Logarithmic };

const char* to_string(Model model);

struct FitResult {
    Model model = Model::Linear;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    bool degenerate = false;  // SS_tot == 0, r_squared reported as 1
};

/// Least squares y = a*x + b (Linear) or y = a*ln(x) + b (Logarithmic).
FitResult fit(std::span<const double> xs, std::span<const double> ys, Model model);

/// Linear-interpolation quantile, q in [0, 1].
double percentile(std::span<const double> values, double q);
double median(std::span<const double> values);

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

enum class Mode {
    Flat,          // exhaustive single-layer learner
    Hierarchical,  // layered learner
    Null,          // iterates samples without learning; calibrates the timer
};

struct SourceSpec {
    enum class Kind { Synthetic, Directory };
    Kind kind = Kind::Synthetic;
    streams::SyntheticStreamConfig synthetic;
    std::filesystem::path directory;
};

struct RunConfig {
    Mode mode = Mode::Hierarchical;
    SourceSpec source;
    std::uint64_t frames = 22;
    LearnerConfig learner;
    /// Runs the other learner in lockstep on the same samples and counts
    /// layer-1 decision mismatches per frame.
    bool oracle_check = false;
    /// When nonzero, stop after the first frame that leaves at least this
    /// many layer-1 nodes.
    std::uint64_t stop_at_layer1_nodes = 0;
};

/// Called after each frame with the primary map and that frame's row.
using FrameObserver = std::function<void(const MultiLayerMap&, const FrameMetrics&)>;

struct RunResult {
    std::vector<FrameMetrics> frames;
    MultiLayerMap map;
    std::uint64_t oracle_steps = 0;
    std::uint64_t oracle_mismatches = 0;
    /// Hierarchical oracle runs only: queries where an exhaustive search over
    /// the same map state finds a first winner within vigilance that differs
    /// from the layered search's.
    std::uint64_t drift_steps = 0;
    std::uint64_t drift_mismatches = 0;
};

RunResult run(const RunConfig& config, const FrameObserver& observer = {});

struct OracleReport {
    std::uint64_t steps = 0;
    std::uint64_t mismatches = 0;
    double rate = 0.0;
    std::uint64_t drift_mismatches = 0;
    double drift_rate = 0.0;
};

/// Hierarchical and flat learners in lockstep over a synthetic stream.
OracleReport oracle_check(const streams::SyntheticStreamConfig& stream, std::uint64_t frames,
                          LearnerConfig learner);

struct SweepRow {
    double alpha = 0.0;
    double median_wall_ms = 0.0;
    double median_distance_evals = 0.0;
    std::uint64_t total_nodes = 0;
    std::uint64_t layer_count = 0;
};

struct SweepRange {
    double lo = 2.0;
    double hi = 8.0;
    double step = 0.5;

    std::vector<double> values() const;
};

/// Parses "lo:hi:step".
SweepRange parse_sweep_range(const std::string& text);

std::vector<SweepRow> alpha_sweep(const SweepRange& range, const SourceSpec& source,
                                  std::uint64_t frames, LearnerConfig learner);

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(std::istream& in);

/// Columns: frame, wall_ms, dist_evals, L, nodes_l1..nodes_lK,
/// edges_l1..edges_lK, mismatches. K is the largest layer count in the table;
/// shorter rows are padded with 0. mismatches is empty when not checked.
void write_metrics_csv(std::ostream& out, std::span<const FrameMetrics> rows);
std::vector<FrameMetrics> read_metrics_csv(std::istream& in);

/// Columns: alpha, median_wall_ms, median_dist_evals, total_nodes, L.
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

/// Optimal alpha per cost ratio r followed by model curves over alpha.
void write_analysis(std::ostream& out);

// ---------------------------------------------------------------------------
// Map export
// ---------------------------------------------------------------------------

/// JSON document: config, per-layer vigilance, nodes, edges and deletion
/// statistics, plus a summary of node/edge counts and node ratio per layer.
void export_map(const MultiLayerMap& map, std::ostream& out);
void export_map(const MultiLayerMap& map, const std::filesystem::path& path);

MultiLayerMap import_map(std::istream& in);
MultiLayerMap import_map(const std::filesystem::path& path);

}  // namespace topomap::bench
