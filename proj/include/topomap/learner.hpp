#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "topomap/graph.hpp"

namespace topomap {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// One registered world-frame sample.
struct InputPoint {
    Vec3 position = Vec3::Zero();
    std::optional<Vec3> normal;           // unit length when present
    std::optional<bool> traversability;
};

/// First and second winners of a layer for one input.
struct WinnerPair {
    std::optional<NodeId> s1;
    double d1 = kInfinity;
    std::optional<NodeId> s2;
    double d2 = kInfinity;
};

enum class StepKind { NewNode, Updated, UpdatedWithEdge };

const char* to_string(StepKind kind);

struct StepOutcome {
    StepKind kind = StepKind::NewNode;
    NodeId node = 0;  // created node for NewNode, first winner otherwise
    std::uint64_t distance_evals = 0;
};

/// Per-frame instrumentation.
struct FrameMetrics {
    std::uint64_t frame_index = 0;
    double wall_time_ms = 0.0;
    std::uint64_t distance_evals = 0;
    std::vector<std::uint64_t> nodes_per_layer;
    std::vector<std::uint64_t> edges_per_layer;
    std::uint64_t layer_count = 0;
    std::optional<std::uint64_t> oracle_mismatches;

    std::uint64_t layer1_nodes() const {
        return nodes_per_layer.empty() ? 0 : nodes_per_layer.front();
    }
};

/// Fills the per-layer node/edge counts and layer count from `map`.
void record_structure(const MultiLayerMap& map, FrameMetrics& metrics);

}  // namespace topomap
