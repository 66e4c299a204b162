/**
 * @file flat_atc.hpp
 * @brief Single-layer adaptive-resonance topological learner.
 *
 * Every input is matched against all nodes of the layer. The winner-update
 * step (node insertion, win-count-decayed moves, edge creation, aging and
 * quartile-threshold pruning) is shared with the hierarchical learner, which
 * applies it to each layer it ascends through.
 */

#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "topomap/learner.hpp"

namespace topomap::flat {

/// Nearest and second-nearest node over the whole layer. Ties go to the
/// smaller id. Adds the node count to `distance_evals`.
WinnerPair exhaustive_winners(const Vec3& p, const LayerGraph& layer,
                              std::uint64_t& distance_evals);
WinnerPair exhaustive_winners(const Vec3& p, const LayerGraph& layer);

/// One learning step against `layer` given its winners:
///   d1 >  vigilance: insert a node at p                       -> NewNode
///   d1 <= vigilance: count the win, move s1 and its neighbors
///                    toward p, age s1's edges, prune old ones   -> Updated
///   d2 <= vigilance as well: (re)connect s1-s2 first          -> UpdatedWithEdge
/// With config.updates_enabled == false the position moves are skipped.
StepOutcome update_by_winners(const InputPoint& p, LayerGraph& layer, const WinnerPair& winners,
                              const LearnerConfig& config);

/// Maintains the layer-1 normal and traversability attributes of `s1` and the
/// attribute flags of its edges.
void update_attribute_maps(LayerGraph& layer1, NodeId s1, const InputPoint& p,
                           double normal_threshold);

/// Result of one input on a flat map.
struct PointResult {
    WinnerPair winners;
    StepOutcome outcome;
};

/// Search + update + attribute maintenance for one input.
PointResult train_point(MultiLayerMap& map, const InputPoint& p);

/// Trains on config.lambda uniform draws (with replacement) from `frame`.
/// The map must have exactly one layer.
FrameMetrics train_frame(MultiLayerMap& map, std::span<const InputPoint> frame,
                         std::mt19937_64& rng);

/// Trains on an explicit sample sequence. The timed span covers only the
/// learning loop.
FrameMetrics train_samples(MultiLayerMap& map, std::span<const InputPoint> samples);

}  // namespace topomap::flat
