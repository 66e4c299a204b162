/**
 * @file hierarchy.hpp
 * @brief Multi-layer learner with coarse-to-fine winner search.
 *
 * Layer l uses vigilance alpha^(l-1) * rho. Each input is handled in two
 * phases:
 *
 *  1. Search, top-down. The top layer holds a single root and is taken whole.
 *     Below it, the candidates of layer l are the children of every candidate
 *     of layer l+1 that lie within the cumulative radius
 *     rho_search(l) = sum_{i<=l} vigilance(i). A descendant can never sit
 *     farther than that from its layer-l ancestor while nodes stay put, so the
 *     filter never drops a node within vigilance of the input.
 *
 *  2. Learning, bottom-up. Layer 1 takes its two closest candidates and runs
 *     the shared update step. A new node is passed upward as the next input
 *     (its position equals the input) and is linked as the child of whatever
 *     absorbs or creates it there; an update stops the ascent. When the top
 *     layer gains its second node a new layer is pushed whose root copies the
 *     node that was already there.
 */

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "topomap/learner.hpp"

namespace topomap::hier {

struct Candidate {
    NodeId id;
    double distance;
};

/// Per-layer candidates, each sorted ascending by (distance, id).
struct WinnerSets {
    std::vector<std::vector<Candidate>> per_layer;  // index 0 is layer 1
    std::vector<double> search_radii;               // rho_search per layer
    std::uint64_t distance_evals = 0;

    std::size_t layer_count() const { return per_layer.size(); }
    const std::vector<Candidate>& layer(std::size_t ell) const { return per_layer[ell - 1]; }
};

double vigilance(int ell, const LearnerConfig& config);

/// Cumulative vigilance up to and including layer `ell`.
double search_threshold(int ell, const LearnerConfig& config);

/// Cumulative radii for layers 1..layers.
std::vector<double> search_thresholds(int layers, const LearnerConfig& config);

WinnerSets hierarchical_nns(const Vec3& p, const MultiLayerMap& map);

/// Same, reusing `out`'s storage.
void hierarchical_nns(const Vec3& p, const MultiLayerMap& map, WinnerSets& out);

/// Pushes layer L+1 whose root copies the pre-existing node of layer L and
/// adopts it as child. Requires |V(L)| == 2; the other (just-created) node of
/// layer L stays parentless for the caller to resolve.
void add_layer(MultiLayerMap& map);

struct PointResult {
    std::vector<StepOutcome> per_layer;  // outcome at layers 1, 2, ... reached
    WinnerPair layer1_winners;
    std::uint64_t distance_evals = 0;
};

/// Processes one input through both phases.
PointResult train_point(MultiLayerMap& map, const InputPoint& p);

/// Trains on config.lambda uniform draws (with replacement) from `frame`.
FrameMetrics train_frame(MultiLayerMap& map, std::span<const InputPoint> frame,
                         std::mt19937_64& rng);

/// Trains on an explicit sample sequence. The timed span covers only the
/// learning loop.
FrameMetrics train_samples(MultiLayerMap& map, std::span<const InputPoint> samples);

/// Holds reusable search buffers for repeated train_point calls.
class HierarchicalLearner {
public:
    explicit HierarchicalLearner(MultiLayerMap& map) : map_(&map) {}

    PointResult train_point(const InputPoint& p);

    /// Last search result (valid until the next call).
    const WinnerSets& last_winners() const { return winners_; }

private:
    MultiLayerMap* map_;
    WinnerSets winners_;
};

}  // namespace topomap::hier
