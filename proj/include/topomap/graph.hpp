/**
 * @file graph.hpp
 * @brief Multi-layer topological graph: nodes, aged edges, parent/child links.
 *
 * Every layer stores its nodes densely (ids are 1-based and never reused; nodes
 * are never deleted) and its position edges in a slot pool with a per-node
 * neighbor list pointing into it. Edge ages are mirrored into an order-statistic
 * index (AgeStats) so the quartile-based deletion threshold costs O(log max_age)
 * per query instead of a sort over all edges.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "topomap/age_stats.hpp"

namespace topomap {

using Vec3 = Eigen::Vector3d;

/// 1-based node identifier, unique within one layer.
using NodeId = std::uint32_t;

/// Raised when an operation's precondition is broken by the caller.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// How over-age edges are searched for after an update step.
enum class EdgeSweep {
    Incident,  // only edges incident to the first winner (default)
    Global,    // every edge of the layer; used by oracle tests
};

struct LearnerConfig {
    int lambda = 4000;                  // training iterations per frame
    double base_vigilance = 0.5;        // meters, layer-1 vigilance radius
    double alpha = 4.0;                 // inter-layer vigilance ratio
    double normal_edge_threshold = 0.9; // min normal dot product for a normal edge
    bool updates_enabled = true;        // false: insertion-only mode
    std::size_t min_edges_for_aging = 4;
    std::uint64_t rng_seed = 1;
    EdgeSweep edge_sweep = EdgeSweep::Incident;

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

/// alpha^(layer-1) * base, the vigilance schedule shared by every layer.
double layer_vigilance(int layer_index, double base_vigilance, double alpha);

struct NodeRecord {
    NodeId id = 0;
    Vec3 position = Vec3::Zero();
    std::optional<Vec3> normal;
    std::optional<bool> traversability;
    std::uint64_t win_count = 0;
    std::optional<NodeId> parent;     // node in the layer above
    std::vector<NodeId> children;     // nodes in the layer below
};

struct EdgeRecord {
    NodeId a = 0;  // a < b for live edges; a == 0 marks a free slot
    NodeId b = 0;
    std::uint32_t age = 0;
    bool in_nor = false;
    bool in_tra = false;
};

struct Neighbor {
    NodeId id;
    std::uint32_t slot;  // index into the layer's edge pool
};

class LayerGraph {
public:
    LayerGraph(int layer_index, double vigilance, std::size_t min_edges_for_aging = 4);

    int layer_index() const { return layer_index_; }
    double vigilance() const { return vigilance_; }
    std::size_t min_edges_for_aging() const { return min_edges_for_aging_; }

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return age_stats_.size(); }
    bool contains(NodeId id) const { return id >= 1 && id <= nodes_.size(); }

    const NodeRecord& node(NodeId id) const;
    NodeRecord& node(NodeId id);
    std::span<const NodeRecord> nodes() const { return nodes_; }

    std::span<const Neighbor> neighbors(NodeId id) const;
    const EdgeRecord& edge_at(std::uint32_t slot) const { return edges_[slot]; }
    EdgeRecord& edge_at(std::uint32_t slot) { return edges_[slot]; }

    /// Slot of edge {i, j}, if present.
    std::optional<std::uint32_t> find_edge(NodeId i, NodeId j) const;
    std::optional<std::uint32_t> edge_age(NodeId i, NodeId j) const;

    /// Live edges sorted by (a, b).
    std::vector<EdgeRecord> edges() const;

    const AgeStats& age_stats() const { return age_stats_; }

    /// Appends a node at `position`; returns its fresh id.
    NodeId add_node(const Vec3& position);

    /// Creates edge {i, j} with age 0, or resets an existing edge's age to 0.
    void connect(NodeId i, NodeId j);

    /// Creates edge {i, j} with the given age and flags. Used when rebuilding
    /// a layer from a file; fails if the edge already exists.
    void insert_edge(const EdgeRecord& edge);

    void age_incident_edges(NodeId s1);

    /// Q3 + IQR of the current edge ages; nullopt below min_edges_for_aging.
    std::optional<double> g_thr() const;

    /// Deletion threshold blending the mean deleted age with g_thr by the
    /// share of deleted edges; nullopt when g_thr is not computable.
    std::optional<double> g_max() const;

    /// Removes edges incident to `around` whose age exceeds g_max().
    std::size_t remove_aged_edges(NodeId around);

    /// Same as remove_aged_edges but over every edge of the layer.
    std::size_t remove_aged_edges_global();

    /// Removes edges incident to `around` older than `threshold`, recording
    /// each removed age as a deletion.
    std::size_t remove_edges_older_than(NodeId around, double threshold);

    /// Restores the deletion statistics (file import).
    void restore_deletions(std::uint64_t count, std::uint64_t age_sum) {
        age_stats_.restore_deletions(count, age_sum);
    }

private:
    void remove_edge(std::uint32_t slot);
    std::uint32_t allocate_slot(const EdgeRecord& edge);
    void check_node(NodeId id, const char* what) const;

    int layer_index_;
    double vigilance_;
    std::size_t min_edges_for_aging_;
    std::vector<NodeRecord> nodes_;
    std::vector<std::vector<Neighbor>> adjacency_;
    std::vector<EdgeRecord> edges_;
    std::vector<std::uint32_t> free_slots_;
    AgeStats age_stats_;
};

/// Links `child` (in `lower`) under `parent` (in `upper`, the layer directly
/// above). Throws ContractViolation if the child already has a parent.
void set_parent(LayerGraph& lower, NodeId child, LayerGraph& upper, NodeId parent);

/// Ordered stack of layers 1..L. Always holds at least one layer.
class MultiLayerMap {
public:
    explicit MultiLayerMap(LearnerConfig config = {});

    const LearnerConfig& config() const { return config_; }
    LearnerConfig& mutable_config() { return config_; }
    double base_vigilance() const { return config_.base_vigilance; }
    double alpha() const { return config_.alpha; }

    std::size_t layer_count() const { return layers_.size(); }

    /// 1-based layer access.
    LayerGraph& layer(std::size_t ell);
    const LayerGraph& layer(std::size_t ell) const;
    LayerGraph& top() { return layers_.back(); }
    const LayerGraph& top() const { return layers_.back(); }

    /// Appends layer L+1 with the scheduled vigilance.
    LayerGraph& push_layer();

    std::size_t total_nodes() const;

private:
    LearnerConfig config_;
    std::vector<LayerGraph> layers_;
};

/// Full structural audit. Returns a description of every violated invariant
/// (empty when the map is consistent):
///   - adjacency symmetry, no self loops, endpoint validity
///   - age histogram equals a recount over the edge store
///   - vigilance schedule per layer
///   - children of layer l partition layer l-1 and match parent links
///   - top layer is a singleton (when the map is non-empty)
///   - stored normals have unit length
/// Pass hierarchical=false for single-layer flat maps, which skips the
/// singleton-root check.
std::vector<std::string> audit(const MultiLayerMap& map, bool hierarchical = true);

}  // namespace topomap
