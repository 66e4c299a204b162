#include "topomap/learner.hpp"

namespace topomap {

const char* to_string(StepKind kind) {
    switch (kind) {
        case StepKind::NewNode:
            return "NewNode";
        case StepKind::Updated:
            return "Updated";
        case StepKind::UpdatedWithEdge:
            return "UpdatedWithEdge";
    }
    return "?";
}

void record_structure(const MultiLayerMap& map, FrameMetrics& metrics) {
    metrics.layer_count = map.layer_count();
    metrics.nodes_per_layer.clear();
    metrics.edges_per_layer.clear();
    for (std::size_t ell = 1; ell <= map.layer_count(); ++ell) {
        metrics.nodes_per_layer.push_back(map.layer(ell).node_count());
        metrics.edges_per_layer.push_back(map.layer(ell).edge_count());
    }
}

}  // namespace topomap
