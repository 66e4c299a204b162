#include "topomap/flat_atc.hpp"

#include <chrono>
#include <stdexcept>

#include "topomap/streams.hpp"

namespace topomap::flat {

WinnerPair exhaustive_winners(const Vec3& p, const LayerGraph& layer,
                              std::uint64_t& distance_evals) {
    WinnerPair w;
    // Ids are visited in increasing order, so strict comparisons keep the
    // smaller id on ties.
    for (const auto& n : layer.nodes()) {
        const double d = (p - n.position).norm();
        if (d < w.d1) {
            w.s2 = w.s1;
            w.d2 = w.d1;
            w.s1 = n.id;
            w.d1 = d;
        } else if (d < w.d2) {
            w.s2 = n.id;
            w.d2 = d;
        }
    }
    distance_evals += layer.node_count();
    return w;
}

WinnerPair exhaustive_winners(const Vec3& p, const LayerGraph& layer) {
    std::uint64_t unused = 0;
    return exhaustive_winners(p, layer, unused);
}

StepOutcome update_by_winners(const InputPoint& p, LayerGraph& layer, const WinnerPair& winners,
                              const LearnerConfig& config) {
    if (winners.s1 && !layer.contains(*winners.s1)) {
        throw ContractViolation("update_by_winners: stale first winner");
    }
    if (winners.s2 && !layer.contains(*winners.s2)) {
        throw ContractViolation("update_by_winners: stale second winner");
    }
    const double rho = layer.vigilance();
    StepOutcome out;

    if (!(winners.d1 <= rho)) {
        out.kind = StepKind::NewNode;
        out.node = layer.add_node(p.position);
        return out;
    }
    if (!winners.s1) {
        throw ContractViolation("update_by_winners: finite d1 without a first winner");
    }

    const NodeId s1 = *winners.s1;
    out.kind = StepKind::Updated;
    out.node = s1;

    auto& winner = layer.node(s1);
    ++winner.win_count;
    if (config.updates_enabled) {
        const double rate = 1.0 / (10.0 * static_cast<double>(winner.win_count));
        winner.position += rate * (p.position - winner.position);
    }

    if (winners.s2 && winners.d2 <= rho) {
        layer.connect(s1, *winners.s2);
        out.kind = StepKind::UpdatedWithEdge;
    }

    if (config.updates_enabled) {
        for (const auto& nb : layer.neighbors(s1)) {
            auto& k = layer.node(nb.id);
            // A neighbor that never won would divide by zero; treat it as m = 1.
            const double m = k.win_count == 0 ? 1.0 : static_cast<double>(k.win_count);
            k.position += (1.0 / (100.0 * m)) * (p.position - k.position);
        }
    }
    layer.age_incident_edges(s1);

    if (config.edge_sweep == EdgeSweep::Global) {
        layer.remove_aged_edges_global();
    } else {
        layer.remove_aged_edges(s1);
    }
    return out;
}

void update_attribute_maps(LayerGraph& layer1, NodeId s1, const InputPoint& p,
                           double normal_threshold) {
    if (layer1.layer_index() != 1) {
        throw ContractViolation("attribute maps exist only on layer 1");
    }
    auto& node = layer1.node(s1);

    if (p.normal) {
        if (node.normal) {
            const double rate =
                node.win_count == 0 ? 1.0 : 1.0 / (10.0 * static_cast<double>(node.win_count));
            Vec3 blended = *node.normal + rate * (*p.normal - *node.normal);
            const double len = blended.norm();
            node.normal = len > 1e-12 ? Vec3(blended / len) : p.normal->normalized();
        } else {
            node.normal = p.normal->normalized();
        }
    }
    if (p.traversability) {
        node.traversability = p.traversability;
    }

    for (const auto& nb : layer1.neighbors(s1)) {
        const auto& other = layer1.node(nb.id);
        auto& e = layer1.edge_at(nb.slot);
        e.in_nor = node.normal && other.normal && node.normal->dot(*other.normal) >= normal_threshold;
        e.in_tra = node.traversability && other.traversability &&
                   *node.traversability == *other.traversability;
    }
}

PointResult train_point(MultiLayerMap& map, const InputPoint& p) {
    auto& layer = map.layer(1);
    PointResult r;
    std::uint64_t evals = 0;
    r.winners = exhaustive_winners(p.position, layer, evals);
    r.outcome = update_by_winners(p, layer, r.winners, map.config());
    r.outcome.distance_evals = evals;
    update_attribute_maps(layer, r.outcome.node, p, map.config().normal_edge_threshold);
    return r;
}

FrameMetrics train_samples(MultiLayerMap& map, std::span<const InputPoint> samples) {
    if (map.layer_count() != 1) {
        throw ContractViolation("flat learner requires a single-layer map");
    }
    FrameMetrics metrics;
    const auto start = std::chrono::steady_clock::now();
    for (const auto& p : samples) {
        metrics.distance_evals += train_point(map, p).outcome.distance_evals;
    }
    const auto stop = std::chrono::steady_clock::now();
    metrics.wall_time_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    record_structure(map, metrics);
    return metrics;
}

FrameMetrics train_frame(MultiLayerMap& map, std::span<const InputPoint> frame,
                         std::mt19937_64& rng) {
    const auto samples =
        streams::sample_training_points(frame, static_cast<std::size_t>(map.config().lambda), rng);
    return train_samples(map, samples);
}

}  // namespace topomap::flat
