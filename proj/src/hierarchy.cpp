#include "topomap/hierarchy.hpp"

#include <algorithm>
#include <chrono>

#include "topomap/flat_atc.hpp"
#include "topomap/streams.hpp"

namespace topomap::hier {

double vigilance(int ell, const LearnerConfig& config) {
    if (ell < 1) {
        throw std::invalid_argument("layer index must be >= 1");
    }
    return layer_vigilance(ell, config.base_vigilance, config.alpha);
}

double search_threshold(int ell, const LearnerConfig& config) {
    if (ell < 1) {
        throw std::invalid_argument("layer index must be >= 1");
    }
    double sum = 0.0;
    for (int i = 1; i <= ell; ++i) {
        sum += vigilance(i, config);
    }
    return sum;
}

std::vector<double> search_thresholds(int layers, const LearnerConfig& config) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::max(layers, 0)));
    double sum = 0.0;
    for (int i = 1; i <= layers; ++i) {
        sum += vigilance(i, config);
        out.push_back(sum);
    }
    return out;
}

namespace {

bool closer(const Candidate& a, const Candidate& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
}

}  // namespace

void hierarchical_nns(const Vec3& p, const MultiLayerMap& map, WinnerSets& out) {
    const std::size_t L = map.layer_count();
    out.per_layer.resize(L);
    for (auto& w : out.per_layer) {
        w.clear();
    }
    out.distance_evals = 0;

    out.search_radii.resize(L);
    double sum = 0.0;
    for (std::size_t ell = 1; ell <= L; ++ell) {
        sum += vigilance(static_cast<int>(ell), map.config());
        out.search_radii[ell - 1] = sum;
    }

    auto& top = out.per_layer[L - 1];
    for (const auto& n : map.top().nodes()) {
        top.push_back({n.id, (p - n.position).norm()});
    }
    out.distance_evals += top.size();
    std::sort(top.begin(), top.end(), closer);

    for (std::size_t ell = L - 1; ell >= 1; --ell) {
        const auto& upper = map.layer(ell + 1);
        const auto& lower = map.layer(ell);
        const double radius = out.search_radii[ell - 1];
        auto& cands = out.per_layer[ell - 1];
        for (const auto& w : out.per_layer[ell]) {
            for (NodeId c : upper.node(w.id).children) {
                const double d = (p - lower.node(c).position).norm();
                ++out.distance_evals;
                if (d <= radius) {
                    cands.push_back({c, d});
                }
            }
        }
        std::sort(cands.begin(), cands.end(), closer);
    }
}

WinnerSets hierarchical_nns(const Vec3& p, const MultiLayerMap& map) {
    WinnerSets out;
    hierarchical_nns(p, map, out);
    return out;
}

void add_layer(MultiLayerMap& map) {
    const std::size_t L = map.layer_count();
    if (map.top().node_count() != 2) {
        throw ContractViolation("add_layer: top layer must hold exactly two nodes");
    }
    // Node 1 predates the node that triggered the addition.
    const Vec3 position = map.top().node(1).position;
    map.push_layer();
    const NodeId root = map.top().add_node(position);
    set_parent(map.layer(L), 1, map.layer(L + 1), root);
}

PointResult HierarchicalLearner::train_point(const InputPoint& p) {
    MultiLayerMap& map = *map_;
    hierarchical_nns(p.position, map, winners_);

    PointResult result;
    result.distance_evals = winners_.distance_evals;
    const std::size_t searched = winners_.layer_count();

    NodeId layer1_node = 0;
    NodeId created_below = 0;
    for (std::size_t ell = 1; ell <= map.layer_count(); ++ell) {
        WinnerPair w;
        if (ell <= searched) {
            const auto& cands = winners_.layer(ell);
            if (!cands.empty()) {
                w.s1 = cands[0].id;
                w.d1 = cands[0].distance;
            }
            if (cands.size() > 1) {
                w.s2 = cands[1].id;
                w.d2 = cands[1].distance;
            }
        } else {
            // Layer pushed during this input; it holds at most two nodes.
            w = flat::exhaustive_winners(p.position, map.layer(ell), result.distance_evals);
        }
        if (ell == 1) {
            result.layer1_winners = w;
        }

        auto& layer = map.layer(ell);
        const StepOutcome out = flat::update_by_winners(p, layer, w, map.config());
        result.per_layer.push_back(out);
        if (ell == 1) {
            layer1_node = out.node;
        } else {
            set_parent(map.layer(ell - 1), created_below, layer, out.node);
        }

        if (out.kind != StepKind::NewNode) {
            break;
        }
        created_below = out.node;
        if (ell == map.layer_count() && layer.node_count() == 2) {
            add_layer(map);
        }
    }

    flat::update_attribute_maps(map.layer(1), layer1_node, p, map.config().normal_edge_threshold);
    return result;
}

PointResult train_point(MultiLayerMap& map, const InputPoint& p) {
    HierarchicalLearner learner(map);
    return learner.train_point(p);
}

FrameMetrics train_samples(MultiLayerMap& map, std::span<const InputPoint> samples) {
    HierarchicalLearner learner(map);
    FrameMetrics metrics;
    const auto start = std::chrono::steady_clock::now();
    for (const auto& p : samples) {
        metrics.distance_evals += learner.train_point(p).distance_evals;
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

}  // namespace topomap::hier
