#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "topomap/flat_atc.hpp"
#include "topomap/streams.hpp"

using namespace topomap;

namespace {

InputPoint at(double x, double y = 0.0, double z = 0.0) {
    InputPoint p;
    p.position = Vec3(x, y, z);
    return p;
}

std::vector<InputPoint> square_frame(std::size_t n, double size, std::uint64_t seed) {
    streams::SyntheticStreamConfig cfg;
    cfg.square_size = size;
    cfg.points_per_frame = n;
    cfg.seed = seed;
    return streams::synthetic_frame(cfg, 0).points;
}

}  // namespace

TEST_CASE("exhaustive_winners examples") {
    LayerGraph layer(1, 0.5);
    std::uint64_t evals = 0;

    auto w = flat::exhaustive_winners(Vec3(1, 0, 0), layer, evals);
    CHECK_FALSE(w.s1);
    CHECK_FALSE(w.s2);
    CHECK(std::isinf(w.d1));
    CHECK(std::isinf(w.d2));
    CHECK(evals == 0);

    const NodeId origin = layer.add_node(Vec3::Zero());
    w = flat::exhaustive_winners(Vec3(1, 0, 0), layer, evals);
    CHECK(w.s1 == origin);
    CHECK(w.d1 == 1.0);
    CHECK_FALSE(w.s2);
    CHECK(std::isinf(w.d2));

    const NodeId three = layer.add_node(Vec3(3, 0, 0));
    w = flat::exhaustive_winners(Vec3(1, 0, 0), layer, evals);
    CHECK(w.s1 == origin);
    CHECK(w.d1 == 1.0);
    CHECK(w.s2 == three);
    CHECK(w.d2 == 2.0);
    CHECK(evals == 3);
}

TEST_CASE("exhaustive_winners agrees with a brute-force double loop") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> count(0, 15);
    // Integer grid coordinates make exact distance ties common.
    std::uniform_int_distribution<int> coord(-3, 3);
    for (int trial = 0; trial < 10000; ++trial) {
        LayerGraph layer(1, 0.5);
        const int n = count(rng);
        for (int i = 0; i < n; ++i) {
            layer.add_node(Vec3(coord(rng), coord(rng), coord(rng)));
        }
        const Vec3 p(coord(rng), coord(rng), coord(rng));

        // Reference: for each candidate, count how many nodes beat it under
        // (distance, id) order; rank 0 is s1, rank 1 is s2.
        std::optional<NodeId> s1, s2;
        for (NodeId i = 1; i <= static_cast<NodeId>(n); ++i) {
            int better = 0;
            const double di = (p - layer.node(i).position).norm();
            for (NodeId j = 1; j <= static_cast<NodeId>(n); ++j) {
                const double dj = (p - layer.node(j).position).norm();
                if (dj < di || (dj == di && j < i)) {
                    ++better;
                }
            }
            if (better == 0) {
                s1 = i;
            } else if (better == 1) {
                s2 = i;
            }
        }
        const auto w = flat::exhaustive_winners(p, layer);
        REQUIRE(w.s1 == s1);
        REQUIRE(w.s2 == s2);
        if (s1) {
            CHECK(w.d1 == (p - layer.node(*s1).position).norm());
        }
        if (s2) {
            CHECK(w.d2 == (p - layer.node(*s2).position).norm());
        }
        CHECK(w.d1 <= w.d2);
    }
}

TEST_CASE("update_by_winners case analysis") {
    LearnerConfig cfg;

    SUBCASE("new node beyond vigilance") {
        LayerGraph layer(1, 0.5);
        layer.add_node(Vec3::Zero());
        const auto w = flat::exhaustive_winners(Vec3(0.7, 0, 0), layer);
        REQUIRE(w.d1 == doctest::Approx(0.7));
        const auto out = flat::update_by_winners(at(0.7), layer, w, cfg);
        CHECK(out.kind == StepKind::NewNode);
        CHECK(layer.node(out.node).position == Vec3(0.7, 0, 0));
        CHECK(layer.node(1).win_count == 0);
    }

    SUBCASE("winner moves by 1/(10 m)") {
        LayerGraph layer(1, 2.0);
        layer.add_node(Vec3::Zero());
        const auto w = flat::exhaustive_winners(Vec3(1, 0, 0), layer);
        const auto out = flat::update_by_winners(at(1.0), layer, w, cfg);
        CHECK(out.kind == StepKind::Updated);
        CHECK(layer.node(1).win_count == 1);
        CHECK((layer.node(1).position - Vec3(0.1, 0, 0)).norm() <= 1e-12);
    }

    SUBCASE("neighbor moves by 1/(100 m_k) and keeps its count") {
        LayerGraph layer(1, 0.5);
        const NodeId s1 = layer.add_node(Vec3(1, 0, 0));
        const NodeId k = layer.add_node(Vec3::Zero());
        layer.node(k).win_count = 2;
        layer.connect(s1, k);
        WinnerPair w;
        w.s1 = s1;
        w.d1 = 0.0;
        w.s2 = k;
        w.d2 = 1.0;  // beyond vigilance: no new edge, plain update
        const auto out = flat::update_by_winners(at(1.0), layer, w, cfg);
        CHECK(out.kind == StepKind::Updated);
        CHECK((layer.node(k).position - Vec3(0.005, 0, 0)).norm() <= 1e-12);
        CHECK(layer.node(k).win_count == 2);
        CHECK(*layer.edge_age(s1, k) == 1);
    }

    SUBCASE("neighbor that never won uses rate 1/100") {
        LayerGraph layer(1, 0.5);
        const NodeId s1 = layer.add_node(Vec3(1, 0, 0));
        const NodeId k = layer.add_node(Vec3::Zero());
        layer.connect(s1, k);
        const auto w = flat::exhaustive_winners(Vec3(1, 0, 0), layer);
        flat::update_by_winners(at(1.0), layer, w, cfg);
        CHECK((layer.node(k).position - Vec3(0.01, 0, 0)).norm() <= 1e-12);
    }

    SUBCASE("second winner inside vigilance adds an edge aged within the step") {
        LayerGraph layer(1, 0.5);
        const NodeId a = layer.add_node(Vec3(0, 0, 0));
        const NodeId b = layer.add_node(Vec3(0.6, 0, 0));
        const auto w = flat::exhaustive_winners(Vec3(0.25, 0, 0), layer);
        const auto out = flat::update_by_winners(at(0.25), layer, w, cfg);
        CHECK(out.kind == StepKind::UpdatedWithEdge);
        CHECK(out.node == a);
        REQUIRE(layer.edge_age(a, b));
        CHECK(*layer.edge_age(a, b) == 1);
    }

    SUBCASE("insertion-only mode keeps positions but counts wins and edges") {
        LearnerConfig frozen;
        frozen.updates_enabled = false;
        LayerGraph layer(1, 0.5);
        const NodeId a = layer.add_node(Vec3(0, 0, 0));
        const NodeId b = layer.add_node(Vec3(0.6, 0, 0));
        const auto w = flat::exhaustive_winners(Vec3(0.25, 0, 0), layer);
        const auto out = flat::update_by_winners(at(0.25), layer, w, frozen);
        CHECK(out.kind == StepKind::UpdatedWithEdge);
        CHECK(layer.node(a).position == Vec3::Zero());
        CHECK(layer.node(b).position == Vec3(0.6, 0, 0));
        CHECK(layer.node(a).win_count == 1);
        CHECK(layer.edge_age(a, b) == 1u);
    }

    SUBCASE("stale winner ids are rejected") {
        LayerGraph layer(1, 0.5);
        layer.add_node(Vec3::Zero());
        WinnerPair w;
        w.s1 = 5;
        w.d1 = 0.1;
        CHECK_THROWS_AS(flat::update_by_winners(at(0.0), layer, w, cfg), ContractViolation);
    }
}

TEST_CASE("winner update contracts the distance by exactly 1 - 1/(10 m)") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    LearnerConfig cfg;
    for (int trial = 0; trial < 500; ++trial) {
        LayerGraph layer(1, 10.0);
        const NodeId s = layer.add_node(Vec3(u(rng), u(rng), u(rng)));
        layer.node(s).win_count = static_cast<std::uint64_t>(trial % 7);
        const Vec3 p(u(rng), u(rng), u(rng));
        const double before = (layer.node(s).position - p).norm();
        const auto w = flat::exhaustive_winners(p, layer);
        InputPoint ip;
        ip.position = p;
        flat::update_by_winners(ip, layer, w, cfg);
        const double m = static_cast<double>(layer.node(s).win_count);
        const double after = (layer.node(s).position - p).norm();
        CHECK(after == doctest::Approx((1.0 - 1.0 / (10.0 * m)) * before).epsilon(1e-12));
        CHECK(after <= before);
    }
}

TEST_CASE("update_attribute_maps") {
    SUBCASE("no attributes is a no-op") {
        LayerGraph layer(1, 0.5);
        const NodeId a = layer.add_node(Vec3::Zero());
        const NodeId b = layer.add_node(Vec3::UnitX());
        layer.connect(a, b);
        flat::update_attribute_maps(layer, a, at(0.0), 0.9);
        CHECK_FALSE(layer.node(a).normal);
        CHECK_FALSE(layer.node(a).traversability);
        const auto& e = layer.edge_at(*layer.find_edge(a, b));
        CHECK_FALSE(e.in_nor);
        CHECK_FALSE(e.in_tra);
    }
    SUBCASE("parallel normals form a normal edge") {
        LayerGraph layer(1, 0.5);
        const NodeId a = layer.add_node(Vec3::Zero());
        const NodeId b = layer.add_node(Vec3::UnitX());
        layer.node(b).normal = Vec3::UnitZ();
        layer.connect(a, b);
        InputPoint p = at(0.0);
        p.normal = Vec3::UnitZ();
        flat::update_attribute_maps(layer, a, p, 0.9);
        CHECK(layer.edge_at(*layer.find_edge(a, b)).in_nor);
    }
    SUBCASE("orthogonal normals do not") {
        LayerGraph layer(1, 0.5);
        const NodeId a = layer.add_node(Vec3::Zero());
        const NodeId b = layer.add_node(Vec3::UnitX());
        layer.node(b).normal = Vec3::UnitY();
        layer.connect(a, b);
        InputPoint p = at(0.0);
        p.normal = Vec3::UnitX();
        flat::update_attribute_maps(layer, a, p, 0.9);
        CHECK_FALSE(layer.edge_at(*layer.find_edge(a, b)).in_nor);
    }
    SUBCASE("normals blend at the winner rate and stay unit") {
        LayerGraph layer(1, 0.5);
        const NodeId a = layer.add_node(Vec3::Zero());
        layer.node(a).normal = Vec3::UnitZ();
        layer.node(a).win_count = 1;
        InputPoint p = at(0.0);
        p.normal = Vec3::UnitX();
        p.traversability = true;
        flat::update_attribute_maps(layer, a, p, 0.9);
        const Vec3 expected = Vec3(0.1, 0, 0.9).normalized();
        CHECK((*layer.node(a).normal - expected).norm() <= 1e-12);
        CHECK(layer.node(a).traversability == true);
    }
    SUBCASE("traversability edges need equal labels on both ends") {
        LayerGraph layer(1, 0.5);
        const NodeId a = layer.add_node(Vec3::Zero());
        const NodeId b = layer.add_node(Vec3::UnitX());
        const NodeId c = layer.add_node(Vec3::UnitY());
        layer.node(b).traversability = true;
        layer.node(c).traversability = false;
        layer.connect(a, b);
        layer.connect(a, c);
        InputPoint p = at(0.0);
        p.traversability = true;
        flat::update_attribute_maps(layer, a, p, 0.9);
        CHECK(layer.edge_at(*layer.find_edge(a, b)).in_tra);
        CHECK_FALSE(layer.edge_at(*layer.find_edge(a, c)).in_tra);
    }
    SUBCASE("only layer 1 carries attributes") {
        LayerGraph upper(2, 2.0);
        upper.add_node(Vec3::Zero());
        CHECK_THROWS_AS(flat::update_attribute_maps(upper, 1, at(0.0), 0.9), ContractViolation);
    }
}

TEST_CASE("flat train_frame") {
    SUBCASE("one iteration on an empty map inserts one node") {
        LearnerConfig cfg;
        cfg.lambda = 1;
        MultiLayerMap map(cfg);
        std::mt19937_64 rng(1);
        const auto frame = square_frame(50, 20.0, 1);
        flat::train_frame(map, frame, rng);
        CHECK(map.layer(1).node_count() == 1);
    }
    SUBCASE("distance evaluations sum the node count seen by each iteration") {
        LearnerConfig cfg;
        MultiLayerMap map(cfg);
        const auto frame = square_frame(4000, 20.0, 5);
        std::mt19937_64 rng(11);
        const auto samples = streams::sample_training_points(frame, 4000, rng);
        std::uint64_t expected = 0;
        MultiLayerMap replay(cfg);
        for (const auto& p : samples) {
            expected += replay.layer(1).node_count();
            flat::train_point(replay, p);
        }
        const auto metrics = flat::train_samples(map, samples);
        CHECK(metrics.distance_evals == expected);
        CHECK(metrics.nodes_per_layer == std::vector<std::uint64_t>{map.layer(1).node_count()});
    }
    SUBCASE("same seed, same frame, same map") {
        LearnerConfig cfg;
        const auto frame = square_frame(4000, 20.0, 5);
        MultiLayerMap a(cfg), b(cfg);
        std::mt19937_64 ra(42), rb(42);
        const auto ma = flat::train_frame(a, frame, ra);
        const auto mb = flat::train_frame(b, frame, rb);
        CHECK(ma.distance_evals == mb.distance_evals);
        REQUIRE(a.layer(1).node_count() == b.layer(1).node_count());
        for (NodeId i = 1; i <= a.layer(1).node_count(); ++i) {
            CHECK(a.layer(1).node(i).position == b.layer(1).node(i).position);
        }
        const auto ea = a.layer(1).edges();
        const auto eb = b.layer(1).edges();
        REQUIRE(ea.size() == eb.size());
        for (std::size_t k = 0; k < ea.size(); ++k) {
            CHECK(ea[k].a == eb[k].a);
            CHECK(ea[k].b == eb[k].b);
            CHECK(ea[k].age == eb[k].age);
        }
    }
    SUBCASE("empty frame is an error") {
        MultiLayerMap map;
        std::mt19937_64 rng(1);
        std::vector<InputPoint> empty;
        CHECK_THROWS(flat::train_frame(map, empty, rng));
    }
}

TEST_CASE("decision trichotomy and insertion-only separation") {
    for (bool updates : {true, false}) {
        LearnerConfig cfg;
        cfg.updates_enabled = updates;
        MultiLayerMap map(cfg);
        const auto frame = square_frame(3000, 15.0, 8);
        std::mt19937_64 rng(8);
        for (const auto& p : streams::sample_training_points(frame, 6000, rng)) {
            const auto r = flat::train_point(map, p);
            CHECK((r.outcome.kind == StepKind::NewNode) == (r.winners.d1 > cfg.base_vigilance));
            if (r.outcome.kind == StepKind::UpdatedWithEdge) {
                CHECK(r.winners.d2 <= cfg.base_vigilance);
            }
        }
        CHECK(audit(map, false).empty());
        if (!updates) {
            const auto& layer = map.layer(1);
            double closest = kInfinity;
            for (NodeId i = 1; i <= layer.node_count(); ++i) {
                for (NodeId j = i + 1; j <= layer.node_count(); ++j) {
                    closest = std::min(closest,
                                       (layer.node(i).position - layer.node(j).position).norm());
                }
            }
            CHECK(closest > cfg.base_vigilance);
        }
    }
}
