#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "topomap/bench.hpp"

namespace topomap::bench {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kFormat = "topomap-layered-map";
constexpr int kVersion = 1;

json vec_json(const Vec3& v) {
    return json::array({v.x(), v.y(), v.z()});
}

Vec3 json_vec(const json& j) {
    if (!j.is_array() || j.size() != 3) {
        throw std::runtime_error("map import: expected a 3-vector");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

const char* sweep_name(EdgeSweep s) {
    return s == EdgeSweep::Global ? "global" : "incident";
}

}  // namespace

void export_map(const MultiLayerMap& map, std::ostream& out) {
    const auto& cfg = map.config();
    json doc;
    doc["format"] = kFormat;
    doc["version"] = kVersion;
    doc["config"] = {
        {"lambda", cfg.lambda},
        {"base_vigilance", cfg.base_vigilance},
        {"alpha", cfg.alpha},
        {"normal_edge_threshold", cfg.normal_edge_threshold},
        {"updates_enabled", cfg.updates_enabled},
        {"min_edges_for_aging", cfg.min_edges_for_aging},
        {"rng_seed", cfg.rng_seed},
        {"edge_sweep", sweep_name(cfg.edge_sweep)},
    };

    json layers = json::array();
    json summary = json::array();
    for (std::size_t ell = 1; ell <= map.layer_count(); ++ell) {
        const auto& layer = map.layer(ell);
        json nodes = json::array();
        for (const auto& n : layer.nodes()) {
            json jn;
            jn["id"] = n.id;
            jn["position"] = vec_json(n.position);
            jn["win_count"] = n.win_count;
            jn["parent"] = n.parent ? json(*n.parent) : json(nullptr);
            jn["children"] = n.children;
            jn["normal"] = n.normal ? vec_json(*n.normal) : json(nullptr);
            jn["traversability"] = n.traversability ? json(*n.traversability) : json(nullptr);
            nodes.push_back(std::move(jn));
        }
        json edges = json::array();
        for (const auto& e : layer.edges()) {
            edges.push_back({{"i", e.a}, {"j", e.b}, {"age", e.age}, {"in_nor", e.in_nor},
                             {"in_tra", e.in_tra}});
        }
        json jl;
        jl["layer"] = ell;
        jl["vigilance"] = layer.vigilance();
        jl["deleted_count"] = layer.age_stats().deleted_count();
        jl["deleted_age_sum"] = layer.age_stats().deleted_sum();
        jl["nodes"] = std::move(nodes);
        jl["edges"] = std::move(edges);
        layers.push_back(std::move(jl));

        json row;
        row["layer"] = ell;
        row["nodes"] = layer.node_count();
        row["edges"] = layer.edge_count();
        if (ell >= 2 && map.layer(ell - 1).node_count() > 0) {
            row["node_ratio_percent"] = 100.0 * static_cast<double>(layer.node_count()) /
                                        static_cast<double>(map.layer(ell - 1).node_count());
        } else {
            row["node_ratio_percent"] = nullptr;
        }
        summary.push_back(std::move(row));
    }
    doc["layers"] = std::move(layers);
    doc["summary"] = std::move(summary);
    out << doc.dump(1) << '\n';
}

void export_map(const MultiLayerMap& map, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    export_map(map, out);
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

MultiLayerMap import_map(std::istream& in) {
    const json doc = json::parse(in);
    if (doc.value("format", "") != kFormat || doc.value("version", 0) != kVersion) {
        throw std::runtime_error("map import: unknown document format");
    }
    const auto& jc = doc.at("config");
    LearnerConfig cfg;
    cfg.lambda = jc.at("lambda").get<int>();
    cfg.base_vigilance = jc.at("base_vigilance").get<double>();
    cfg.alpha = jc.at("alpha").get<double>();
    cfg.normal_edge_threshold = jc.at("normal_edge_threshold").get<double>();
    cfg.updates_enabled = jc.at("updates_enabled").get<bool>();
    cfg.min_edges_for_aging = jc.at("min_edges_for_aging").get<std::size_t>();
    cfg.rng_seed = jc.at("rng_seed").get<std::uint64_t>();
    cfg.edge_sweep =
        jc.at("edge_sweep").get<std::string>() == "global" ? EdgeSweep::Global : EdgeSweep::Incident;

    MultiLayerMap map(cfg);
    const auto& jlayers = doc.at("layers");
    if (jlayers.empty()) {
        throw std::runtime_error("map import: no layers");
    }
    for (std::size_t k = 1; k < jlayers.size(); ++k) {
        map.push_layer();
    }
    for (std::size_t ell = 1; ell <= jlayers.size(); ++ell) {
        const auto& jl = jlayers[ell - 1];
        auto& layer = map.layer(ell);
        for (const auto& jn : jl.at("nodes")) {
            const NodeId id = layer.add_node(json_vec(jn.at("position")));
            if (jn.at("id").get<NodeId>() != id) {
                throw std::runtime_error("map import: node ids must be dense and ordered");
            }
            auto& n = layer.node(id);
            n.win_count = jn.at("win_count").get<std::uint64_t>();
            if (!jn.at("normal").is_null()) {
                n.normal = json_vec(jn.at("normal"));
            }
            if (!jn.at("traversability").is_null()) {
                n.traversability = jn.at("traversability").get<bool>();
            }
        }
        for (const auto& je : jl.at("edges")) {
            EdgeRecord e;
            e.a = je.at("i").get<NodeId>();
            e.b = je.at("j").get<NodeId>();
            e.age = je.at("age").get<std::uint32_t>();
            e.in_nor = je.at("in_nor").get<bool>();
            e.in_tra = je.at("in_tra").get<bool>();
            layer.insert_edge(e);
        }
        layer.restore_deletions(jl.at("deleted_count").get<std::uint64_t>(),
                                jl.at("deleted_age_sum").get<std::uint64_t>());
    }
    // Children lists are replayed in stored order so a re-export matches.
    for (std::size_t ell = 2; ell <= jlayers.size(); ++ell) {
        for (const auto& jn : jlayers[ell - 1].at("nodes")) {
            const NodeId parent = jn.at("id").get<NodeId>();
            for (const auto& jc_child : jn.at("children")) {
                set_parent(map.layer(ell - 1), jc_child.get<NodeId>(), map.layer(ell), parent);
            }
        }
    }
    for (std::size_t ell = 1; ell <= jlayers.size(); ++ell) {
        for (const auto& jn : jlayers[ell - 1].at("nodes")) {
            const auto& jp = jn.at("parent");
            const auto stored = map.layer(ell).node(jn.at("id").get<NodeId>()).parent;
            if (jp.is_null() ? stored.has_value() : stored != jp.get<NodeId>()) {
                throw std::runtime_error("map import: parent link disagrees with children lists");
            }
        }
    }
    return map;
}

MultiLayerMap import_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return import_map(in);
}

}  // namespace topomap::bench
