#include "topomap/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "topomap/quantile.hpp"

namespace topomap {

// ---------------------------------------------------------------------------
// AgeStats
// ---------------------------------------------------------------------------

void AgeStats::grow_to(std::size_t min_capacity) {
    std::size_t capacity = std::max<std::size_t>(counts_.size(), 16);
    while (capacity < min_capacity) {
        capacity *= 2;
    }
    if (capacity == counts_.size()) {
        return;
    }
    counts_.resize(capacity, 0);
    tree_.assign(capacity + 1, 0);
    for (std::size_t i = 1; i <= capacity; ++i) {
        tree_[i] += counts_[i - 1];
        const std::size_t parent = i + (i & (~i + 1));
        if (parent <= capacity) {
            tree_[parent] += tree_[i];
        }
    }
}

void AgeStats::fenwick_add(std::size_t index, std::int64_t delta) {
    for (std::size_t i = index + 1; i < tree_.size(); i += i & (~i + 1)) {
        tree_[i] = static_cast<std::uint64_t>(static_cast<std::int64_t>(tree_[i]) + delta);
    }
}

void AgeStats::insert(std::uint32_t age) {
    if (age >= counts_.size()) {
        grow_to(static_cast<std::size_t>(age) + 1);
    }
    ++counts_[age];
    fenwick_add(age, 1);
    ++size_;
}

void AgeStats::erase(std::uint32_t age) {
    if (age >= counts_.size() || counts_[age] == 0) {
        throw std::logic_error("AgeStats::erase: age not present");
    }
    --counts_[age];
    fenwick_add(age, -1);
    --size_;
}

void AgeStats::move(std::uint32_t from, std::uint32_t to) {
    erase(from);
    insert(to);
}

void AgeStats::record_deletion(std::uint32_t age) {
    ++deleted_count_;
    deleted_sum_ += age;
}

void AgeStats::restore_deletions(std::uint64_t count, std::uint64_t age_sum) {
    deleted_count_ = count;
    deleted_sum_ = age_sum;
}

double AgeStats::deleted_mean() const {
    if (deleted_count_ == 0) {
        return 0.0;
    }
    return static_cast<double>(deleted_sum_) / static_cast<double>(deleted_count_);
}

std::uint32_t AgeStats::nth(std::size_t k) const {
    if (k >= size_) {
        throw std::out_of_range("AgeStats::nth: rank out of range");
    }
    // Largest prefix position whose cumulative count is <= k; the answer is
    // the next index.
    std::size_t pos = 0;
    std::uint64_t remaining = k;
    std::size_t step = 1;
    while (step * 2 < tree_.size()) {
        step *= 2;
    }
    for (; step > 0; step /= 2) {
        const std::size_t next = pos + step;
        if (next < tree_.size() && tree_[next] <= remaining) {
            pos = next;
            remaining -= tree_[next];
        }
    }
    return static_cast<std::uint32_t>(pos);
}

double AgeStats::quantile(double q) const {
    return interpolated_quantile(size_, q, [this](std::size_t k) { return nth(k); });
}

// ---------------------------------------------------------------------------
// LearnerConfig
// ---------------------------------------------------------------------------

void LearnerConfig::validate() const {
    if (lambda < 1) {
        throw std::invalid_argument("lambda must be >= 1");
    }
    if (!(alpha > 1.0)) {
        throw std::invalid_argument("alpha must be > 1");
    }
    if (!(base_vigilance > 0.0)) {
        throw std::invalid_argument("base vigilance must be > 0");
    }
    if (!(normal_edge_threshold >= 0.0 && normal_edge_threshold <= 1.0)) {
        throw std::invalid_argument("normal edge threshold must lie in [0, 1]");
    }
    if (min_edges_for_aging < 1) {
        throw std::invalid_argument("min_edges_for_aging must be >= 1");
    }
}

double layer_vigilance(int layer_index, double base_vigilance, double alpha) {
    return std::pow(alpha, layer_index - 1) * base_vigilance;
}

// ---------------------------------------------------------------------------
// LayerGraph
// ---------------------------------------------------------------------------

LayerGraph::LayerGraph(int layer_index, double vigilance, std::size_t min_edges_for_aging)
    : layer_index_(layer_index),
      vigilance_(vigilance),
      min_edges_for_aging_(min_edges_for_aging) {
    if (layer_index < 1) {
        throw std::invalid_argument("layer index must be >= 1");
    }
}

void LayerGraph::check_node(NodeId id, const char* what) const {
    if (!contains(id)) {
        std::ostringstream msg;
        msg << what << ": node " << id << " does not exist in layer " << layer_index_;
        throw ContractViolation(msg.str());
    }
}

const NodeRecord& LayerGraph::node(NodeId id) const {
    check_node(id, "node");
    return nodes_[id - 1];
}

NodeRecord& LayerGraph::node(NodeId id) {
    check_node(id, "node");
    return nodes_[id - 1];
}

std::span<const Neighbor> LayerGraph::neighbors(NodeId id) const {
    check_node(id, "neighbors");
    return adjacency_[id - 1];
}

std::optional<std::uint32_t> LayerGraph::find_edge(NodeId i, NodeId j) const {
    if (!contains(i) || !contains(j)) {
        return std::nullopt;
    }
    // Scan the shorter list.
    const auto& li = adjacency_[i - 1];
    const auto& lj = adjacency_[j - 1];
    const auto& list = li.size() <= lj.size() ? li : lj;
    const NodeId other = li.size() <= lj.size() ? j : i;
    for (const auto& n : list) {
        if (n.id == other) {
            return n.slot;
        }
    }
    return std::nullopt;
}

std::optional<std::uint32_t> LayerGraph::edge_age(NodeId i, NodeId j) const {
    if (auto slot = find_edge(i, j)) {
        return edges_[*slot].age;
    }
    return std::nullopt;
}

std::vector<EdgeRecord> LayerGraph::edges() const {
    std::vector<EdgeRecord> out;
    out.reserve(edge_count());
    for (const auto& e : edges_) {
        if (e.a != 0) {
            out.push_back(e);
        }
    }
    std::sort(out.begin(), out.end(), [](const EdgeRecord& x, const EdgeRecord& y) {
        return x.a != y.a ? x.a < y.a : x.b < y.b;
    });
    return out;
}

NodeId LayerGraph::add_node(const Vec3& position) {
    NodeRecord record;
    record.id = static_cast<NodeId>(nodes_.size() + 1);
    record.position = position;
    nodes_.push_back(std::move(record));
    adjacency_.emplace_back();
    return nodes_.back().id;
}

std::uint32_t LayerGraph::allocate_slot(const EdgeRecord& edge) {
    std::uint32_t slot;
    if (!free_slots_.empty()) {
        slot = free_slots_.back();
        free_slots_.pop_back();
        edges_[slot] = edge;
    } else {
        slot = static_cast<std::uint32_t>(edges_.size());
        edges_.push_back(edge);
    }
    adjacency_[edge.a - 1].push_back({edge.b, slot});
    adjacency_[edge.b - 1].push_back({edge.a, slot});
    age_stats_.insert(edge.age);
    return slot;
}

void LayerGraph::connect(NodeId i, NodeId j) {
    check_node(i, "connect");
    check_node(j, "connect");
    if (i == j) {
        throw ContractViolation("connect: self-loop requested");
    }
    if (auto slot = find_edge(i, j)) {
        auto& e = edges_[*slot];
        age_stats_.move(e.age, 0);
        e.age = 0;
        return;
    }
    EdgeRecord e;
    e.a = std::min(i, j);
    e.b = std::max(i, j);
    allocate_slot(e);
}

void LayerGraph::insert_edge(const EdgeRecord& edge) {
    check_node(edge.a, "insert_edge");
    check_node(edge.b, "insert_edge");
    if (edge.a == edge.b) {
        throw ContractViolation("insert_edge: self-loop requested");
    }
    if (find_edge(edge.a, edge.b)) {
        throw ContractViolation("insert_edge: edge already present");
    }
    EdgeRecord e = edge;
    e.a = std::min(edge.a, edge.b);
    e.b = std::max(edge.a, edge.b);
    allocate_slot(e);
}

void LayerGraph::age_incident_edges(NodeId s1) {
    check_node(s1, "age_incident_edges");
    for (const auto& n : adjacency_[s1 - 1]) {
        auto& e = edges_[n.slot];
        age_stats_.move(e.age, e.age + 1);
        ++e.age;
    }
}

std::optional<double> LayerGraph::g_thr() const {
    if (age_stats_.size() < min_edges_for_aging_) {
        return std::nullopt;
    }
    const double q1 = age_stats_.quantile(0.25);
    const double q3 = age_stats_.quantile(0.75);
    return q3 + (q3 - q1);
}

std::optional<double> LayerGraph::g_max() const {
    const auto thr = g_thr();
    if (!thr) {
        return std::nullopt;
    }
    const double deleted = static_cast<double>(age_stats_.deleted_count());
    const double current = static_cast<double>(age_stats_.size());
    const double w = deleted / (deleted + current);
    return age_stats_.deleted_mean() * w + *thr * (1.0 - w);
}

void LayerGraph::remove_edge(std::uint32_t slot) {
    const EdgeRecord e = edges_[slot];
    auto drop = [slot](std::vector<Neighbor>& list) {
        for (std::size_t k = 0; k < list.size(); ++k) {
            if (list[k].slot == slot) {
                list[k] = list.back();
                list.pop_back();
                return;
            }
        }
    };
    drop(adjacency_[e.a - 1]);
    drop(adjacency_[e.b - 1]);
    age_stats_.erase(e.age);
    age_stats_.record_deletion(e.age);
    edges_[slot] = EdgeRecord{};
    free_slots_.push_back(slot);
}

std::size_t LayerGraph::remove_edges_older_than(NodeId around, double threshold) {
    check_node(around, "remove_edges_older_than");
    std::vector<std::uint32_t> doomed;
    for (const auto& n : adjacency_[around - 1]) {
        if (static_cast<double>(edges_[n.slot].age) > threshold) {
            doomed.push_back(n.slot);
        }
    }
    for (auto slot : doomed) {
        remove_edge(slot);
    }
    return doomed.size();
}

std::size_t LayerGraph::remove_aged_edges(NodeId around) {
    const auto threshold = g_max();
    if (!threshold) {
        return 0;
    }
    return remove_edges_older_than(around, *threshold);
}

std::size_t LayerGraph::remove_aged_edges_global() {
    const auto threshold = g_max();
    if (!threshold) {
        return 0;
    }
    std::vector<std::uint32_t> doomed;
    for (std::uint32_t slot = 0; slot < edges_.size(); ++slot) {
        if (edges_[slot].a != 0 && static_cast<double>(edges_[slot].age) > *threshold) {
            doomed.push_back(slot);
        }
    }
    for (auto slot : doomed) {
        remove_edge(slot);
    }
    return doomed.size();
}

void set_parent(LayerGraph& lower, NodeId child, LayerGraph& upper, NodeId parent) {
    if (upper.layer_index() != lower.layer_index() + 1) {
        throw ContractViolation("set_parent: parent layer must be directly above the child layer");
    }
    auto& c = lower.node(child);
    auto& p = upper.node(parent);
    if (c.parent) {
        std::ostringstream msg;
        msg << "set_parent: node " << child << " in layer " << lower.layer_index()
            << " already has parent " << *c.parent;
        throw ContractViolation(msg.str());
    }
    c.parent = parent;
    p.children.push_back(child);
}

// ---------------------------------------------------------------------------
// MultiLayerMap
// ---------------------------------------------------------------------------

MultiLayerMap::MultiLayerMap(LearnerConfig config) : config_(config) {
    config_.validate();
    push_layer();
}

LayerGraph& MultiLayerMap::layer(std::size_t ell) {
    if (ell < 1 || ell > layers_.size()) {
        throw std::out_of_range("layer index out of range");
    }
    return layers_[ell - 1];
}

const LayerGraph& MultiLayerMap::layer(std::size_t ell) const {
    if (ell < 1 || ell > layers_.size()) {
        throw std::out_of_range("layer index out of range");
    }
    return layers_[ell - 1];
}

LayerGraph& MultiLayerMap::push_layer() {
    const int index = static_cast<int>(layers_.size()) + 1;
    layers_.emplace_back(index, layer_vigilance(index, config_.base_vigilance, config_.alpha),
                         config_.min_edges_for_aging);
    return layers_.back();
}

std::size_t MultiLayerMap::total_nodes() const {
    std::size_t total = 0;
    for (const auto& l : layers_) {
        total += l.node_count();
    }
    return total;
}

// ---------------------------------------------------------------------------
// audit
// ---------------------------------------------------------------------------

namespace {

void audit_layer_edges(const LayerGraph& layer, std::vector<std::string>& out) {
    const int ell = layer.layer_index();
    std::vector<std::uint64_t> recount;
    std::size_t live = 0;
    for (NodeId i = 1; i <= layer.node_count(); ++i) {
        for (const auto& n : layer.neighbors(i)) {
            const auto& e = layer.edge_at(n.slot);
            if (e.a == 0 || !((e.a == i && e.b == n.id) || (e.b == i && e.a == n.id))) {
                out.push_back("layer " + std::to_string(ell) + ": neighbor entry of node " +
                              std::to_string(i) + " points at a mismatched edge slot");
                continue;
            }
            if (n.id == i) {
                out.push_back("layer " + std::to_string(ell) + ": self loop at node " +
                              std::to_string(i));
            }
            bool mirrored = false;
            for (const auto& back : layer.neighbors(n.id)) {
                if (back.id == i && back.slot == n.slot) {
                    mirrored = true;
                    break;
                }
            }
            if (!mirrored) {
                out.push_back("layer " + std::to_string(ell) + ": edge {" + std::to_string(i) +
                              "," + std::to_string(n.id) + "} not visible from both ends");
            }
            if (i < n.id) {
                ++live;
                if (recount.size() <= e.age) {
                    recount.resize(e.age + 1, 0);
                }
                ++recount[e.age];
            }
            if (ell > 1 && (e.in_nor || e.in_tra)) {
                out.push_back("layer " + std::to_string(ell) +
                              ": attribute edge flags set above layer 1");
            }
        }
    }
    if (live != layer.edge_count()) {
        out.push_back("layer " + std::to_string(ell) + ": age histogram total " +
                      std::to_string(layer.edge_count()) + " != edge count " +
                      std::to_string(live));
    }
    const auto hist = layer.age_stats().histogram();
    const std::size_t span = std::max(hist.size(), recount.size());
    for (std::size_t a = 0; a < span; ++a) {
        const std::uint64_t h = a < hist.size() ? hist[a] : 0;
        const std::uint64_t r = a < recount.size() ? recount[a] : 0;
        if (h != r) {
            out.push_back("layer " + std::to_string(ell) + ": histogram count at age " +
                          std::to_string(a) + " is " + std::to_string(h) + ", recount " +
                          std::to_string(r));
        }
    }
}

}  // namespace

std::vector<std::string> audit(const MultiLayerMap& map, bool hierarchical) {
    std::vector<std::string> out;
    const std::size_t L = map.layer_count();
    for (std::size_t ell = 1; ell <= L; ++ell) {
        const auto& layer = map.layer(ell);
        const int index = static_cast<int>(ell);
        if (layer.layer_index() != index) {
            out.push_back("layer " + std::to_string(ell) + ": stored index mismatch");
        }
        if (layer.vigilance() != layer_vigilance(index, map.base_vigilance(), map.alpha())) {
            out.push_back("layer " + std::to_string(ell) + ": vigilance off schedule");
        }
        audit_layer_edges(layer, out);
        for (const auto& n : layer.nodes()) {
            if (n.normal && std::abs(n.normal->norm() - 1.0) > 1e-9) {
                out.push_back("layer " + std::to_string(ell) + ": node " + std::to_string(n.id) +
                              " has a non-unit normal");
            }
            if (ell > 1 && (n.normal || n.traversability)) {
                out.push_back("layer " + std::to_string(ell) + ": attributes above layer 1");
            }
            if (ell == 1 && !n.children.empty()) {
                out.push_back("layer 1: node " + std::to_string(n.id) + " has children");
            }
            if (ell < L && !n.parent) {
                out.push_back("layer " + std::to_string(ell) + ": node " + std::to_string(n.id) +
                              " has no parent");
            }
            if (ell == L && n.parent) {
                out.push_back("top layer node " + std::to_string(n.id) + " has a parent");
            }
        }
        if (ell >= 2) {
            const auto& lower = map.layer(ell - 1);
            std::vector<int> seen(lower.node_count() + 1, 0);
            for (const auto& n : layer.nodes()) {
                for (NodeId c : n.children) {
                    if (!lower.contains(c)) {
                        out.push_back("layer " + std::to_string(ell) + ": node " +
                                      std::to_string(n.id) + " lists missing child " +
                                      std::to_string(c));
                        continue;
                    }
                    ++seen[c];
                    if (lower.node(c).parent != n.id) {
                        out.push_back("layer " + std::to_string(ell - 1) + ": node " +
                                      std::to_string(c) + " parent link disagrees with children");
                    }
                }
            }
            for (NodeId c = 1; c <= lower.node_count(); ++c) {
                if (seen[c] != 1) {
                    out.push_back("layer " + std::to_string(ell - 1) + ": node " +
                                  std::to_string(c) + " appears in " + std::to_string(seen[c]) +
                                  " children sets");
                }
            }
        }
    }
    if (hierarchical && map.layer(1).node_count() > 0 && map.top().node_count() != 1) {
        out.push_back("top layer holds " + std::to_string(map.top().node_count()) +
                      " nodes, expected 1");
    }
    return out;
}

}  // namespace topomap
