#include "multirank/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_set>

#include "multirank/error.hpp"

namespace multirank {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::DuplicateNodeId: return "DuplicateNodeId";
        case Errc::EdgeEndpointMissing: return "EdgeEndpointMissing";
        case Errc::NonPositiveWeight: return "NonPositiveWeight";
        case Errc::NegativeStickiness: return "NegativeStickiness";
        case Errc::EmptyNetwork: return "EmptyNetwork";
        case Errc::EmptySourceSet: return "EmptySourceSet";
        case Errc::SourceNotCommonNode: return "SourceNotCommonNode";
        case Errc::NotStochastic: return "NotStochastic";
        case Errc::MissingColumn: return "MissingColumn";
        case Errc::BadDate: return "BadDate";
        case Errc::BadRecord: return "BadRecord";
        case Errc::AreaDistrictConflict: return "AreaDistrictConflict";
        case Errc::BorrowerNotInTail: return "BorrowerNotInTail";
        case Errc::MissingScenarioRun: return "MissingScenarioRun";
        case Errc::DegenerateLabels: return "DegenerateLabels";
        case Errc::SpanTooShort: return "SpanTooShort";
        case Errc::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

LayerSpec LayerSpec::from_edges(std::string name, std::vector<EdgeSpec> edges) {
    LayerSpec layer{std::move(name), {}, std::move(edges)};
    std::unordered_set<std::string> seen;
    for (const auto& e : layer.edges) {
        if (seen.insert(e.specific).second) layer.specific_nodes.push_back(e.specific);
    }
    return layer;
}

std::optional<std::size_t> MultilayerNetwork::index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t MultilayerNetwork::num_edges() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.edges.size();
    return n;
}

double MultilayerNetwork::total_edge_weight() const noexcept {
    double w = 0.0;
    for (const auto& l : layers_)
        for (const auto& e : l.edges) w += e.weight;
    return w;
}

void MultilayerNetwork::index_adjacency() {
    adjacency_.assign(num_common_, {});
    for (const auto& l : layers_)
        for (const auto& e : l.edges) adjacency_[e.common].emplace_back(e.specific, e.weight);
}

MultilayerNetwork build_network(const std::vector<LayerSpec>& specs, double stickiness) {
    if (!(stickiness >= 0.0) || !std::isfinite(stickiness))
        throw Error(Errc::NegativeStickiness, "stickiness must be finite and >= 0, got " + std::to_string(stickiness));

    // Specific ids per layer; they must be unique network-wide.
    std::unordered_map<std::string, std::size_t> specific_layer;
    for (std::size_t a = 0; a < specs.size(); ++a) {
        for (const auto& id : specs[a].specific_nodes) {
            if (!specific_layer.emplace(id, a).second)
                throw Error(Errc::DuplicateNodeId, "specific node '" + id + "' declared more than once");
        }
    }

    MultilayerNetwork net;
    net.stickiness_ = stickiness;

    // Common nodes in first-appearance order.
    for (std::size_t a = 0; a < specs.size(); ++a) {
        for (const auto& e : specs[a].edges) {
            if (e.common.empty() || e.specific.empty())
                throw Error(Errc::EdgeEndpointMissing, "edge with empty endpoint in layer '" + specs[a].name + "'");
            if (!(e.weight > 0.0) || !std::isfinite(e.weight))
                throw Error(Errc::NonPositiveWeight,
                            "edge " + e.common + "-" + e.specific + " has weight " + std::to_string(e.weight));
            auto sl = specific_layer.find(e.specific);
            if (sl == specific_layer.end() || sl->second != a)
                throw Error(Errc::EdgeEndpointMissing,
                            "specific node '" + e.specific + "' not declared in layer '" + specs[a].name + "'");
            if (specific_layer.count(e.common))
                throw Error(Errc::DuplicateNodeId, "node '" + e.common + "' used as both common and specific");
            if (net.index_.emplace(e.common, net.nodes_.size()).second)
                net.nodes_.push_back(NodeRef{e.common, NodeKind::common, std::nullopt});
        }
    }
    net.num_common_ = net.nodes_.size();

    for (std::size_t a = 0; a < specs.size(); ++a) {
        Layer layer;
        layer.name = specs[a].name;
        for (const auto& id : specs[a].specific_nodes) {
            net.index_.emplace(id, net.nodes_.size());
            layer.specific_nodes.push_back(net.nodes_.size());
            net.nodes_.push_back(NodeRef{id, NodeKind::specific, a});
        }
        // Merge duplicates, keeping first-appearance order.
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> slot;
        for (const auto& e : specs[a].edges) {
            const std::size_t c = net.index_.at(e.common);
            const std::size_t s = net.index_.at(e.specific);
            auto [it, fresh] = slot.emplace(std::make_pair(c, s), layer.edges.size());
            if (fresh)
                layer.edges.push_back(Edge{c, s, e.weight, a});
            else
                layer.edges[it->second].weight += e.weight;
        }
        net.edge_tags_.push_back(layer.name);
        net.layers_.push_back(std::move(layer));
    }
    net.index_adjacency();
    return net;
}

MultilayerNetwork aggregate_network(const MultilayerNetwork& net) {
    if (net.num_layers() <= 1) return net;

    MultilayerNetwork flat;
    flat.nodes_ = net.nodes_;
    flat.num_common_ = net.num_common_;
    flat.index_ = net.index_;
    flat.stickiness_ = net.stickiness_;
    flat.edge_tags_ = net.edge_tags_;

    Layer merged;
    for (std::size_t a = 0; a < net.num_layers(); ++a) {
        const auto& l = net.layers_[a];
        merged.name += (a ? "+" : "") + l.name;
        merged.specific_nodes.insert(merged.specific_nodes.end(), l.specific_nodes.begin(), l.specific_nodes.end());
        merged.edges.insert(merged.edges.end(), l.edges.begin(), l.edges.end());
    }
    for (auto& n : flat.nodes_)
        if (n.kind == NodeKind::specific) n.layer_of_origin = 0;
    flat.layers_.push_back(std::move(merged));
    flat.index_adjacency();
    return flat;
}

namespace {

struct DisjointSets {
    std::vector<std::size_t> parent, size;

    explicit DisjointSets(std::size_t n) : parent(n), size(n, 1) { std::iota(parent.begin(), parent.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size[a] < size[b]) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
    }
};

}  // namespace

double largest_component_fraction(const MultilayerNetwork& net) {
    const std::size_t n = net.num_nodes();
    if (n == 0) throw Error(Errc::EmptyNetwork, "network has no nodes");
    DisjointSets sets(n);
    for (const auto& l : net.layers())
        for (const auto& e : l.edges) sets.unite(e.common, e.specific);
    std::size_t best = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (sets.find(i) == i) best = std::max(best, sets.size[i]);
    return static_cast<double>(best) / static_cast<double>(n);
}

}  // namespace multirank
