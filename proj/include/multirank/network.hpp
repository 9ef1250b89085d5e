#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace multirank {

enum class NodeKind { common, specific };

struct NodeRef {
    std::string id;
    NodeKind kind = NodeKind::common;
    std::optional<std::size_t> layer_of_origin;  // specific nodes only
};

/// Input edge: a common node joined to one of the layer's specific nodes.
struct EdgeSpec {
    std::string common;
    std::string specific;
    double weight = 1.0;
};

/// Input description of one bipartite layer.
struct LayerSpec {
    std::string name;
    std::vector<std::string> specific_nodes;
    std::vector<EdgeSpec> edges;

    /// Declares every specific endpoint in first-appearance order.
    static LayerSpec from_edges(std::string name, std::vector<EdgeSpec> edges);
};

/// Merged intra-layer edge between node indices of the owning network.
struct Edge {
    std::size_t common;
    std::size_t specific;
    double weight;
    std::size_t tag;  // index of the layer the edge was declared in (its colour)
};

struct Layer {
    std::string name;
    std::vector<std::size_t> specific_nodes;
    std::vector<Edge> edges;
};

/// Bipartite multilayer network: common nodes present in every layer, specific
/// nodes owned by one layer, intra edges common-specific only, and inter edges
/// of weight `stickiness` between the copies of each common node.
///
/// Node order is fixed: common nodes in first-appearance order, then specific
/// nodes grouped by layer in declaration order. Supra state of node i in layer a
/// is a * N + i.
class MultilayerNetwork {
public:
    MultilayerNetwork() = default;

    std::size_t num_nodes() const noexcept { return nodes_.size(); }
    std::size_t num_layers() const noexcept { return layers_.size(); }
    std::size_t num_common() const noexcept { return num_common_; }
    std::size_t num_states() const noexcept { return nodes_.size() * layers_.size(); }
    double stickiness() const noexcept { return stickiness_; }

    const std::vector<NodeRef>& nodes() const noexcept { return nodes_; }
    const NodeRef& node(std::size_t i) const { return nodes_.at(i); }
    const std::vector<Layer>& layers() const noexcept { return layers_; }
    const Layer& layer(std::size_t a) const { return layers_.at(a); }

    /// Names of edge colours; tag t of an edge names edge_tags()[t].
    const std::vector<std::string>& edge_tags() const noexcept { return edge_tags_; }

    std::optional<std::size_t> index_of(const std::string& id) const;
    bool is_common(std::size_t i) const noexcept { return i < num_common_; }

    std::size_t num_edges() const noexcept;
    double total_edge_weight() const noexcept;

    /// Specific neighbours of a common node across all layers, with weights.
    const std::vector<std::pair<std::size_t, double>>& neighbours(std::size_t common) const {
        return adjacency_.at(common);
    }

private:
    friend MultilayerNetwork build_network(const std::vector<LayerSpec>&, double);
    friend MultilayerNetwork aggregate_network(const MultilayerNetwork&);

    std::vector<NodeRef> nodes_;
    std::size_t num_common_ = 0;
    std::vector<Layer> layers_;
    std::vector<std::string> edge_tags_;
    double stickiness_ = 1.0;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::vector<std::pair<std::size_t, double>>> adjacency_;

    void index_adjacency();
};

/// Validates and assembles a network. Common nodes are the nodes appearing on
/// the common side of any edge; duplicate (common, specific) pairs are merged by
/// summing their weights.
///
/// Throws Error with DuplicateNodeId, EdgeEndpointMissing, NonPositiveWeight or
/// NegativeStickiness.
MultilayerNetwork build_network(const std::vector<LayerSpec>& layers, double stickiness);

/// Edge-coloured single-layer limit of the network (stickiness to infinity):
/// one layer holding every specific node and every intra edge, each edge keeping
/// its original layer as tag. A single-layer network is returned unchanged.
MultilayerNetwork aggregate_network(const MultilayerNetwork& net);

/// Fraction of distinct nodes in the largest connected component. Copies of a
/// common node count as one node whether or not stickiness joins them.
double largest_component_fraction(const MultilayerNetwork& net);

}  // namespace multirank
