#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mpgk {

using VertexId = std::size_t;
using Label = long long;
using Edge = std::pair<VertexId, VertexId>;

/// Simple undirected graph with optional discrete labels and continuous
/// attributes (one row of `attributes()` per vertex).
///
/// The raw constructor stores the adjacency as given so that `validate` can
/// report malformed input; use `from_edges` to build a well-formed graph.
class Graph {
public:
    Graph() = default;
    explicit Graph(std::vector<std::vector<VertexId>> adjacency,
                   std::optional<std::vector<Label>> labels = std::nullopt,
                   std::optional<Eigen::MatrixXd> attributes = std::nullopt);

    /// Symmetrizes, sorts and deduplicates `edges`; self-loops are dropped.
    static Graph from_edges(std::size_t n_vertices, std::span<const Edge> edges,
                            std::optional<std::vector<Label>> labels = std::nullopt,
                            std::optional<Eigen::MatrixXd> attributes = std::nullopt);

    std::size_t n_vertices() const { return adjacency_.size(); }
    std::size_t n_edges() const;

    /// Sorted neighbor list. Throws IndexError when v is out of range.
    std::span<const VertexId> neighbors(VertexId v) const;
    std::size_t degree(VertexId v) const { return neighbors(v).size(); }

    bool has_labels() const { return labels_.has_value(); }
    bool has_attributes() const { return attributes_.has_value(); }
    const std::vector<Label>& labels() const;
    const Eigen::MatrixXd& attributes() const;
    std::size_t attribute_dim() const { return attributes_ ? static_cast<std::size_t>(attributes_->cols()) : 0; }

    const std::vector<std::vector<VertexId>>& adjacency() const { return adjacency_; }
    std::vector<Edge> edges() const;

    friend bool operator==(const Graph& a, const Graph& b);

private:
    std::vector<std::vector<VertexId>> adjacency_;
    std::optional<std::vector<Label>> labels_;
    std::optional<Eigen::MatrixXd> attributes_;
};

std::span<const VertexId> neighbors(const Graph& g, VertexId v);

/// Barbell B(h, k): cliques on 0..h-1 and h+k..2h+k-1 joined through the
/// path h..h+k-1, attached at vertices 0 and 2h+k-1.
Graph make_barbell(std::size_t clique_size, std::size_t path_length);

/// Vertex v of `g` becomes vertex perm[v] of the result.
Graph permute_vertices(const Graph& g, std::span<const VertexId> perm);

enum class TargetKind { none, classes, regression };

struct Targets {
    TargetKind kind = TargetKind::none;
    /// Dense class index in [0, C) per graph.
    std::vector<int> classes;
    /// Original label of dense class c, ascending.
    std::vector<Label> class_values;
    std::vector<std::vector<double>> regression;

    std::size_t size() const;
    std::size_t n_classes() const { return class_values.size(); }

    /// Remaps raw labels to 0..C-1 in sorted order of the originals.
    static Targets from_class_labels(std::span<const Label> raw);
    static Targets from_regression(std::vector<std::vector<double>> values);
};

/// Immutable collection of graphs sharing a global vertex numbering: vertex v
/// of graph g has global id offset(g) + v.
class GraphDataset {
public:
    GraphDataset() = default;
    explicit GraphDataset(std::vector<Graph> graphs, Targets targets = {});

    std::size_t n_graphs() const { return graphs_.size(); }
    std::size_t total_vertices() const { return offsets_.back(); }
    const std::vector<Graph>& graphs() const { return graphs_; }
    const Graph& graph(std::size_t g) const;
    const Targets& targets() const { return targets_; }

    std::size_t offset(std::size_t g) const { return offsets_.at(g); }
    std::size_t global_id(std::size_t g, VertexId v) const;
    /// Inverse of global_id: (graph, local vertex).
    std::pair<std::size_t, VertexId> locate(std::size_t global) const;
    /// Graph index of every global vertex.
    const std::vector<std::size_t>& graph_of_vertex() const { return graph_of_; }

    bool has_labels() const;
    bool has_attributes() const;
    std::size_t attribute_dim() const;

    friend bool operator==(const GraphDataset& a, const GraphDataset& b);

private:
    std::vector<Graph> graphs_;
    Targets targets_;
    std::vector<std::size_t> offsets_{0};
    std::vector<std::size_t> graph_of_;
};

struct Violation {
    std::optional<std::size_t> graph;
    std::string rule;
    std::string detail;
};

/// Every broken Graph/GraphDataset invariant; empty when the dataset is sound.
std::vector<Violation> validate(const GraphDataset& ds);

}  // namespace mpgk
