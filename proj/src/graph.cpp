#include "mpgk/graph.hpp"

#include <algorithm>
#include <numeric>

#include "mpgk/error.hpp"

namespace mpgk {

Graph::Graph(std::vector<std::vector<VertexId>> adjacency, std::optional<std::vector<Label>> labels,
             std::optional<Eigen::MatrixXd> attributes)
    : adjacency_(std::move(adjacency)), labels_(std::move(labels)), attributes_(std::move(attributes)) {}

Graph Graph::from_edges(std::size_t n_vertices, std::span<const Edge> edges, std::optional<std::vector<Label>> labels,
                        std::optional<Eigen::MatrixXd> attributes) {
    std::vector<std::vector<VertexId>> adj(n_vertices);
    for (const auto& [u, v] : edges) {
        if (u >= n_vertices || v >= n_vertices) {
            throw IndexError("edge (" + std::to_string(u) + ", " + std::to_string(v) + ") outside graph of " +
                             std::to_string(n_vertices) + " vertices");
        }
        if (u == v) continue;
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    for (auto& nb : adj) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    return Graph(std::move(adj), std::move(labels), std::move(attributes));
}

std::size_t Graph::n_edges() const {
    std::size_t twice = 0;
    for (const auto& nb : adjacency_) twice += nb.size();
    return twice / 2;
}

std::span<const VertexId> Graph::neighbors(VertexId v) const {
    if (v >= adjacency_.size()) {
        throw IndexError("vertex " + std::to_string(v) + " out of range [0, " + std::to_string(adjacency_.size()) +
                         ")");
    }
    return adjacency_[v];
}

const std::vector<Label>& Graph::labels() const {
    if (!labels_) throw ConfigError("graph has no vertex labels");
    return *labels_;
}

const Eigen::MatrixXd& Graph::attributes() const {
    if (!attributes_) throw ConfigError("graph has no vertex attributes");
    return *attributes_;
}

std::vector<Edge> Graph::edges() const {
    std::vector<Edge> out;
    for (VertexId u = 0; u < adjacency_.size(); ++u) {
        for (VertexId v : adjacency_[u]) {
            if (u < v) out.emplace_back(u, v);
        }
    }
    return out;
}

bool operator==(const Graph& a, const Graph& b) {
    if (a.adjacency_ != b.adjacency_ || a.labels_ != b.labels_) return false;
    if (a.attributes_.has_value() != b.attributes_.has_value()) return false;
    if (!a.attributes_) return true;
    return a.attributes_->rows() == b.attributes_->rows() && a.attributes_->cols() == b.attributes_->cols() &&
           *a.attributes_ == *b.attributes_;
}

std::span<const VertexId> neighbors(const Graph& g, VertexId v) { return g.neighbors(v); }

Graph make_barbell(std::size_t h, std::size_t k) {
    if (h < 3) throw ParameterError("barbell clique size must be >= 3, got " + std::to_string(h));
    if (k < 1) throw ParameterError("barbell path length must be >= 1, got " + std::to_string(k));
    const std::size_t n = 2 * h + k;
    const std::size_t b0 = h + k;
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = i + 1; j < h; ++j) {
            edges.emplace_back(i, j);
            edges.emplace_back(b0 + i, b0 + j);
        }
    }
    // path h..h+k-1 hanging between vertex 0 and vertex n-1
    edges.emplace_back(0, h);
    for (std::size_t p = h; p + 1 < h + k; ++p) edges.emplace_back(p, p + 1);
    edges.emplace_back(h + k - 1, n - 1);
    return Graph::from_edges(n, edges);
}

Graph permute_vertices(const Graph& g, std::span<const VertexId> perm) {
    const std::size_t n = g.n_vertices();
    if (perm.size() != n) {
        throw ParameterError("permutation has " + std::to_string(perm.size()) + " entries for " +
                             std::to_string(n) + " vertices");
    }
    std::vector<bool> seen(n, false);
    for (VertexId p : perm) {
        if (p >= n || seen[p]) throw ParameterError("vertex map is not a bijection");
        seen[p] = true;
    }

    std::vector<Edge> edges;
    for (const auto& [u, v] : g.edges()) edges.emplace_back(perm[u], perm[v]);

    std::optional<std::vector<Label>> labels;
    if (g.has_labels()) {
        labels.emplace(n);
        for (VertexId v = 0; v < n; ++v) (*labels)[perm[v]] = g.labels()[v];
    }
    std::optional<Eigen::MatrixXd> attrs;
    if (g.has_attributes()) {
        attrs.emplace(g.attributes().rows(), g.attributes().cols());
        for (VertexId v = 0; v < n; ++v) attrs->row(perm[v]) = g.attributes().row(v);
    }
    return Graph::from_edges(n, edges, std::move(labels), std::move(attrs));
}

std::size_t Targets::size() const {
    switch (kind) {
        case TargetKind::classes: return classes.size();
        case TargetKind::regression: return regression.size();
        case TargetKind::none: break;
    }
    return 0;
}

Targets Targets::from_class_labels(std::span<const Label> raw) {
    Targets t;
    t.kind = TargetKind::classes;
    t.class_values.assign(raw.begin(), raw.end());
    std::sort(t.class_values.begin(), t.class_values.end());
    t.class_values.erase(std::unique(t.class_values.begin(), t.class_values.end()), t.class_values.end());
    t.classes.reserve(raw.size());
    for (Label l : raw) {
        auto it = std::lower_bound(t.class_values.begin(), t.class_values.end(), l);
        t.classes.push_back(static_cast<int>(it - t.class_values.begin()));
    }
    return t;
}

Targets Targets::from_regression(std::vector<std::vector<double>> values) {
    Targets t;
    t.kind = TargetKind::regression;
    t.regression = std::move(values);
    return t;
}

GraphDataset::GraphDataset(std::vector<Graph> graphs, Targets targets)
    : graphs_(std::move(graphs)), targets_(std::move(targets)) {
    offsets_.reserve(graphs_.size() + 1);
    for (std::size_t g = 0; g < graphs_.size(); ++g) {
        offsets_.push_back(offsets_.back() + graphs_[g].n_vertices());
        graph_of_.insert(graph_of_.end(), graphs_[g].n_vertices(), g);
    }
}

const Graph& GraphDataset::graph(std::size_t g) const {
    if (g >= graphs_.size()) throw IndexError("graph " + std::to_string(g) + " out of range");
    return graphs_[g];
}

std::size_t GraphDataset::global_id(std::size_t g, VertexId v) const {
    if (v >= graph(g).n_vertices()) {
        throw IndexError("vertex " + std::to_string(v) + " out of range in graph " + std::to_string(g));
    }
    return offsets_[g] + v;
}

std::pair<std::size_t, VertexId> GraphDataset::locate(std::size_t global) const {
    if (global >= total_vertices()) throw IndexError("global vertex " + std::to_string(global) + " out of range");
    const std::size_t g = graph_of_[global];
    return {g, global - offsets_[g]};
}

bool GraphDataset::has_labels() const {
    return !graphs_.empty() && std::all_of(graphs_.begin(), graphs_.end(), [](const Graph& g) { return g.has_labels(); });
}

bool GraphDataset::has_attributes() const {
    return !graphs_.empty() &&
           std::all_of(graphs_.begin(), graphs_.end(), [](const Graph& g) { return g.has_attributes(); });
}

std::size_t GraphDataset::attribute_dim() const { return has_attributes() ? graphs_.front().attribute_dim() : 0; }

bool operator==(const GraphDataset& a, const GraphDataset& b) {
    return a.graphs_ == b.graphs_ && a.targets_.kind == b.targets_.kind && a.targets_.classes == b.targets_.classes &&
           a.targets_.class_values == b.targets_.class_values && a.targets_.regression == b.targets_.regression;
}

namespace {

void check_graph(const Graph& g, std::size_t id, std::vector<Violation>& out) {
    const auto& adj = g.adjacency();
    const std::size_t n = adj.size();
    auto report = [&](std::string rule, std::string detail) { out.push_back({id, std::move(rule), std::move(detail)}); };

    bool asymmetric = false;
    for (VertexId u = 0; u < n; ++u) {
        const auto& nb = adj[u];
        for (std::size_t i = 0; i < nb.size(); ++i) {
            const VertexId v = nb[i];
            if (v >= n) {
                report("neighbor out of range", "vertex " + std::to_string(u) + " lists " + std::to_string(v));
                continue;
            }
            if (v == u) report("self-loop", "vertex " + std::to_string(u));
            if (i > 0 && nb[i - 1] >= v) report("unsorted neighbors", "vertex " + std::to_string(u));
            if (!asymmetric && std::find(adj[v].begin(), adj[v].end(), u) == adj[v].end()) {
                asymmetric = true;
                report("asymmetry", std::to_string(u) + " -> " + std::to_string(v) + " has no reverse edge");
            }
        }
    }
    if (g.has_labels() && g.labels().size() != n) {
        report("label count", std::to_string(g.labels().size()) + " labels for " + std::to_string(n) + " vertices");
    }
    if (g.has_attributes()) {
        if (static_cast<std::size_t>(g.attributes().rows()) != n) {
            report("attribute count",
                   std::to_string(g.attributes().rows()) + " rows for " + std::to_string(n) + " vertices");
        }
        if (g.attributes().cols() < 1) report("attribute dimension", "dimension must be >= 1");
    }
}

}  // namespace

std::vector<Violation> validate(const GraphDataset& ds) {
    std::vector<Violation> out;
    const auto& graphs = ds.graphs();
    for (std::size_t g = 0; g < graphs.size(); ++g) check_graph(graphs[g], g, out);

    if (!graphs.empty()) {
        const Graph& first = graphs.front();
        for (std::size_t g = 1; g < graphs.size(); ++g) {
            if (graphs[g].has_labels() != first.has_labels()) {
                out.push_back({g, "label presence mismatch", "differs from graph 0"});
            }
            if (graphs[g].has_attributes() != first.has_attributes()) {
                out.push_back({g, "attribute presence mismatch", "differs from graph 0"});
            } else if (first.has_attributes() && graphs[g].attribute_dim() != first.attribute_dim()) {
                out.push_back({g, "attribute dimension mismatch",
                               std::to_string(graphs[g].attribute_dim()) + " vs " +
                                   std::to_string(first.attribute_dim())});
            }
        }
    }
    const auto& t = ds.targets();
    if (t.kind != TargetKind::none && t.size() != graphs.size()) {
        out.push_back({std::nullopt, "target count",
                       std::to_string(t.size()) + " targets for " + std::to_string(graphs.size()) + " graphs"});
    }
    return out;
}

}  // namespace mpgk
