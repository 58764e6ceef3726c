#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpgk/kernel_state.hpp"

namespace mpgk {

struct TreeNode {
    std::optional<std::size_t> parent;
    std::vector<std::size_t> children;
    int depth = 0;
    double omega = 0.0;
    /// omega(node) - omega(parent); omega itself at the root.
    double weight = 0.0;
    /// Dataset vertex for leaves.
    std::optional<std::size_t> vertex;
    std::size_t member_count = 0;
};

/// ω for a node at `depth` edges below the root: 0 at the root, (d-1)/d below.
double omega(int depth);

/// Hierarchy H = (T, w) over dataset vertices inducing the strong kernel
/// k_s(x, y) = ω(deepest common ancestor of leaf(x) and leaf(y)).
class ClusterTree {
public:
    /// Node 0 is the root. Validates connectivity, leaf coverage of
    /// [0, n_vertices), ω monotonicity and w >= 0; throws ContractError.
    ClusterTree(std::vector<TreeNode> nodes, std::size_t n_vertices);

    std::size_t root() const { return 0; }
    std::size_t size() const { return nodes_.size(); }
    std::size_t n_vertices() const { return leaf_of_.size(); }
    const TreeNode& node(std::size_t id) const { return nodes_.at(id); }
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    /// Throws ContractError for unknown vertices.
    std::size_t leaf_of(std::size_t vertex) const;
    /// Node ids along the path leaf(vertex) -> root.
    std::span<const std::size_t> path(std::size_t vertex) const;

    std::size_t common_ancestor(std::size_t a, std::size_t b) const;
    double strong_kernel(std::size_t x, std::size_t y) const { return nodes_[common_ancestor(leaf_of(x), leaf_of(y))].omega; }

    /// Distinguishes trees so histograms from different trees are not mixed.
    std::uint64_t id() const { return id_; }

    /// Indented text: node id, depth, ω and member count. Diagnostic only.
    std::string dump() const;

private:
    std::vector<TreeNode> nodes_;
    std::vector<std::size_t> leaf_of_;
    std::vector<double> weights_;
    // flattened leaf->root paths, path_offset_[v] .. path_offset_[v+1]
    std::vector<std::size_t> paths_;
    std::vector<std::size_t> path_offset_;
    std::uint64_t id_ = 0;
};

/// Sparse subtree counts of a vertex multiset, sorted by node id.
struct Histogram {
    std::uint64_t tree_id = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> bins;

    std::uint32_t count(std::size_t node) const;
};

Histogram histogram(std::span<const std::size_t> members, const ClusterTree& tree);

/// Σ_v w(v) min(H_X(v), H_Y(v)): the optimal assignment value under k_s,
/// unmatched elements of the larger set contributing 0.
double assignment_value(const Histogram& hx, const Histogram& hy, const ClusterTree& tree);

struct Clustering {
    /// Cluster of each input point, dense in [0, n_clusters).
    std::vector<int> assignment;
    int n_clusters = 0;
    int iterations = 0;
    double objective = 0.0;
};

using KernelFn = std::function<double(std::size_t, std::size_t)>;

/// Kernel k-means on `points` using k(i, j) only. Seeding is randomized
/// farthest-point (k-means++) in kernel distance; fewer than `clusters`
/// clusters come back when the points have fewer distinct positions.
/// clusters >= |points| separates every distinct position.
Clustering kernel_kmeans(const KernelFn& kernel, std::span<const std::size_t> points, int clusters,
                         std::uint64_t seed, int max_iter);

/// Ordinary k-means on feature rows; equal to kernel_kmeans on ΦΦᵀ.
Clustering feature_kmeans(const Eigen::MatrixXd& features, std::span<const std::size_t> points, int clusters,
                          std::uint64_t seed, int max_iter);

struct HierarchyOptions {
    int depth = 4;
    int branching = 4;
    int max_iter = 50;
};

/// Recursive c-way kernel k-means to depth h over all vertices of `state`.
/// Internal clusters occupy depths 1..h; every vertex is a leaf below its
/// deepest cluster and shares that cluster's ω (leaf weight 0). Throws ParameterError for h < 1 or c < 2.
ClusterTree build_hierarchy(const VertexKernelState& state, const HierarchyOptions& options, std::uint64_t seed);

}  // namespace mpgk
