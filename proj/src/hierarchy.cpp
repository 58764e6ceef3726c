#include "mpgk/hierarchy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <sstream>

#include "mpgk/error.hpp"
#include "mpgk/random.hpp"

namespace mpgk {

double omega(int depth) {
    if (depth <= 0) return 0.0;
    return static_cast<double>(depth - 1) / static_cast<double>(depth);
}

namespace {

std::atomic<std::uint64_t> g_next_tree_id{1};

}  // namespace

ClusterTree::ClusterTree(std::vector<TreeNode> nodes, std::size_t n_vertices)
    : nodes_(std::move(nodes)), leaf_of_(n_vertices, std::numeric_limits<std::size_t>::max()),
      id_(g_next_tree_id.fetch_add(1)) {
    if (nodes_.empty()) throw ContractError("cluster tree has no nodes");
    if (nodes_[0].parent) throw ContractError("node 0 must be the root");

    weights_.resize(nodes_.size());
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
        const TreeNode& nd = nodes_[id];
        if (id != 0) {
            if (!nd.parent || *nd.parent >= nodes_.size()) {
                throw ContractError("node " + std::to_string(id) + " has no valid parent");
            }
            const TreeNode& par = nodes_[*nd.parent];
            if (std::find(par.children.begin(), par.children.end(), id) == par.children.end()) {
                throw ContractError("node " + std::to_string(id) + " missing from its parent's children");
            }
            if (nd.depth != par.depth + 1) throw ContractError("inconsistent depth at node " + std::to_string(id));
            if (nd.omega < par.omega) throw ContractError("omega decreases at node " + std::to_string(id));
            if (std::abs(nd.weight - (nd.omega - par.omega)) > 1e-12 || nd.weight < 0.0) {
                throw ContractError("weight inconsistent with omega at node " + std::to_string(id));
            }
        } else if (nd.depth != 0 || std::abs(nd.weight - nd.omega) > 1e-12 || nd.weight < 0.0) {
            throw ContractError("malformed root");
        }
        for (std::size_t c : nd.children) {
            if (c >= nodes_.size() || nodes_[c].parent != id) {
                throw ContractError("child link of node " + std::to_string(id) + " is broken");
            }
        }
        if (nd.vertex) {
            if (!nd.children.empty()) throw ContractError("leaf " + std::to_string(id) + " has children");
            if (*nd.vertex >= n_vertices || leaf_of_[*nd.vertex] != std::numeric_limits<std::size_t>::max()) {
                throw ContractError("vertex " + std::to_string(*nd.vertex) + " has no unique leaf");
            }
            leaf_of_[*nd.vertex] = id;
        }
        weights_[id] = nd.weight;
    }

    // reachability from the root
    std::vector<bool> seen(nodes_.size(), false);
    std::vector<std::size_t> stack{0};
    std::size_t visited = 0;
    while (!stack.empty()) {
        const std::size_t id = stack.back();
        stack.pop_back();
        if (seen[id]) throw ContractError("cluster tree contains a cycle");
        seen[id] = true;
        ++visited;
        for (std::size_t c : nodes_[id].children) stack.push_back(c);
    }
    if (visited != nodes_.size()) throw ContractError("cluster tree is not connected");

    path_offset_.reserve(n_vertices + 1);
    path_offset_.push_back(0);
    for (std::size_t v = 0; v < n_vertices; ++v) {
        if (leaf_of_[v] == std::numeric_limits<std::size_t>::max()) {
            throw ContractError("vertex " + std::to_string(v) + " has no leaf");
        }
        std::optional<std::size_t> cur = leaf_of_[v];
        while (cur) {
            paths_.push_back(*cur);
            cur = nodes_[*cur].parent;
        }
        path_offset_.push_back(paths_.size());
    }
}

std::size_t ClusterTree::leaf_of(std::size_t vertex) const {
    if (vertex >= leaf_of_.size()) throw ContractError("vertex " + std::to_string(vertex) + " not in tree");
    return leaf_of_[vertex];
}

std::span<const std::size_t> ClusterTree::path(std::size_t vertex) const {
    if (vertex >= leaf_of_.size()) throw ContractError("vertex " + std::to_string(vertex) + " not in tree");
    return {paths_.data() + path_offset_[vertex], path_offset_[vertex + 1] - path_offset_[vertex]};
}

std::size_t ClusterTree::common_ancestor(std::size_t a, std::size_t b) const {
    while (nodes_.at(a).depth > nodes_.at(b).depth) a = *nodes_[a].parent;
    while (nodes_[b].depth > nodes_[a].depth) b = *nodes_[b].parent;
    while (a != b) {
        a = *nodes_[a].parent;
        b = *nodes_[b].parent;
    }
    return a;
}

std::string ClusterTree::dump() const {
    std::ostringstream out;
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
        const std::size_t id = stack.back();
        stack.pop_back();
        const TreeNode& nd = nodes_[id];
        out << std::string(2 * static_cast<std::size_t>(nd.depth), ' ') << "node " << id << " depth " << nd.depth
            << " omega " << nd.omega << " members " << nd.member_count;
        if (nd.vertex) out << " vertex " << *nd.vertex;
        out << '\n';
        for (auto it = nd.children.rbegin(); it != nd.children.rend(); ++it) stack.push_back(*it);
    }
    return out.str();
}

std::uint32_t Histogram::count(std::size_t node) const {
    auto it = std::lower_bound(bins.begin(), bins.end(), node,
                               [](const auto& bin, std::size_t n) { return bin.first < n; });
    return (it != bins.end() && it->first == node) ? it->second : 0;
}

Histogram histogram(std::span<const std::size_t> members, const ClusterTree& tree) {
    Histogram h;
    h.tree_id = tree.id();
    std::vector<std::uint32_t> nodes;
    for (std::size_t v : members) {
        for (std::size_t n : tree.path(v)) nodes.push_back(static_cast<std::uint32_t>(n));
    }
    std::sort(nodes.begin(), nodes.end());
    for (std::size_t i = 0; i < nodes.size();) {
        std::size_t j = i;
        while (j < nodes.size() && nodes[j] == nodes[i]) ++j;
        h.bins.emplace_back(nodes[i], static_cast<std::uint32_t>(j - i));
        i = j;
    }
    return h;
}

double assignment_value(const Histogram& hx, const Histogram& hy, const ClusterTree& tree) {
    if (hx.tree_id != tree.id() || hy.tree_id != tree.id()) {
        throw ContractError("histograms were built on a different tree");
    }
    const auto& w = tree.weights();
    double total = 0.0;
    auto x = hx.bins.begin();
    auto y = hy.bins.begin();
    while (x != hx.bins.end() && y != hy.bins.end()) {
        if (x->first < y->first) {
            ++x;
        } else if (y->first < x->first) {
            ++y;
        } else {
            total += w[x->first] * static_cast<double>(std::min(x->second, y->second));
            ++x;
            ++y;
        }
    }
    return total;
}

namespace {

// Lloyd iterations shared by the kernel and feature variants. `pair_dist`
// gives squared distances between two points (for seeding), `centroid_dist`
// fills the n x k matrix of point-to-cluster distances for an assignment.
struct LloydProblem {
    std::size_t n = 0;
    double scale = 1.0;
    std::function<double(std::size_t, std::size_t)> pair_dist;
    std::function<void(const std::vector<int>&, int, Eigen::MatrixXd&)> centroid_dist;
};

Clustering lloyd(const LloydProblem& p, int clusters, std::uint64_t seed, int max_iter) {
    Clustering result;
    const std::size_t n = p.n;
    if (n == 0) return result;
    if (clusters < 1) throw ParameterError("k-means needs at least one cluster");
    const double eps = 1e-12 * p.scale;
    std::mt19937_64 rng(seed);

    // randomized farthest-point seeding
    std::vector<std::size_t> centers{std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)};
    std::vector<double> nearest(n);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = std::max(0.0, p.pair_dist(i, centers[0]));
    while (centers.size() < static_cast<std::size_t>(clusters)) {
        double total = 0.0;
        double far = 0.0;
        for (double d : nearest) {
            total += d;
            far = std::max(far, d);
        }
        if (far <= eps) break;
        const double r = std::uniform_real_distribution<double>(0.0, total)(rng);
        double acc = 0.0;
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (nearest[i] <= eps) continue;
            acc += nearest[i];
            pick = i;
            if (acc > r) break;
        }
        centers.push_back(pick);
        for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], std::max(0.0, p.pair_dist(i, pick)));
    }
    const int k = static_cast<int>(centers.size());

    std::vector<int> assign(n);
    std::vector<double> to_center(k);
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < k; ++c) to_center[c] = p.pair_dist(i, centers[c]);
        const double best = *std::min_element(to_center.begin(), to_center.end());
        int c = 0;
        while (to_center[c] > best + eps) ++c;
        assign[i] = c;
    }

    Eigen::MatrixXd dist(static_cast<Eigen::Index>(n), k);
    std::vector<int> next(n);
    for (int it = 1; it <= max_iter; ++it) {
        result.iterations = it;
        p.centroid_dist(assign, k, dist);
        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            // distances within eps count as ties so round-off cannot flip the choice
            const double best = dist.row(static_cast<Eigen::Index>(i)).minCoeff();
            int best_c = 0;
            while (dist(i, best_c) > best + eps) ++best_c;
            next[i] = best_c;
            ++sizes[best_c];
        }
        // repair empty clusters with the worst-fitting point of a shared cluster
        for (int c = 0; c < k; ++c) {
            if (sizes[c] != 0) continue;
            double worst = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (sizes[next[i]] >= 2) worst = std::max(worst, dist(i, next[i]));
            }
            if (worst <= eps) continue;
            std::size_t move = 0;
            while (sizes[next[move]] < 2 || dist(move, next[move]) < worst - eps) ++move;
            --sizes[next[move]];
            next[move] = c;
            sizes[c] = 1;
        }
        if (next == assign) break;
        assign.swap(next);
    }

    // drop clusters that stayed empty, keep relative order
    std::vector<int> remap(k, -1);
    int used = 0;
    for (int c = 0; c < k; ++c) {
        if (std::find(assign.begin(), assign.end(), c) != assign.end()) remap[c] = used++;
    }
    p.centroid_dist(assign, k, dist);
    result.objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) result.objective += std::max(0.0, dist(i, assign[i]));
    for (auto& a : assign) a = remap[a];
    result.assignment = std::move(assign);
    result.n_clusters = used;
    return result;
}

}  // namespace

Clustering kernel_kmeans(const KernelFn& kernel, std::span<const std::size_t> points, int clusters,
                         std::uint64_t seed, int max_iter) {
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd G(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) G(i, j) = G(j, i) = kernel(points[i], points[j]);
    }

    LloydProblem p;
    p.n = points.size();
    p.scale = n > 0 ? std::max(1e-300, G.diagonal().cwiseAbs().maxCoeff()) : 1.0;
    p.pair_dist = [&G](std::size_t i, std::size_t j) {
        const auto a = static_cast<Eigen::Index>(i);
        const auto b = static_cast<Eigen::Index>(j);
        return G(a, a) - 2.0 * G(a, b) + G(b, b);
    };
    p.centroid_dist = [&G, n](const std::vector<int>& assign, int k, Eigen::MatrixXd& dist) {
        Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, k);
        Eigen::VectorXd size = Eigen::VectorXd::Zero(k);
        for (Eigen::Index i = 0; i < n; ++i) {
            Z(i, assign[i]) = 1.0;
            size(assign[i]) += 1.0;
        }
        const Eigen::MatrixXd S = G * Z;  // S(i, c) = Σ_{j∈c} K(i, j)
        const Eigen::VectorXd Q = (Z.transpose() * S).diagonal();
        for (int c = 0; c < k; ++c) {
            if (size(c) == 0.0) {
                dist.col(c).setConstant(std::numeric_limits<double>::infinity());
                continue;
            }
            dist.col(c) = G.diagonal() - (2.0 / size(c)) * S.col(c) +
                          Eigen::VectorXd::Constant(n, Q(c) / (size(c) * size(c)));
        }
        dist = dist.cwiseMax(0.0);
    };
    return lloyd(p, clusters, seed, max_iter);
}

Clustering feature_kmeans(const Eigen::MatrixXd& features, std::span<const std::size_t> points, int clusters,
                          std::uint64_t seed, int max_iter) {
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd X(n, features.cols());
    for (Eigen::Index i = 0; i < n; ++i) X.row(i) = features.row(static_cast<Eigen::Index>(points[i]));

    LloydProblem p;
    p.n = points.size();
    p.scale = n > 0 ? std::max(1e-300, X.rowwise().squaredNorm().maxCoeff()) : 1.0;
    p.pair_dist = [&X](std::size_t i, std::size_t j) {
        return (X.row(static_cast<Eigen::Index>(i)) - X.row(static_cast<Eigen::Index>(j))).squaredNorm();
    };
    p.centroid_dist = [&X, n](const std::vector<int>& assign, int k, Eigen::MatrixXd& dist) {
        Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(k, X.cols());
        Eigen::VectorXd size = Eigen::VectorXd::Zero(k);
        for (Eigen::Index i = 0; i < n; ++i) {
            mu.row(assign[i]) += X.row(i);
            size(assign[i]) += 1.0;
        }
        for (int c = 0; c < k; ++c) {
            if (size(c) > 0.0) mu.row(c) /= size(c);
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            for (int c = 0; c < k; ++c) {
                dist(i, c) = size(c) > 0.0 ? (X.row(i) - mu.row(c)).squaredNorm()
                                           : std::numeric_limits<double>::infinity();
            }
        }
    };
    return lloyd(p, clusters, seed, max_iter);
}

ClusterTree build_hierarchy(const VertexKernelState& state, const HierarchyOptions& options, std::uint64_t seed) {
    if (options.depth < 1) throw ParameterError("hierarchy depth must be >= 1");
    if (options.branching < 2) throw ParameterError("hierarchy branching must be >= 2");
    const std::size_t n = state.n_vertices();

    std::vector<TreeNode> nodes(1);
    std::vector<std::vector<std::size_t>> members(1);
    members[0].resize(n);
    for (std::size_t v = 0; v < n; ++v) members[0][v] = v;
    nodes[0].member_count = n;

    auto add_node = [&](std::size_t parent, std::vector<std::size_t> mem, std::optional<std::size_t> vertex) {
        TreeNode nd;
        nd.parent = parent;
        nd.depth = nodes[parent].depth + 1;
        // a leaf only stands for its vertex: it inherits the cluster's ω so that
        // vertices the kernel cannot tell apart also score alike against themselves
        nd.omega = vertex ? nodes[parent].omega : omega(nd.depth);
        nd.weight = nd.omega - nodes[parent].omega;
        nd.vertex = vertex;
        nd.member_count = vertex ? 1 : mem.size();
        const std::size_t id = nodes.size();
        nodes[parent].children.push_back(id);
        nodes.push_back(std::move(nd));
        members.push_back(std::move(mem));
        return id;
    };

    KernelFn kernel = [&state](std::size_t i, std::size_t j) { return state.kernel(i, j); };

    std::deque<std::size_t> queue{0};
    while (!queue.empty()) {
        const std::size_t id = queue.front();
        queue.pop_front();
        if (nodes[id].vertex) continue;
        std::vector<std::size_t> mem = std::move(members[id]);
        const bool split = nodes[id].depth < options.depth && mem.size() >= static_cast<std::size_t>(options.branching);
        if (!split) {
            for (std::size_t v : mem) add_node(id, {}, v);
            continue;
        }
        const std::uint64_t node_seed = derive_seed(seed, {id});
        const Clustering cl =
            state.mode == StateMode::exact
                ? kernel_kmeans(kernel, mem, options.branching, node_seed, options.max_iter)
                : feature_kmeans(state.features, mem, options.branching, node_seed, options.max_iter);
        std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(cl.n_clusters));
        for (std::size_t i = 0; i < mem.size(); ++i) groups[cl.assignment[i]].push_back(mem[i]);
        for (auto& g : groups) queue.push_back(add_node(id, std::move(g), std::nullopt));
    }
    return ClusterTree(std::move(nodes), n);
}

}  // namespace mpgk
