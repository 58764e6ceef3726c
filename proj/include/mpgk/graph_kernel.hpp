#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "mpgk/graph.hpp"
#include "mpgk/hierarchy.hpp"
#include "mpgk/kernel_state.hpp"
#include "mpgk/params.hpp"

namespace mpgk {

struct GramMatrix {
    Eigen::MatrixXd values;  // N x N, symmetric
    int iteration = 0;
    Variant variant = Variant::RR;
    bool normalized = false;
};

/// k_G(G_i, G_j) = Σ_{v1∈V_i} Σ_{v2∈V_j} k_v(v1, v2). In Nyström mode this is
/// <s_i, s_j> with s_i the sum of the feature rows of graph i.
GramMatrix gram_rconv(const VertexKernelState& state, const GraphDataset& ds);

/// Optimal assignment between the vertex sets under the strong kernel of
/// `tree` (built from `state`), evaluated by histogram intersection.
GramMatrix gram_assign(const VertexKernelState& state, const GraphDataset& ds, const ClusterTree& tree);

/// K(i, j) / sqrt(K(i, i) K(j, j)). Throws DegenerateError naming the first
/// graph with a non-positive diagonal entry.
GramMatrix normalize(const GramMatrix& K);

/// Graph-level Gram for state k^t under the second letter of `params.variant`,
/// building the graph-level hierarchy when needed. Honors params.normalize.
GramMatrix graph_gram(const VertexKernelState& state, const GraphDataset& ds, const KernelParams& params);

/// Runs message passing and emits one Gram per t = 1..T.
void compute_grams(const GraphDataset& ds, const KernelParams& params,
                   const std::function<void(const GramMatrix&)>& visit);
std::vector<GramMatrix> compute_grams(const GraphDataset& ds, const KernelParams& params);

/// Graph-level Nyström features for one state: samples `graph_landmarks`
/// graphs (seeded), evaluates their Gram columns and fits features. The
/// result always has `graph_landmarks` columns; components dropped by the
/// spectral cutoff are left as zero columns.
/// Throws ParameterError if graph_landmarks is 0 or exceeds N.
Eigen::MatrixXd graph_nystrom_features(const VertexKernelState& state, const GraphDataset& ds,
                                       const KernelParams& params, std::size_t graph_landmarks);

/// Landmark graphs used for iteration t.
std::vector<std::size_t> graph_landmark_ids(std::size_t n_graphs, std::size_t graph_landmarks, std::uint64_t seed,
                                            int iteration);

/// Per-t features for t = 1..T concatenated column-wise (N x T·m_g).
Eigen::MatrixXd graph_features(const GraphDataset& ds, const KernelParams& params, std::size_t graph_landmarks);

}  // namespace mpgk
