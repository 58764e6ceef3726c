#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mpgk/graph.hpp"
#include "mpgk/hierarchy.hpp"
#include "mpgk/kernel_state.hpp"
#include "mpgk/params.hpp"

namespace mpgk {

/// What the base kernel may look at for one vertex.
struct VertexData {
    std::optional<Label> label;
    std::optional<Eigen::VectorXd> attributes;
    std::size_t degree = 0;
};

VertexData vertex_data(const GraphDataset& ds, std::size_t global);

/// k_v^0 between two vertices:
///   delta              1 if the labels match, else 0
///   linear             attribute dot product
///   delta_plus_linear  the sum of both
///   degree             product of the degrees
/// Throws ConfigError when the required label/attribute is missing.
double base_kernel(const VertexData& u, const VertexData& v, BaseKernel choice);

/// Throws ConfigError unless every graph carries what `choice` needs.
void check_base_kernel(const GraphDataset& ds, BaseKernel choice);

/// Neighbor lists of all dataset vertices in global ids (CSR, sorted).
class NeighborIndex {
public:
    explicit NeighborIndex(const GraphDataset& ds);
    std::span<const std::size_t> operator[](std::size_t v) const {
        return {ids_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }
    std::size_t size() const { return offsets_.size() - 1; }

private:
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> ids_;
};

/// k_v^0 over the whole dataset. Exact mode fills the nN x nN matrix;
/// Nyström mode samples `params.landmarks` vertices without replacement and
/// fits features to their kernel columns. Throws ParameterError if m > nN.
VertexKernelState init_state(const GraphDataset& ds, const KernelParams& params);

/// One R-convolution step:
///   k^{t+1}(v1, v2) = α k^t(v1, v2) + β Σ_{u1∈N(v1)} Σ_{u2∈N(v2)} k^t(u1, u2).
/// Nyström states evaluate only the landmark columns and refit on the same
/// landmarks.
VertexKernelState rr_update(const VertexKernelState& state, const GraphDataset& ds, double alpha, double beta);

/// One assignment step:
///   k^{t+1}(v1, v2) = α k^t(v1, v2) + β A(N(v1), N(v2))
/// with A the optimal assignment under the strong kernel of `tree` (built from
/// k^t). Throws ContractError if the tree does not cover every vertex.
VertexKernelState assign_update(const VertexKernelState& state, const GraphDataset& ds, double alpha, double beta,
                                const ClusterTree& tree);

/// Seed of the hierarchy built from k^t; purpose 0 = neighborhoods, 1 = graph vertex sets.
std::uint64_t hierarchy_seed(std::uint64_t seed, int iteration, int purpose);

HierarchyOptions hierarchy_options(const KernelParams& params);

/// Runs T updates from k^0 and hands each state k^1..k^T to `visit` in order.
/// Assignment variants rebuild the neighborhood hierarchy from the previous
/// state before every update.
void run_message_passing(const GraphDataset& ds, const KernelParams& params,
                         const std::function<void(const VertexKernelState&)>& visit);

/// Convenience wrapper collecting all T states.
std::vector<VertexKernelState> run_message_passing(const GraphDataset& ds, const KernelParams& params);

/// Caps the worker threads used by the data-parallel loops (0 = default).
void set_num_threads(int threads);

}  // namespace mpgk
