#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace mpgk {

enum class StateMode { exact, nystrom };

/// Vertex kernel k_v^t over all nN dataset vertices (global ids).
///
/// Exact mode keeps the dense nN x nN matrix. Nyström mode keeps features Φ
/// (nN x r, r <= m) with k_v^t(u, v) ≈ <Φ_u, Φ_v>, plus the m landmark ids
/// sampled at t = 0.
struct VertexKernelState {
    StateMode mode = StateMode::exact;
    Eigen::MatrixXd exact;
    Eigen::MatrixXd features;
    std::vector<std::size_t> landmarks;
    int iteration = 0;

    static VertexKernelState make_exact(Eigen::MatrixXd K, int iteration);
    static VertexKernelState make_nystrom(Eigen::MatrixXd phi, std::vector<std::size_t> landmarks, int iteration);

    std::size_t n_vertices() const {
        return static_cast<std::size_t>(mode == StateMode::exact ? exact.rows() : features.rows());
    }
    double kernel(std::size_t u, std::size_t v) const {
        if (mode == StateMode::exact) return exact(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
        return features.row(static_cast<Eigen::Index>(u)).dot(features.row(static_cast<Eigen::Index>(v)));
    }
    /// The full nN x nN matrix (ΦΦᵀ in Nyström mode).
    Eigen::MatrixXd dense() const;
};

}  // namespace mpgk
