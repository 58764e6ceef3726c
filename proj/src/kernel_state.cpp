#include "mpgk/kernel_state.hpp"

#include "mpgk/error.hpp"

namespace mpgk {

VertexKernelState VertexKernelState::make_exact(Eigen::MatrixXd K, int iteration) {
    if (K.rows() != K.cols()) throw ContractError("exact vertex kernel must be square");
    VertexKernelState s;
    s.mode = StateMode::exact;
    s.exact = std::move(K);
    s.iteration = iteration;
    return s;
}

VertexKernelState VertexKernelState::make_nystrom(Eigen::MatrixXd phi, std::vector<std::size_t> landmarks,
                                                  int iteration) {
    VertexKernelState s;
    s.mode = StateMode::nystrom;
    s.features = std::move(phi);
    s.landmarks = std::move(landmarks);
    s.iteration = iteration;
    return s;
}

Eigen::MatrixXd VertexKernelState::dense() const {
    if (mode == StateMode::exact) return exact;
    Eigen::MatrixXd K = features * features.transpose();
    // gemm need not be bitwise symmetric
    K.triangularView<Eigen::StrictlyLower>() = K.transpose();
    return K;
}

}  // namespace mpgk
