#include "mpgk/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mpgk/error.hpp"
#include "mpgk/log.hpp"

namespace mpgk {

double symmetry_error(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) throw ContractError("matrix is not square");
    if (A.size() == 0) return 0.0;
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    return (A - A.transpose()).cwiseAbs().maxCoeff() / scale;
}

EigenResult sym_eig(const Eigen::MatrixXd& A) {
    if (symmetry_error(A) > 1e-9) throw ContractError("sym_eig: input is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A);
    if (solver.info() != Eigen::Success) throw Error("sym_eig: eigensolver did not converge");
    // Eigen sorts ascending
    return {solver.eigenvalues().reverse(), solver.eigenvectors().rowwise().reverse()};
}

std::pair<double, double> eigen_range(const Eigen::MatrixXd& A) {
    if (A.size() == 0) return {0.0, 0.0};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw Error("eigensolver did not converge");
    return {solver.eigenvalues()(0), solver.eigenvalues()(A.rows() - 1)};
}

Eigen::MatrixXd nystrom_fit(const Eigen::MatrixXd& C, std::span<const std::size_t> landmark_rows) {
    const auto m = static_cast<Eigen::Index>(landmark_rows.size());
    if (m < 1) throw ParameterError("nystrom_fit needs at least one landmark");
    if (C.cols() != m) throw ContractError("column block width does not match landmark count");

    Eigen::MatrixXd W(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        const auto row = static_cast<Eigen::Index>(landmark_rows[a]);
        if (row >= C.rows()) throw ContractError("landmark row outside the column block");
        W.row(a) = C.row(row);
    }
    W = 0.5 * (W + W.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(W);
    if (solver.info() != Eigen::Success) throw Error("nystrom_fit: eigensolver did not converge");
    const Eigen::VectorXd& lambda = solver.eigenvalues();
    const double lambda_max = lambda(m - 1);
    const double cutoff = kNystromClip * lambda_max;

    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = m - 1; k >= 0; --k) {
        if (lambda_max > 0.0 && lambda(k) > cutoff) keep.push_back(k);
    }
    if (keep.empty()) throw DegenerateError("nystrom_fit: landmark kernel block is numerically zero");

    Eigen::MatrixXd basis(m, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
        basis.col(static_cast<Eigen::Index>(c)) = solver.eigenvectors().col(keep[c]) / std::sqrt(lambda(keep[c]));
    }
    return C * basis;
}

Eigen::MatrixXd nystrom_fit(const std::function<double(std::size_t, std::size_t)>& kernel, std::size_t n_points,
                            std::span<const std::size_t> landmarks) {
    Eigen::MatrixXd C(static_cast<Eigen::Index>(n_points), static_cast<Eigen::Index>(landmarks.size()));
    for (std::size_t i = 0; i < n_points; ++i) {
        for (std::size_t j = 0; j < landmarks.size(); ++j) C(i, j) = kernel(i, landmarks[j]);
    }
    return nystrom_fit(C, landmarks);
}

Eigen::MatrixXd center_kernel(const Eigen::MatrixXd& K) {
    const Eigen::VectorXd row_mean = K.rowwise().mean();
    const Eigen::RowVectorXd col_mean = K.colwise().mean();
    const double grand = K.mean();
    Eigen::MatrixXd out = K;
    out.colwise() -= row_mean;
    out.rowwise() -= col_mean;
    out.array() += grand;
    return out;
}

Eigen::MatrixXd kernel_pca(const Eigen::MatrixXd& K, std::size_t dims, bool center) {
    if (dims < 1) throw ParameterError("kernel_pca: dims must be >= 1");
    if (dims > static_cast<std::size_t>(K.rows())) {
        throw ParameterError("kernel_pca: dims " + std::to_string(dims) + " exceeds matrix size " +
                             std::to_string(K.rows()));
    }
    Eigen::MatrixXd A = center ? center_kernel(K) : K;
    A = 0.5 * (A + A.transpose()).eval();
    const EigenResult eig = sym_eig(A);

    const auto d = static_cast<Eigen::Index>(dims);
    Eigen::MatrixXd coords(K.rows(), d);
    const double scale = eig.values.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < d; ++k) {
        double lambda = eig.values(k);
        if (lambda < 0.0) {
            // round-off negatives are expected after centering
            if (lambda < -1e-12 * scale) log_warn("kernel_pca: clipping negative eigenvalue " + std::to_string(lambda) + " to zero");
            lambda = 0.0;
        }
        coords.col(k) = eig.vectors.col(k) * std::sqrt(lambda);
    }
    return coords;
}

}  // namespace mpgk
