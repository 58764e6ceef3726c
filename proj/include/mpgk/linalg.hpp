#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include <Eigen/Dense>

namespace mpgk {

struct EigenResult {
    Eigen::VectorXd values;   // descending
    Eigen::MatrixXd vectors;  // orthonormal columns matching `values`
};

/// Full spectral decomposition of a symmetric matrix.
/// Throws ContractError if A deviates from symmetry by more than 1e-9 (relative).
EigenResult sym_eig(const Eigen::MatrixXd& A);

/// Largest |A(i,j) - A(j,i)| relative to max(1, max|A|).
double symmetry_error(const Eigen::MatrixXd& A);

/// Smallest and largest eigenvalue of a symmetric matrix.
std::pair<double, double> eigen_range(const Eigen::MatrixXd& A);

/// Relative spectral cutoff below which Nyström drops components.
inline constexpr double kNystromClip = 1e-10;

/// Nyström features from the all-vs-landmark kernel block.
///
/// `C` holds k(i, l) for every point i (rows) and landmark l (columns);
/// `landmark_rows[j]` is the row of C that corresponds to landmark j, so the
/// landmark block W is C restricted to those rows. Returns Φ = C U Λ^{-1/2}
/// over the eigenpairs of W above kNystromClip·λ_max, so ΦΦᵀ = C W⁺ Cᵀ.
/// Throws DegenerateError when W has no eigenvalue above the cutoff.
Eigen::MatrixXd nystrom_fit(const Eigen::MatrixXd& C, std::span<const std::size_t> landmark_rows);

/// Same, evaluating the columns through `kernel(point, landmark)`.
Eigen::MatrixXd nystrom_fit(const std::function<double(std::size_t, std::size_t)>& kernel, std::size_t n_points,
                            std::span<const std::size_t> landmarks);

/// Kernel PCA coordinates U_d Λ_d^{1/2} of the top `dims` eigenpairs.
/// With `center` the matrix is double-centered first. Negative eigenvalues
/// among the top `dims` are clipped to zero with a warning.
/// Throws ParameterError when dims is 0 or exceeds the matrix size.
Eigen::MatrixXd kernel_pca(const Eigen::MatrixXd& K, std::size_t dims, bool center = true);

/// Double centering: subtract row and column means, add the grand mean.
Eigen::MatrixXd center_kernel(const Eigen::MatrixXd& K);

}  // namespace mpgk
