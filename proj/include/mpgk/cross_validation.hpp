#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mpgk/svm.hpp"

namespace mpgk {

struct CvOptions {
    int folds = 10;
    int repeats = 10;
    int inner_folds = 9;
    std::vector<double> C_grid{1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
    std::uint64_t seed = 0;
    SmoOptions smo;
};

struct FoldResult {
    int repeat = 0;
    int fold = 0;
    double C = 0.0;
    /// Index into the Gram list (0-based); the kernel iteration is t = index + 1.
    int gram_index = 0;
    std::size_t n_test = 0;
    std::size_t n_correct = 0;
    double accuracy = 0.0;
};

struct CvReport {
    double mean_accuracy = 0.0;
    /// Population standard deviation of the repeat accuracies.
    double std_accuracy = 0.0;
    std::vector<double> repeat_accuracies;
    std::vector<FoldResult> folds;
};

/// Stratified split of `classes` into `folds` folds, shuffled with `seed`.
/// Returns the fold of every sample. Throws ParameterError if `folds`
/// exceeds the size of the smallest class.
std::vector<int> stratified_folds(std::span<const int> classes, int folds, std::uint64_t seed);

/// Adds a diagonal ridge when the smallest eigenvalue is below -1e-8·λ_max.
/// Returns the ridge applied (0 if none).
double make_psd(Eigen::MatrixXd& K);

/// Repeated stratified k-fold evaluation; per outer fold (C, Gram) is picked
/// by an inner stratified CV on the training part, then the SVM is retrained
/// on the full training part and scored on the held-out fold.
CvReport cross_validate(const std::vector<Eigen::MatrixXd>& grams, std::span<const int> classes,
                        const CvOptions& options);

/// One row per (repeat, fold) and a final summary row.
void write_cv_report(const CvReport& report, const std::filesystem::path& path);

}  // namespace mpgk
