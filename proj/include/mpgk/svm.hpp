#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mpgk {

/// Binary C-SVM on a precomputed kernel. Decision value
/// f(x) = Σ_i dual[i] y_i K(x, x_i) + bias over the training points; the
/// positive side (+1) is the first class of the pair.
struct SvmModel {
    std::vector<std::size_t> support;  // training indices with dual > 0
    std::vector<double> dual;          // α_i, 0 < α_i <= C, aligned with support
    std::vector<int> support_labels;   // y_i for the support vectors
    std::vector<double> alpha;         // all training α_i (diagnostics)
    double bias = 0.0;
    double C = 1.0;
    int positive_class = 0;
    int negative_class = 1;
    std::size_t n_train = 0;
    int iterations = 0;
};

struct SmoOptions {
    double tolerance = 1e-3;
    long max_iter = 10'000'000;
};

/// SMO with second-order working-set selection. `labels` are ±1.
/// Throws DegenerateError if only one label is present, ContractError on
/// shape mismatch.
SvmModel svm_train(const Eigen::MatrixXd& K, std::span<const int> labels, double C, const SmoOptions& options = {});

/// Σ α_i y_i K(x, x_i) + b; `row` holds K(x, x_i) for every training point.
double svm_decision(const SvmModel& model, std::span<const double> row);

/// +1 when the decision value is >= 0, otherwise -1.
int svm_predict(const SvmModel& model, std::span<const double> row);

/// Largest violation of the KKT conditions of the training problem.
double kkt_violation(const SvmModel& model, const Eigen::MatrixXd& K, std::span<const int> labels);

/// One-vs-rest over dense classes 0..C-1; a single binary machine for two
/// classes.
struct MulticlassSvm {
    int n_classes = 0;
    std::vector<SvmModel> machines;
};

MulticlassSvm train_multiclass(const Eigen::MatrixXd& K, std::span<const int> classes, double C,
                               const SmoOptions& options = {});

/// Class with the largest decision value; ties go to the lowest index.
int predict_multiclass(const MulticlassSvm& model, std::span<const double> row);

}  // namespace mpgk
